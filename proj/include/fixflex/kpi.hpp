#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fixflex/engine.hpp"

namespace fixflex {

struct ServiceKpi {
  double pkt_km = 0.0;
  double vkt_km = 0.0;
  int seats = 0;
  /// PKT/VKT and ratio/seats; empty when the service drove no distance.
  std::optional<double> ratio;
  std::optional<double> load_factor;

  [[nodiscard]] bool zero_vkt() const { return !ratio.has_value(); }
};

[[nodiscard]] ServiceKpi service_kpi(double pkt_m, double vkt_m, int seats);

struct KpiRecord {
  int day = 0;
  int replication = 0;
  ServiceKpi fix;
  ServiceKpi flex;
  int denied_travelers = 0;
  int injected = 0;
  int completed = 0;
  int stranded = 0;
  int rebalancing_moves = 0;
};

[[nodiscard]] KpiRecord compute_kpis(const DaySummary& day);

/// Path-type counts of one category on one day. Types follow `types`.
struct ModeSplitRow {
  int day = 0;
  int replication = 0;
  std::string category;
  int travelers = 0;
  int completed = 0;
  std::vector<int> counts;
  std::vector<double> shares;
};

/// Column order for mode split output: every path type of every category,
/// sorted, followed by INCOMPLETE.
[[nodiscard]] std::vector<std::string> split_columns(const World& world);

[[nodiscard]] std::vector<ModeSplitRow> mode_split(const DaySummary& day, const World& world,
                                                   const std::vector<std::string>& types);

/// Mean share of `type` in `category` over days [from, to] and every replication.
[[nodiscard]] double mean_share(const ScenarioResult& result, const std::string& category, const std::string& type,
                                int from_day, int to_day);

}  // namespace fixflex
