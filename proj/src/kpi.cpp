#include "fixflex/kpi.hpp"

#include <algorithm>
#include <set>

namespace fixflex {

ServiceKpi service_kpi(double pkt_m, double vkt_m, int seats) {
  ServiceKpi k;
  k.pkt_km = pkt_m / 1000.0;
  k.vkt_km = vkt_m / 1000.0;
  k.seats = seats;
  if (vkt_m > 0.0) {
    k.ratio = pkt_m / vkt_m;
    if (seats > 0) k.load_factor = *k.ratio / seats;
  }
  return k;
}

KpiRecord compute_kpis(const DaySummary& day) {
  KpiRecord r;
  r.day = day.day;
  r.replication = day.replication;
  r.fix = service_kpi(day.fix.pkt, day.fix.vkt, day.fix.seats);
  r.flex = service_kpi(day.flex.pkt, day.flex.vkt, day.flex.seats);
  r.denied_travelers = day.denied_travelers;
  r.injected = day.injected;
  r.completed = day.completed;
  r.stranded = day.stranded;
  r.rebalancing_moves = day.rebalancing_moves;
  return r;
}

std::vector<std::string> split_columns(const World& world) {
  std::set<std::string> all;
  for (const auto& [cat, types] : world.category_types) all.insert(types.begin(), types.end());
  std::vector<std::string> out(all.begin(), all.end());
  out.push_back("INCOMPLETE");
  return out;
}

std::vector<ModeSplitRow> mode_split(const DaySummary& day, const World& world, const std::vector<std::string>& types) {
  std::vector<ModeSplitRow> rows;
  for (const std::string& cat : world.categories) {
    ModeSplitRow row;
    row.day = day.day;
    row.replication = day.replication;
    row.category = cat;
    row.counts.assign(types.size(), 0);
    row.shares.assign(types.size(), 0.0);
    if (const auto it = day.by_category.find(cat); it != day.by_category.end()) {
      for (const auto& [type, stats] : it->second) {
        const auto col = std::find(types.begin(), types.end(), type);
        if (col == types.end()) throw InvariantViolation("unexpected path type " + type);
        row.counts[static_cast<std::size_t>(col - types.begin())] += stats.travelers;
        row.travelers += stats.travelers;
        row.completed += stats.completed;
      }
    }
    if (row.travelers > 0)
      for (std::size_t i = 0; i < types.size(); ++i)
        row.shares[i] = static_cast<double>(row.counts[i]) / row.travelers;
    rows.push_back(std::move(row));
  }
  return rows;
}

double mean_share(const ScenarioResult& result, const std::string& category, const std::string& type, int from_day,
                  int to_day) {
  double sum = 0.0;
  int n = 0;
  for (const ReplicationResult& rep : result.replications)
    for (const DaySummary& d : rep.days) {
      if (d.day < from_day || d.day > to_day) continue;
      const auto cat = d.by_category.find(category);
      if (cat == d.by_category.end()) continue;
      int total = 0;
      int hit = 0;
      for (const auto& [t, s] : cat->second) {
        total += s.travelers;
        if (t == type) hit += s.travelers;
      }
      if (total == 0) continue;
      sum += static_cast<double>(hit) / total;
      ++n;
    }
  return n > 0 ? sum / n : 0.0;
}

}  // namespace fixflex
