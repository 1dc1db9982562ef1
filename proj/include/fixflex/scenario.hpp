#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fixflex/decisions.hpp"
#include "fixflex/fixed_service.hpp"
#include "fixflex/learning.hpp"
#include "fixflex/network.hpp"
#include "fixflex/paths.hpp"

namespace fixflex {

struct FlexConfig {
  bool enabled = false;
  VehicleTypeIdx vehicle_type;
  std::vector<StopIdx> service_area;
  /// Starting stop of every shuttle, in vehicle-id order.
  std::vector<StopIdx> initial_positions;
  Seconds assignment_interval = 5.0;
  std::optional<Seconds> rebalancing_interval;
  std::vector<StopIdx> balance_stops;
  bool insert_into_assigned = true;
};

struct PoissonOd {
  StopIdx origin;
  StopIdx destination;
  double rate_per_hour = 0.0;
};

/// A group of travelers appearing together; identities persist across days.
struct Cohort {
  StopIdx origin;
  StopIdx destination;
  int size = 0;
  Seconds time = 0.0;
};

struct DemandSpec {
  Seconds window = 10800.0;
  std::vector<PoissonOd> poisson;
  std::vector<Cohort> cohorts;
};

struct BehaviorConfig {
  ValueOfTime vot = ValueOfTime::from_ivt(-0.0015742, 300.0);
  WalkModel walk;
  CrowdingCurve crowding;
  SharingMode sharing = SharingMode::OdGroup;
  /// Learn waits still running at the horizon, truncated there.
  bool learn_censored_waits = false;
};

struct RunConfig {
  int days = 1;
  int replications = 1;
  std::uint64_t seed = 1;
  Seconds drain = 7200.0;
  bool warm_up = true;
  bool check_invariants = false;
};

struct ScenarioConfig {
  std::string name;
  Network network;
  std::vector<VehicleType> vehicle_types;
  std::vector<FixLine> lines;
  FlexConfig flex;
  DemandSpec demand;
  ChoiceSetFilters filters;
  BehaviorConfig behavior;
  RunConfig run;
  /// Canonical JSON rendering of the scenario document, used for hashing.
  std::string canonical;

  [[nodiscard]] Seconds horizon() const { return demand.window + run.drain; }
  [[nodiscard]] std::vector<std::pair<StopIdx, StopIdx>> demand_ods() const;
};

/// Parses and validates a scenario document. Throws ConfigError holding every
/// violation found, each prefixed with "<source>:<line>:<column>".
[[nodiscard]] ScenarioConfig parse_scenario_text(std::string_view text, const std::string& source = "<string>");
[[nodiscard]] ScenarioConfig parse_scenario(const std::filesystem::path& path);

/// FNV-1a 64-bit of the canonical rendering plus run settings.
[[nodiscard]] std::uint64_t config_hash(const ScenarioConfig& cfg);

}  // namespace fixflex
