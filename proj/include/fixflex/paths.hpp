#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fixflex/core.hpp"
#include "fixflex/fixed_service.hpp"
#include "fixflex/network.hpp"

namespace fixflex {

/// One member of a leg's transit component: a fixed line, or the on-demand service.
struct ServiceRef {
  Mode kind = Mode::Fix;
  LineIdx line;

  static ServiceRef fix(LineIdx l) { return {Mode::Fix, l}; }
  static ServiceRef flex() { return {Mode::Flex, LineIdx{}}; }
  auto operator<=>(const ServiceRef&) const = default;
};

/// Throws std::invalid_argument for an empty or mixed component.
[[nodiscard]] Mode mode_of_leg(std::span<const ServiceRef> component);

/// A transit leg: board at any stop of `board`, ride any member of
/// `services`, leave at any stop of `alight`.
struct Leg {
  std::vector<StopIdx> board;
  std::vector<ServiceRef> services;
  std::vector<StopIdx> alight;
  Mode mode = Mode::Fix;
  ComponentIdx component;
  Seconds free_flow = 0.0;

  [[nodiscard]] bool has_line(LineIdx l) const;
  [[nodiscard]] std::vector<LineIdx> lines() const;
};

/// Walk, leg, walk, leg, ..., walk from origin to destination.
/// walks[j] leads to leg j; walks.back() is the egress walk.
struct PathAlternative {
  StopIdx origin;
  StopIdx destination;
  std::vector<Leg> legs;
  std::vector<Meters> walks;
  std::string category;

  [[nodiscard]] int transfers() const { return legs.empty() ? 0 : static_cast<int>(legs.size()) - 1; }
  /// Leg modes joined with '-', e.g. "FIX-FLEX"; "WALK" without legs.
  [[nodiscard]] std::string type() const;
  [[nodiscard]] Meters walk_total() const;
  [[nodiscard]] Seconds free_flow_total() const;
};

/// Learning key shared by every leg with the same mode, stops and line set.
struct ComponentInfo {
  Mode mode = Mode::Fix;
  std::vector<StopIdx> board;
  std::vector<LineIdx> lines;
  std::vector<StopIdx> alight;
  Seconds free_flow = 0.0;

  auto operator<=>(const ComponentInfo&) const = default;
};

struct ChoiceSetFilters {
  int max_transfers = 1;
  Meters max_walk = 1000.0;
  /// Allowed path types per OD category; categories not listed allow every type.
  std::map<std::string, std::vector<std::string>> allowed_types;
  /// Stops where transfers may happen; empty means anywhere.
  std::vector<StopIdx> transfer_stops;
  bool dominance_pruning = false;
  /// Lines with the same boarding and alighting stops are merged when their
  /// free-flow leg times differ by at most this much.
  Seconds merge_epsilon = 0.0;
};

/// A path together with the index of the next leg still to be travelled.
struct ActivePath {
  PathIdx path;
  std::uint16_t leg = 0;

  auto operator<=>(const ActivePath&) const = default;
};
using PathSet = std::vector<ActivePath>;

class GlobalPathSet {
 public:
  PathIdx add(PathAlternative p);
  ComponentIdx intern(const ComponentInfo& c);

  [[nodiscard]] const PathAlternative& path(PathIdx i) const { return paths_.at(i.get()); }
  [[nodiscard]] const Leg& leg(ActivePath a) const { return paths_.at(a.path.get()).legs.at(a.leg); }
  [[nodiscard]] bool finished(ActivePath a) const { return a.leg >= paths_.at(a.path.get()).legs.size(); }
  [[nodiscard]] std::span<const PathAlternative> paths() const { return paths_; }
  [[nodiscard]] std::span<const ComponentInfo> components() const { return components_; }
  [[nodiscard]] const ComponentInfo& component(ComponentIdx c) const { return components_.at(c.get()); }

  /// I^od; empty when the OD has no alternatives.
  [[nodiscard]] std::span<const PathIdx> alternatives(StopIdx o, StopIdx d) const;
  [[nodiscard]] PathSet initial_set(StopIdx o, StopIdx d) const;
  [[nodiscard]] const std::map<std::pair<StopIdx, StopIdx>, std::vector<PathIdx>>& by_od() const { return by_od_; }

 private:
  std::vector<PathAlternative> paths_;
  std::vector<ComponentInfo> components_;
  std::map<ComponentInfo, ComponentIdx> component_ids_;
  std::map<std::pair<StopIdx, StopIdx>, std::vector<PathIdx>> by_od_;
};

/// "C2B" style category from "corridor"/"branch" stop tags, or "ALL".
[[nodiscard]] std::string od_category(const Network& net, StopIdx o, StopIdx d);

/// Enumerates paths for every OD in `ods`. Throws ConfigError naming every OD
/// left without alternatives.
[[nodiscard]] GlobalPathSet generate_choice_sets(const Network& net, std::span<const FixLine> lines,
                                                 const RouteTable& flex_routes, const ChoiceSetFilters& filters,
                                                 std::span<const std::pair<StopIdx, StopIdx>> ods);

/// Problems with a single path against the structural rules and the filters.
[[nodiscard]] std::vector<std::string> check_path(const PathAlternative& p, const Network& net,
                                                  const ChoiceSetFilters& filters);

/// One-line human-readable rendering of a path.
[[nodiscard]] std::string describe(const PathAlternative& p, const Network& net, std::span<const FixLine> lines);

// Action-conditioned path sets. Each returns a partition of the input by the
// stated membership; a path whose stop set holds k stops lands in k cells.

/// Keyed by boarding stop of the next leg. Finished paths are skipped.
[[nodiscard]] std::map<StopIdx, PathSet> connection_sets(const GlobalPathSet& g, std::span<const ActivePath> set);
/// Keyed by the next leg's mode.
[[nodiscard]] std::map<Mode, PathSet> mode_sets(const GlobalPathSet& g, std::span<const ActivePath> bucket);
/// Keyed by alighting stop of the next leg.
[[nodiscard]] std::map<StopIdx, PathSet> dropoff_sets(const GlobalPathSet& g, std::span<const ActivePath> bucket);
/// (paths whose next leg contains `arriving`, the rest).
[[nodiscard]] std::pair<PathSet, PathSet> board_stay_partition(const GlobalPathSet& g,
                                                               std::span<const ActivePath> bucket, LineIdx arriving);
/// Keyed by alighting stop of the boarded leg.
[[nodiscard]] std::map<StopIdx, PathSet> alight_sets(const GlobalPathSet& g, std::span<const ActivePath> boarded);

}  // namespace fixflex
