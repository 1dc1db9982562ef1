#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "fixflex/core.hpp"

namespace fixflex {

struct Stop {
  std::string id;
  std::string name;
  double x = 0.0;
  double y = 0.0;
  /// Free-form location tag ("corridor", "branch", ...) used for OD categories.
  std::string tag;
};

/// Link running-time distribution. Log-normal parameters are (mu, sigma) of
/// the logarithm of the running time in seconds.
struct RunningTime {
  enum class Kind : std::uint8_t { Constant, LogNormal };

  Kind kind = Kind::Constant;
  Seconds value = 0.0;
  double mu = 0.0;
  double sigma = 0.0;

  static RunningTime constant(Seconds v) { return {Kind::Constant, v, 0.0, 0.0}; }
  static RunningTime lognormal(double mu, double sigma) { return {Kind::LogNormal, 0.0, mu, sigma}; }

  /// Nominal (free-flow) time: the constant, or the log-normal median exp(mu).
  [[nodiscard]] Seconds free_flow() const;
  /// Empty when valid, otherwise a description of what is wrong.
  [[nodiscard]] std::optional<std::string> validate() const;
};

struct RoadLink {
  std::string id;
  StopIdx from;
  StopIdx to;
  Meters length = 0.0;
  RunningTime running_time;
};

struct WalkLink {
  StopIdx from;
  StopIdx to;
  Meters distance = 0.0;
};

struct Route {
  std::vector<LinkIdx> links;
  /// Visited stops, origin first; size() == links.size() + 1.
  std::vector<StopIdx> stops;
  Seconds free_flow = 0.0;
  Meters length = 0.0;
};

class Network {
 public:
  StopIdx add_stop(Stop stop);
  LinkIdx add_road_link(RoadLink link);
  /// Adds a directed walking link. Zero-distance self links exist implicitly.
  void add_walk_link(WalkLink link);

  [[nodiscard]] std::size_t stop_count() const { return stops_.size(); }
  [[nodiscard]] std::size_t link_count() const { return links_.size(); }
  [[nodiscard]] const Stop& stop(StopIdx s) const { return stops_.at(s.get()); }
  [[nodiscard]] const RoadLink& link(LinkIdx l) const { return links_.at(l.get()); }
  [[nodiscard]] std::span<const Stop> stops() const { return stops_; }
  [[nodiscard]] std::span<const RoadLink> links() const { return links_; }

  [[nodiscard]] std::optional<StopIdx> find_stop(std::string_view id) const;
  [[nodiscard]] std::optional<LinkIdx> find_link(std::string_view id) const;
  /// The road link from -> to with the smallest free-flow time, if any.
  [[nodiscard]] std::optional<LinkIdx> link_between(StopIdx from, StopIdx to) const;

  [[nodiscard]] std::span<const LinkIdx> out_links(StopIdx s) const { return out_.at(s.get()); }
  /// Walking links leaving s, including the zero-length self link (always first).
  [[nodiscard]] std::span<const WalkLink> walks_from(StopIdx s) const { return walks_.at(s.get()); }
  [[nodiscard]] std::optional<Meters> walk_distance(StopIdx from, StopIdx to) const;

 private:
  std::vector<Stop> stops_;
  std::vector<RoadLink> links_;
  std::vector<std::vector<LinkIdx>> out_;
  std::vector<std::vector<WalkLink>> walks_;
  std::unordered_map<std::string, StopIdx> stop_ids_;
  std::unordered_map<std::string, LinkIdx> link_ids_;
};

/// Minimal free-flow route; equal-time routes are ordered by their link-id
/// sequence, lexicographically. origin == dest yields an empty route.
[[nodiscard]] std::optional<Route> shortest_route(const Network& net, StopIdx origin, StopIdx dest);

[[nodiscard]] Seconds sample_running_time(const RoadLink& link, RandomStream& rng);

/// Pedestrian model: anticipation is distance / speed; realizations multiply it
/// by a unit-mean log-normal factor with the given coefficient of variation.
struct WalkModel {
  double speed = 1.333;
  double variability = 0.0;

  [[nodiscard]] Seconds anticipated(Meters distance) const { return distance / speed; }
  [[nodiscard]] Seconds realized(Meters distance, RandomStream& rng) const;
};

[[nodiscard]] inline Seconds walk_time(const WalkLink& link, double speed, RandomStream& rng, double variability) {
  return WalkModel{speed, variability}.realized(link.distance, rng);
}

/// Free-flow shortest routes between every ordered pair of a stop set.
class RouteTable {
 public:
  RouteTable() = default;
  RouteTable(const Network& net, std::span<const StopIdx> stops);

  /// nullptr when either stop is outside the set or dest is unreachable.
  [[nodiscard]] const Route* find(StopIdx origin, StopIdx dest) const;
  [[nodiscard]] bool contains(StopIdx s) const { return slot(s) >= 0; }
  [[nodiscard]] std::span<const StopIdx> stops() const { return stops_; }

 private:
  [[nodiscard]] int slot(StopIdx s) const {
    return s.valid() && s.get() < slot_of_.size() ? slot_of_[s.get()] : -1;
  }

  std::vector<StopIdx> stops_;
  std::vector<int> slot_of_;
  std::vector<std::optional<Route>> routes_;
};

}  // namespace fixflex
