#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fixflex/core.hpp"
#include "fixflex/fixed_service.hpp"
#include "fixflex/network.hpp"

namespace fixflex {

struct Request {
  TravelerIdx traveler;
  StopIdx pickup;
  StopIdx dropoff;
  /// Decision time plus anticipated walk to the pickup stop.
  Seconds desired_pickup = 0.0;
  Seconds submitted = 0.0;
};

/// Ordered node sequence of a shuttle's work item. Consecutive nodes are
/// joined by single road links; pickups and drop-offs happen at nodes.
struct TripPlan {
  PlanIdx id;
  Seconds created = 0.0;
  std::vector<StopIdx> nodes;
  std::vector<Request> requests;
  /// Node indices of each request's pickup and drop-off.
  std::vector<std::size_t> pickup_node;
  std::vector<std::size_t> dropoff_node;
  std::vector<bool> picked;
  std::vector<bool> dropped;
  std::optional<VehicleIdx> vehicle;
  /// Nodes before this index have been reached by the vehicle.
  std::size_t progress = 0;

  [[nodiscard]] int onboard() const;
  /// Expected load when leaving each node from `progress` on.
  [[nodiscard]] std::vector<int> forecast_load() const;
  [[nodiscard]] bool complete() const;
  /// Position of s among the nodes not yet reached, if present.
  [[nodiscard]] std::optional<std::size_t> find_ahead(StopIdx s, std::size_t from) const;
};

/// Direct plan serving a single request.
[[nodiscard]] TripPlan make_direct_plan(PlanIdx id, const Request& req, const RouteTable& routes, Seconds now);

/// The plan with `req` inserted, when this can be done without revisiting a
/// node and without exceeding capacity at any node.
[[nodiscard]] std::optional<TripPlan> try_insert(const TripPlan& plan, const Request& req, const VehicleType& vtype,
                                                 const RouteTable& routes);

[[nodiscard]] inline bool feasible_insertion(const TripPlan& plan, const Request& req, const VehicleType& vtype,
                                             const RouteTable& routes) {
  return try_insert(plan, req, vtype, routes).has_value();
}

/// Sum over requests of max(0, now - desired pickup).
[[nodiscard]] Seconds cumulative_wait(const TripPlan& plan, Seconds now);

enum class FlexStatus : std::uint8_t { OnCall, EnRoute, Serving };

struct FlexVehicle {
  VehicleIdx id;
  FlexStatus status = FlexStatus::OnCall;
  /// On-call stop, or the last stop reached.
  StopIdx location;
  /// Rebalancing target while en-route.
  StopIdx destination;
  std::optional<PlanIdx> plan;
  std::vector<Rider> onboard;
};

struct FleetState {
  std::vector<FlexVehicle> vehicles;

  /// On-call vehicles at s plus vehicles en-route to s.
  [[nodiscard]] int supply(StopIdx s) const;
};

/// Plans indexed by id; `active` keeps creation order.
struct PlanBook {
  std::vector<TripPlan> plans;
  std::vector<PlanIdx> active;

  [[nodiscard]] TripPlan& operator[](PlanIdx p) { return plans[p.get()]; }
  [[nodiscard]] const TripPlan& operator[](PlanIdx p) const { return plans[p.get()]; }
  void retire(PlanIdx p);
};

/// Inserts into the first feasible active plan, or opens a direct plan.
/// Plans already assigned to a vehicle are considered only when
/// allow_assigned is set. Returns the plan now holding the request.
PlanIdx submit_request(const Request& req, PlanBook& book, const VehicleType& vtype, const RouteTable& routes,
                       bool allow_assigned, Seconds now);

struct Assignment {
  PlanIdx plan;
  VehicleIdx vehicle;
};

/// Unassigned plans by descending cumulative wait (ties: creation order) each
/// take the on-call vehicle with the least free-flow time to their first
/// node (ties: smaller id).
std::vector<Assignment> assignment_call(PlanBook& book, FleetState& fleet, const RouteTable& routes, Seconds now);

struct Move {
  VehicleIdx vehicle;
  StopIdx from;
  StopIdx to;
};

/// Sends on-call vehicles toward the lowest-supply balance stop until supplies
/// differ by at most one or no donor remains. Donors are on-call vehicles at a
/// stop whose supply is at least two above the minimum, or at a stop outside
/// the balance set. Moved vehicles become en-route.
std::vector<Move> rebalancing_call(FleetState& fleet, std::span<const StopIdx> balance_stops,
                                   const RouteTable& routes);

/// Problems with a plan's structure (each request picked before dropped,
/// no repeated nodes, load within capacity).
[[nodiscard]] std::vector<std::string> check_plan(const TripPlan& plan, const VehicleType& vtype);

}  // namespace fixflex
