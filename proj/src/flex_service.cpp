#include "fixflex/flex_service.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace fixflex {

int TripPlan::onboard() const {
  int n = 0;
  for (std::size_t i = 0; i < requests.size(); ++i) n += (picked[i] && !dropped[i]) ? 1 : 0;
  return n;
}

std::vector<int> TripPlan::forecast_load() const {
  std::vector<int> delta(nodes.size() + 1, 0);
  int load = onboard();
  for (std::size_t i = 0; i < requests.size(); ++i) {
    // pickups still pending at the node the vehicle is standing at
    if (!picked[i] && pickup_node[i] < progress) ++load;
    else if (!picked[i]) ++delta[pickup_node[i]];
    if (!dropped[i]) --delta[dropoff_node[i]];
  }
  std::vector<int> out;
  for (std::size_t k = progress; k < nodes.size(); ++k) {
    load += delta[k];
    out.push_back(load);
  }
  return out;
}

bool TripPlan::complete() const {
  return std::all_of(dropped.begin(), dropped.end(), [](bool b) { return b; });
}

std::optional<std::size_t> TripPlan::find_ahead(StopIdx s, std::size_t from) const {
  for (std::size_t k = std::max(from, progress); k < nodes.size(); ++k)
    if (nodes[k] == s) return k;
  return std::nullopt;
}

TripPlan make_direct_plan(PlanIdx id, const Request& req, const RouteTable& routes, Seconds now) {
  const Route* r = routes.find(req.pickup, req.dropoff);
  if (!r || req.pickup == req.dropoff) throw std::invalid_argument("no flexible route for request");
  TripPlan p;
  p.id = id;
  p.created = now;
  p.nodes = r->stops;
  p.requests = {req};
  p.pickup_node = {0};
  p.dropoff_node = {p.nodes.size() - 1};
  p.picked = {false};
  p.dropped = {false};
  return p;
}

namespace {

/// Extends nodes so that it reaches s after index `from`; returns s's index.
std::optional<std::size_t> reach(std::vector<StopIdx>& nodes, std::size_t from, StopIdx s, const RouteTable& routes) {
  for (std::size_t k = from; k < nodes.size(); ++k)
    if (nodes[k] == s) return k;
  const Route* r = routes.find(nodes.back(), s);
  if (!r || r->stops.size() < 2) return std::nullopt;
  for (std::size_t i = 1; i < r->stops.size(); ++i) {
    if (std::find(nodes.begin(), nodes.end(), r->stops[i]) != nodes.end()) return std::nullopt;
    nodes.push_back(r->stops[i]);
  }
  return nodes.size() - 1;
}

}  // namespace

std::optional<TripPlan> try_insert(const TripPlan& plan, const Request& req, const VehicleType& vtype,
                                   const RouteTable& routes) {
  if (req.pickup == req.dropoff || plan.nodes.empty()) return std::nullopt;
  TripPlan out = plan;
  const auto p = reach(out.nodes, plan.progress, req.pickup, routes);
  if (!p) return std::nullopt;
  const auto q = reach(out.nodes, *p + 1, req.dropoff, routes);
  if (!q) return std::nullopt;
  out.requests.push_back(req);
  out.pickup_node.push_back(*p);
  out.dropoff_node.push_back(*q);
  out.picked.push_back(false);
  out.dropped.push_back(false);
  if (out.onboard() > vtype.capacity) return std::nullopt;
  for (int load : out.forecast_load())
    if (load > vtype.capacity) return std::nullopt;
  return out;
}

Seconds cumulative_wait(const TripPlan& plan, Seconds now) {
  Seconds total = 0.0;
  for (const Request& r : plan.requests) total += std::max(0.0, now - r.desired_pickup);
  return total;
}

int FleetState::supply(StopIdx s) const {
  int n = 0;
  for (const FlexVehicle& v : vehicles) {
    if (v.status == FlexStatus::OnCall && v.location == s) ++n;
    if (v.status == FlexStatus::EnRoute && v.destination == s) ++n;
  }
  return n;
}

void PlanBook::retire(PlanIdx p) { active.erase(std::remove(active.begin(), active.end(), p), active.end()); }

PlanIdx submit_request(const Request& req, PlanBook& book, const VehicleType& vtype, const RouteTable& routes,
                       bool allow_assigned, Seconds now) {
  for (PlanIdx id : book.active) {
    TripPlan& plan = book[id];
    if (plan.vehicle && !allow_assigned) continue;
    if (auto updated = try_insert(plan, req, vtype, routes)) {
      plan = std::move(*updated);
      return id;
    }
  }
  const PlanIdx id{book.plans.size()};
  book.plans.push_back(make_direct_plan(id, req, routes, now));
  book.active.push_back(id);
  return id;
}

std::vector<Assignment> assignment_call(PlanBook& book, FleetState& fleet, const RouteTable& routes, Seconds now) {
  std::vector<std::pair<Seconds, PlanIdx>> pending;
  for (PlanIdx id : book.active)
    if (!book[id].vehicle) pending.emplace_back(cumulative_wait(book[id], now), id);
  std::stable_sort(pending.begin(), pending.end(), [](const auto& a, const auto& b) { return a.first > b.first; });

  std::vector<Assignment> out;
  for (const auto& [wait, id] : pending) {
    TripPlan& plan = book[id];
    FlexVehicle* best = nullptr;
    Seconds best_time = std::numeric_limits<double>::infinity();
    for (FlexVehicle& v : fleet.vehicles) {
      if (v.status != FlexStatus::OnCall) continue;
      const Route* r = routes.find(v.location, plan.nodes.front());
      if (!r) continue;
      if (r->free_flow < best_time) {
        best_time = r->free_flow;
        best = &v;
      }
    }
    if (!best) break;
    best->status = FlexStatus::Serving;
    best->plan = id;
    plan.vehicle = best->id;
    out.push_back({id, best->id});
  }
  return out;
}

std::vector<Move> rebalancing_call(FleetState& fleet, std::span<const StopIdx> balance_stops,
                                   const RouteTable& routes) {
  std::vector<Move> moves;
  if (balance_stops.empty()) return moves;
  auto in_balance = [&](StopIdx s) {
    return std::find(balance_stops.begin(), balance_stops.end(), s) != balance_stops.end();
  };
  for (;;) {
    std::vector<int> supply;
    for (StopIdx s : balance_stops) supply.push_back(fleet.supply(s));
    const auto min_it = std::min_element(supply.begin(), supply.end());
    const int lo = *min_it;
    const int hi = *std::max_element(supply.begin(), supply.end());
    const StopIdx target = balance_stops[static_cast<std::size_t>(min_it - supply.begin())];

    FlexVehicle* best = nullptr;
    Seconds best_time = std::numeric_limits<double>::infinity();
    for (FlexVehicle& v : fleet.vehicles) {
      if (v.status != FlexStatus::OnCall || v.location == target) continue;
      const bool donor = !in_balance(v.location) || fleet.supply(v.location) >= lo + 2;
      if (!donor) continue;
      const Route* r = routes.find(v.location, target);
      if (!r) continue;
      if (r->free_flow < best_time) {
        best_time = r->free_flow;
        best = &v;
      }
    }
    const bool outside_idle = best && !in_balance(best->location);
    if (!best || (hi - lo <= 1 && !outside_idle)) break;
    moves.push_back({best->id, best->location, target});
    best->status = FlexStatus::EnRoute;
    best->destination = target;
  }
  return moves;
}

std::vector<std::string> check_plan(const TripPlan& plan, const VehicleType& vtype) {
  std::vector<std::string> problems;
  for (std::size_t i = 0; i < plan.nodes.size(); ++i)
    for (std::size_t j = i + 1; j < plan.nodes.size(); ++j)
      if (plan.nodes[i] == plan.nodes[j]) problems.push_back("plan revisits a node");
  for (std::size_t i = 0; i < plan.requests.size(); ++i) {
    if (plan.pickup_node[i] >= plan.dropoff_node[i]) problems.push_back("drop-off not after pickup");
    if (plan.nodes[plan.pickup_node[i]] != plan.requests[i].pickup) problems.push_back("pickup node mismatch");
    if (plan.nodes[plan.dropoff_node[i]] != plan.requests[i].dropoff) problems.push_back("drop-off node mismatch");
    if (plan.dropped[i] && !plan.picked[i]) problems.push_back("dropped before pickup");
  }
  if (plan.onboard() > vtype.capacity) problems.push_back("onboard above capacity");
  for (int load : plan.forecast_load())
    if (load > vtype.capacity) problems.push_back("forecast load above capacity");
  return problems;
}

}  // namespace fixflex
