#include "fixflex/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <set>
#include <thread>

namespace fixflex {

void EventQueue::push(Seconds time, Phase phase, EventKind kind, std::int32_t subject) {
  heap_.push(SimEvent{time, phase, next_++, kind, subject});
}

SimEvent EventQueue::pop() {
  SimEvent e = heap_.top();
  heap_.pop();
  return e;
}

const char* to_string(TravelerState s) {
  switch (s) {
    case TravelerState::ArrivedAtStop: return "ArrivedAtStop";
    case TravelerState::WaitingFix: return "WaitingFix";
    case TravelerState::WaitingFlex: return "WaitingFlex";
    case TravelerState::OnBoard: return "OnBoard";
    case TravelerState::Completed: return "Completed";
  }
  return "?";
}

bool transition_allowed(TravelerState from, TravelerState to) {
  using S = TravelerState;
  switch (from) {
    case S::ArrivedAtStop: return to == S::WaitingFix || to == S::WaitingFlex || to == S::Completed;
    case S::WaitingFix:
    case S::WaitingFlex: return to == S::OnBoard;
    case S::OnBoard: return to == S::ArrivedAtStop;
    case S::Completed: return false;
  }
  return false;
}

int World::od_index(StopIdx o, StopIdx d) const {
  const auto it = std::lower_bound(ods.begin(), ods.end(), std::make_pair(o, d));
  if (it == ods.end() || *it != std::make_pair(o, d)) return -1;
  return static_cast<int>(it - ods.begin());
}

std::vector<ComponentPrior> component_priors(const GlobalPathSet& paths, std::span<const FixLine> lines) {
  std::vector<ComponentPrior> out;
  for (const ComponentInfo& c : paths.components()) {
    ComponentPrior p;
    p.ivt = c.free_flow;
    if (c.mode == Mode::Fix) {
      double frequency = 0.0;
      for (LineIdx l : c.lines) {
        const Seconds h = lines[l.get()].timetable.nominal_headway();
        if (h > 0.0) frequency += 1.0 / h;
      }
      p.wait = frequency > 0.0 ? 0.5 / frequency : 0.0;
    }
    out.push_back(p);
  }
  return out;
}

World build_world(const ScenarioConfig& cfg) {
  World w;
  w.config = &cfg;
  if (cfg.flex.enabled) w.flex_routes = RouteTable(cfg.network, cfg.flex.service_area);
  w.ods = cfg.demand_ods();
  w.paths = generate_choice_sets(cfg.network, cfg.lines, w.flex_routes, cfg.filters, w.ods);
  w.priors = component_priors(w.paths, cfg.lines);
  std::map<std::string, std::set<std::string>> types;
  for (const auto& [o, d] : w.ods) {
    const std::string cat = od_category(cfg.network, o, d);
    w.od_categories.push_back(cat);
    for (PathIdx p : w.paths.alternatives(o, d)) types[cat].insert(w.paths.path(p).type());
  }
  for (const auto& [cat, ts] : types) {
    w.categories.push_back(cat);
    w.category_types[cat] = std::vector<std::string>(ts.begin(), ts.end());
  }
  std::vector<std::string> errors;
  if (cfg.flex.enabled) {
    for (StopIdx a : cfg.flex.service_area)
      for (StopIdx b : cfg.flex.service_area)
        if (!w.flex_routes.find(a, b))
          errors.push_back("flex service area: no road route " + cfg.network.stop(a).id + " -> " +
                           cfg.network.stop(b).id);
    if (cfg.flex.initial_positions.empty()) errors.push_back("flex: fleet is empty");
  }
  if (!errors.empty()) throw ConfigError(errors);
  return w;
}

namespace {

constexpr std::uint64_t kSupplyStream = 0x5355504CULL;
constexpr std::uint64_t kDemandStream = 0x44454D44ULL;
constexpr std::uint64_t kTravelerStream = 0x5452564CULL;

struct LegLog {
  Mode mode = Mode::Fix;
  std::vector<ComponentIdx> components;
  StopIdx board_stop;
  Seconds joined = 0.0;
  Seconds first_denied = -1.0;
  Seconds nominal_wait = 0.0;
  Seconds denied_wait = 0.0;
  bool boarded = false;
  bool completed = false;
  std::vector<IvtInterval> ivt;
};

struct Traveler {
  TravelerIdx id;
  StopIdx origin;
  StopIdx destination;
  int od = -1;
  GroupIdx traveler_group;
  GroupIdx od_group;
  Seconds start = 0.0;
  TravelerState state = TravelerState::ArrivedAtStop;
  StopIdx location;
  PathSet active;
  PathSet bucket;
  PathSet pending_board;
  StopIdx target;
  bool egress = false;
  bool ever_denied = false;
  std::optional<PlanIdx> plan;
  std::vector<LegLog> legs;
  RandomStream rng;
};

struct FlexRun {
  bool at_node = false;
  std::size_t node = 0;
  int pending = 0;
  int picked_here = 0;
  int dropped_here = 0;
  Seconds segment_start = 0.0;
};

std::vector<ComponentIdx> distinct_components(const GlobalPathSet& g, const PathSet& set) {
  std::vector<ComponentIdx> out;
  for (const ActivePath& a : set) {
    const ComponentIdx c = g.leg(a).component;
    if (std::find(out.begin(), out.end(), c) == out.end()) out.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

class DaySim {
 public:
  DaySim(const World& w, const ExperienceLedger& ledger, std::uint64_t seed, int rep, int day, bool check)
      : w_(w),
        cfg_(*w.config),
        net_(cfg_.network),
        ledger_(ledger),
        seed_(seed),
        rep_(rep),
        day_(day),
        check_(check),
        supply_rng_(derive_seed(seed, static_cast<std::uint64_t>(rep), static_cast<std::uint64_t>(day), kSupplyStream)),
        queues_(net_.stop_count()),
        window_(cfg_.demand.window),
        horizon_(cfg_.horizon()) {
    summary_.day = day;
    summary_.replication = rep;
  }

  DayOutput run() {
    generate_demand();
    dispatch_fix();
    init_flex();
    if (cfg_.flex.enabled && cfg_.flex.rebalancing_interval && !cfg_.flex.balance_stops.empty())
      if (*cfg_.flex.rebalancing_interval <= horizon_)
        q_.push(*cfg_.flex.rebalancing_interval, Phase::RebalanceTick, EventKind::RebalanceTick);
    q_.push(horizon_, Phase::DayEnd, EventKind::DayEnd);

    while (!q_.empty()) {
      const SimEvent e = q_.pop();
      if (e.time > horizon_ || e.kind == EventKind::DayEnd) break;
      now_ = e.time;
      switch (e.kind) {
        case EventKind::TripStart: start_trip(TravelerIdx{e.subject}); break;
        case EventKind::TravelerReachesStop: reach_stop(TravelerIdx{e.subject}); break;
        case EventKind::TravelerContinues: decide_at_stop(TravelerIdx{e.subject}); break;
        case EventKind::FixArrival: fix_arrival(static_cast<std::size_t>(e.subject)); break;
        case EventKind::FlexArrival: flex_arrival(VehicleIdx{e.subject}); break;
        case EventKind::FlexDepart: flex_depart(VehicleIdx{e.subject}); break;
        case EventKind::FlexRepositioned: flex_repositioned(VehicleIdx{e.subject}); break;
        case EventKind::DispatchTick: dispatch_tick(); break;
        case EventKind::RebalanceTick: rebalance_tick(); break;
        case EventKind::DayEnd: break;
      }
    }
    return finish();
  }

 private:
  // ---- setup ---------------------------------------------------------------

  void generate_demand() {
    RandomStream demand_rng(
        derive_seed(seed_, static_cast<std::uint64_t>(rep_), static_cast<std::uint64_t>(day_), kDemandStream));
    struct Arrival {
      Seconds t;
      StopIdx o, d;
    };
    std::vector<Arrival> arrivals;
    for (const Cohort& c : cfg_.demand.cohorts)
      for (int i = 0; i < c.size; ++i) arrivals.push_back({c.time, c.origin, c.destination});
    const std::size_t persistent = arrivals.size();
    for (const PoissonOd& p : cfg_.demand.poisson) {
      const double rate = p.rate_per_hour / 3600.0;
      for (Seconds t = demand_rng.exponential(rate); t < window_; t += demand_rng.exponential(rate))
        arrivals.push_back({t, p.origin, p.destination});
    }
    std::stable_sort(arrivals.begin() + static_cast<std::ptrdiff_t>(persistent), arrivals.end(),
                     [](const Arrival& a, const Arrival& b) { return a.t < b.t; });
    travelers_.reserve(arrivals.size());
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
      Traveler t;
      t.id = TravelerIdx{i};
      t.origin = arrivals[i].o;
      t.destination = arrivals[i].d;
      t.location = t.origin;
      t.start = arrivals[i].t;
      t.od = w_.od_index(t.origin, t.destination);
      t.traveler_group = GroupIdx{i};
      t.od_group = GroupIdx{t.od};
      t.rng = RandomStream(derive_seed(seed_, static_cast<std::uint64_t>(rep_),
                                       (static_cast<std::uint64_t>(day_) << 8) ^ kTravelerStream, i));
      t.active = w_.paths.initial_set(t.origin, t.destination);
      travelers_.push_back(std::move(t));
      q_.push(arrivals[i].t, Phase::TravelerDecision, EventKind::TripStart, static_cast<std::int32_t>(i));
    }
    summary_.injected = static_cast<int>(travelers_.size());
  }

  void dispatch_fix() {
    for (std::size_t li = 0; li < cfg_.lines.size(); ++li) {
      const FixLine& line = cfg_.lines[li];
      const VehicleType& vt = cfg_.vehicle_types[line.vehicle_type.get()];
      const auto starts = dispatch_timetable(line, horizon_, cfg_.run.warm_up);
      for (std::size_t k = 0; k < starts.size(); ++k) {
        FixTrip trip;
        trip.line = LineIdx{li};
        trip.trip_no = static_cast<int>(k);
        trip.start = starts[k];
        trip.capacity = vt.capacity;
        trip.seats = vt.seats;
        trips_.push_back(std::move(trip));
        q_.push(starts[k], Phase::VehicleArrival, EventKind::FixArrival, static_cast<std::int32_t>(trips_.size() - 1));
      }
    }
    if (!cfg_.lines.empty()) summary_.fix.seats = cfg_.vehicle_types[cfg_.lines.front().vehicle_type.get()].seats;
  }

  void init_flex() {
    if (!cfg_.flex.enabled) return;
    flex_type_ = cfg_.vehicle_types[cfg_.flex.vehicle_type.get()];
    summary_.flex.seats = flex_type_.seats;
    for (std::size_t i = 0; i < cfg_.flex.initial_positions.size(); ++i) {
      FlexVehicle v;
      v.id = VehicleIdx{i};
      v.location = cfg_.flex.initial_positions[i];
      fleet_.vehicles.push_back(v);
    }
    flex_run_.assign(fleet_.vehicles.size(), FlexRun{});
  }

  // ---- travelers -------------------------------------------------------------

  void set_state(Traveler& t, TravelerState to) {
    if (!transition_allowed(t.state, to))
      throw InvariantViolation(std::string("traveler state change ") + to_string(t.state) + " -> " + to_string(to));
    t.state = to;
  }

  UtilityContext context(const Traveler& t) const {
    return UtilityContext{w_.paths, net_, ledger_, cfg_.behavior.vot, cfg_.behavior.walk,
                          experience_group(cfg_.behavior.sharing, t.traveler_group, t.od_group)};
  }

  void start_trip(TravelerIdx id) { decide_at_stop(id); }

  Meters walk_between(StopIdx a, StopIdx b) const {
    if (a == b) return 0.0;
    const auto d = net_.walk_distance(a, b);
    if (!d) throw InvariantViolation("no walking link " + net_.stop(a).id + " -> " + net_.stop(b).id);
    return *d;
  }

  /// Connection, mode and (for on-demand legs) drop-off choices at the current stop.
  void decide_at_stop(TravelerIdx id) {
    Traveler& t = travelers_[id.get()];
    const UtilityContext ctx = context(t);
    if (t.active.empty()) throw InvariantViolation("traveler without remaining path alternatives");

    const auto conn = connection_sets(w_.paths, t.active);
    std::vector<StopIdx> keys;
    std::vector<double> util;
    for (const auto& [s, bucket] : conn) {
      if (s != t.location && !net_.walk_distance(t.location, s)) continue;
      keys.push_back(s);
      util.push_back(set_logsum(bucket, t.location, false, ctx));
    }
    PathSet finished;
    for (const ActivePath& a : t.active)
      if (w_.paths.finished(a)) finished.push_back(a);
    if (!finished.empty()) {
      keys.push_back(StopIdx{});
      util.push_back(set_logsum(finished, t.location, false, ctx));
    }
    if (keys.empty()) throw InvariantViolation("no offered action at stop");
    const StopIdx chosen = keys[choose_action(util, t.rng)];

    if (!chosen.valid()) {
      t.egress = true;
      t.target = t.destination;
      begin_walk(t, walk_between(t.location, t.destination));
      return;
    }

    const PathSet& bucket = conn.at(chosen);
    const auto modes = mode_sets(w_.paths, bucket);
    std::vector<Mode> mode_keys;
    util.clear();
    for (const auto& [m, cell] : modes) {
      mode_keys.push_back(m);
      util.push_back(set_logsum(cell, t.location, false, ctx));
    }
    const Mode mode = mode_keys[choose_action(util, t.rng)];
    const PathSet& cell = modes.at(mode);

    LegLog leg;
    leg.mode = mode;
    leg.board_stop = chosen;
    t.target = chosen;
    t.egress = false;
    const Meters walk = walk_between(t.location, chosen);

    if (mode == Mode::Flex) {
      const auto drops = dropoff_sets(w_.paths, cell);
      std::vector<StopIdx> drop_keys;
      util.clear();
      for (const auto& [s, c] : drops) {
        drop_keys.push_back(s);
        util.push_back(set_logsum(c, t.location, false, ctx));
      }
      const StopIdx drop = drop_keys[choose_action(util, t.rng)];
      t.bucket = drops.at(drop);
      leg.components = distinct_components(w_.paths, t.bucket);
      t.legs.push_back(std::move(leg));
      const Request req{t.id, chosen, drop, now_ + cfg_.behavior.walk.anticipated(walk), now_};
      const std::size_t before = book_.plans.size();
      t.plan = submit_request(req, book_, flex_type_, w_.flex_routes, cfg_.flex.insert_into_assigned, now_);
      if (check_) check_plan_or_throw(book_[*t.plan]);
      if (book_.plans.size() != before) ensure_dispatch();
    } else {
      t.bucket = cell;
      leg.components = distinct_components(w_.paths, t.bucket);
      t.legs.push_back(std::move(leg));
    }
    begin_walk(t, walk);
  }

  void begin_walk(Traveler& t, Meters distance) {
    if (distance <= 0.0) {
      reach_stop(t.id);
      return;
    }
    const Seconds dt = cfg_.behavior.walk.realized(distance, t.rng);
    q_.push(now_ + dt, Phase::TravelerDecision, EventKind::TravelerReachesStop, t.id.value);
  }

  void reach_stop(TravelerIdx id) {
    Traveler& t = travelers_[id.get()];
    t.location = t.target;
    if (t.egress) {
      set_state(t, TravelerState::Completed);
      return;
    }
    LegLog& leg = t.legs.back();
    leg.joined = now_;
    if (leg.mode == Mode::Fix) {
      set_state(t, TravelerState::WaitingFix);
      std::vector<LineIdx> lines;
      for (const ActivePath& a : t.bucket)
        for (LineIdx l : w_.paths.leg(a).lines())
          if (std::find(lines.begin(), lines.end(), l) == lines.end()) lines.push_back(l);
      queues_[t.location.get()].join(t.id, now_, std::move(lines));
      return;
    }
    set_state(t, TravelerState::WaitingFlex);
    const TripPlan& plan = book_[*t.plan];
    if (!plan.vehicle) return;
    const VehicleIdx v = *plan.vehicle;
    FlexRun& fr = flex_run_[v.get()];
    if (!fr.at_node || fr.pending == 0) return;
    const std::size_t r = request_index(plan, t.id);
    if (plan.pickup_node[r] != fr.node || plan.picked[r]) return;
    flex_board(v, book_[*t.plan], r);
    if (--fr.pending == 0) schedule_flex_departure(v);
  }

  /// Path suffixes after finishing the current leg; the traveler then decides again.
  void finish_leg(Traveler& t, StopIdx at) {
    LegLog& leg = t.legs.back();
    leg.completed = true;
    set_state(t, TravelerState::ArrivedAtStop);
    t.location = at;
    PathSet next;
    for (const ActivePath& a : t.bucket) next.push_back(ActivePath{a.path, static_cast<std::uint16_t>(a.leg + 1)});
    t.active = std::move(next);
    t.bucket.clear();
    t.pending_board.clear();
    t.plan.reset();
    q_.push(now_, Phase::TravelerDecision, EventKind::TravelerContinues, t.id.value);
  }

  // ---- fixed lines -------------------------------------------------------------

  bool wants_to_board(TravelerIdx id, LineIdx line) {
    Traveler& t = travelers_[id.get()];
    auto [board, stay] = board_stay_partition(w_.paths, t.bucket, line);
    if (board.empty()) return false;
    bool yes = true;
    if (!stay.empty()) {
      const UtilityContext ctx = context(t);
      const double u[2] = {set_logsum(board, t.location, true, ctx), set_logsum(stay, t.location, false, ctx)};
      yes = choose_action(u, t.rng) == 0;
    }
    if (yes) t.pending_board = std::move(board);
    return yes;
  }

  StopIdx choose_alight(TravelerIdx id, const FixLine& line, int position) {
    Traveler& t = travelers_[id.get()];
    const UtilityContext ctx = context(t);
    const auto cells = alight_sets(w_.paths, t.pending_board);
    std::vector<StopIdx> keys;
    std::vector<double> util;
    for (const auto& [s, cell] : cells) {
      if (line.position_of(s) <= position) continue;
      keys.push_back(s);
      util.push_back(set_logsum(cell, t.location, true, ctx));
    }
    if (keys.empty()) throw InvariantViolation("boarded line does not reach any alighting option");
    const StopIdx s = keys[choose_action(util, t.rng)];
    t.bucket = cells.at(s);
    t.legs.back().components = distinct_components(w_.paths, t.bucket);
    return s;
  }

  void fix_arrival(std::size_t ti) {
    FixTrip& trip = trips_[ti];
    const FixLine& line = cfg_.lines[trip.line.get()];
    const int pos = ++trip.position;
    const StopIdx stop = line.stops[static_cast<std::size_t>(pos)];

    if (pos > 0) {
      const double lf = trip.load_factor();
      for (std::size_t k = 0; k < trip.onboard.size(); ++k) {
        const Rider& r = trip.onboard[k];
        travelers_[r.traveler.get()].legs.back().ivt.push_back(
            IvtInterval{now_ - std::max(trip.last_arrival, r.boarded_at), lf, trip.is_seated(k)});
      }
      if (trip.last_arrival >= 0.0 && trip.last_arrival < window_) {
        const Meters len = net_.link(line.links[static_cast<std::size_t>(pos - 1)]).length;
        summary_.fix.vkt += len;
        summary_.fix.pkt += len * static_cast<double>(trip.onboard.size());
      }
    }

    StopQueue& queue = queues_[stop.get()];
    std::vector<std::pair<TravelerIdx, std::uint64_t>> order;
    if (check_)
      for (const QueueEntry& e : queue.entries()) order.emplace_back(e.traveler, e.sequence);

    const ArrivalOutcome out = process_vehicle_arrival(
        trip, stop, queue, now_, [&](TravelerIdx t) { return wants_to_board(t, trip.line); },
        [&](TravelerIdx t) { return choose_alight(t, line, pos); });

    if (check_) check_fifo(order, out);

    for (TravelerIdx id : out.boarded) {
      Traveler& t = travelers_[id.get()];
      LegLog& leg = t.legs.back();
      if (leg.first_denied >= 0.0) {
        leg.nominal_wait = leg.first_denied - leg.joined;
        leg.denied_wait = now_ - leg.first_denied;
      } else {
        leg.nominal_wait = now_ - leg.joined;
      }
      if (check_ && std::abs(leg.nominal_wait + leg.denied_wait - (now_ - leg.joined)) > 1e-9)
        throw InvariantViolation("wait accounting identity broken");
      leg.boarded = true;
      set_state(t, TravelerState::OnBoard);
    }
    for (TravelerIdx id : out.denied) {
      Traveler& t = travelers_[id.get()];
      if (t.legs.back().first_denied < 0.0) t.legs.back().first_denied = now_;
      t.ever_denied = true;
    }
    for (const Rider& r : out.alighted) finish_leg(travelers_[r.traveler.get()], stop);

    if (static_cast<std::size_t>(pos) + 1 < line.stops.size()) {
      const RoadLink& link = net_.link(line.links[static_cast<std::size_t>(pos)]);
      q_.push(now_ + out.dwell + sample_running_time(link, supply_rng_), Phase::VehicleArrival, EventKind::FixArrival,
              static_cast<std::int32_t>(ti));
    } else if (!trip.onboard.empty()) {
      throw InvariantViolation("riders left on board at the end of line " + line.id);
    }
  }

  void check_fifo(const std::vector<std::pair<TravelerIdx, std::uint64_t>>& order, const ArrivalOutcome& out) const {
    auto seq_of = [&](TravelerIdx t) {
      for (const auto& [id, s] : order)
        if (id == t) return s;
      throw InvariantViolation("boarding traveler was not queued");
    };
    std::uint64_t last = 0;
    bool first = true;
    for (TravelerIdx t : out.boarded) {
      const std::uint64_t s = seq_of(t);
      if (!first && s < last) throw InvariantViolation("boarding out of queue order");
      last = s;
      first = false;
    }
    for (TravelerIdx t : out.denied)
      if (!first && seq_of(t) < last) throw InvariantViolation("denied traveler was ahead of a boarder");
  }

  // ---- on-demand service ---------------------------------------------------------

  static std::size_t request_index(const TripPlan& plan, TravelerIdx t) {
    for (std::size_t i = 0; i < plan.requests.size(); ++i)
      if (plan.requests[i].traveler == t && !plan.dropped[i]) return i;
    throw InvariantViolation("traveler missing from its trip plan");
  }

  void check_plan_or_throw(const TripPlan& plan) const {
    const auto problems = check_plan(plan, flex_type_);
    if (!problems.empty()) throw InvariantViolation("trip plan: " + problems.front());
  }

  void ensure_dispatch() {
    if (dispatch_pending_) return;
    const bool waiting = std::any_of(book_.active.begin(), book_.active.end(),
                                     [&](PlanIdx p) { return !book_[p].vehicle; });
    if (!waiting) return;
    const Seconds c = cfg_.flex.assignment_interval;
    const Seconds t = std::ceil(now_ / c - 1e-9) * c;
    dispatch_pending_ = true;
    q_.push(std::max(t, now_), Phase::DispatchTick, EventKind::DispatchTick);
  }

  Seconds drive(const Route& route, double onboard) {
    Seconds total = 0.0;
    for (LinkIdx l : route.links) {
      const RoadLink& link = net_.link(l);
      if (now_ + total >= 0.0 && now_ + total < window_) {
        summary_.flex.vkt += link.length;
        summary_.flex.pkt += link.length * onboard;
      }
      total += sample_running_time(link, supply_rng_);
    }
    return total;
  }

  void dispatch_tick() {
    dispatch_pending_ = false;
    for (const Assignment& a : assignment_call(book_, fleet_, w_.flex_routes, now_)) {
      FlexVehicle& v = fleet_.vehicles[a.vehicle.get()];
      const TripPlan& plan = book_[a.plan];
      FlexRun& fr = flex_run_[a.vehicle.get()];
      fr = FlexRun{};
      const Route* r = w_.flex_routes.find(v.location, plan.nodes.front());
      const Seconds dt = drive(*r, 0.0);
      q_.push(now_ + dt, Phase::VehicleArrival, EventKind::FlexArrival, a.vehicle.value);
    }
  }

  void flex_board(VehicleIdx vid, TripPlan& plan, std::size_t r) {
    FlexVehicle& v = fleet_.vehicles[vid.get()];
    Traveler& t = travelers_[plan.requests[r].traveler.get()];
    plan.picked[r] = true;
    v.onboard.push_back(Rider{t.id, plan.requests[r].dropoff, now_});
    if (static_cast<int>(v.onboard.size()) > flex_type_.capacity)
      throw InvariantViolation("on-demand vehicle over capacity");
    LegLog& leg = t.legs.back();
    leg.nominal_wait = now_ - leg.joined;
    leg.boarded = true;
    set_state(t, TravelerState::OnBoard);
    ++flex_run_[vid.get()].picked_here;
  }

  void flex_arrival(VehicleIdx vid) {
    FlexVehicle& v = fleet_.vehicles[vid.get()];
    FlexRun& fr = flex_run_[vid.get()];
    TripPlan& plan = book_[*v.plan];
    const std::size_t k = plan.progress;
    const StopIdx stop = plan.nodes[k];
    plan.progress = k + 1;
    v.location = stop;

    if (fr.at_node || k > 0) {
      const double lf = static_cast<double>(v.onboard.size()) / flex_type_.seats;
      for (std::size_t i = 0; i < v.onboard.size(); ++i) {
        const Rider& r = v.onboard[i];
        travelers_[r.traveler.get()].legs.back().ivt.push_back(
            IvtInterval{now_ - std::max(fr.segment_start, r.boarded_at), lf, i < static_cast<std::size_t>(flex_type_.seats)});
      }
    }
    fr.at_node = true;
    fr.node = k;
    fr.segment_start = now_;
    fr.picked_here = 0;
    fr.dropped_here = 0;
    fr.pending = 0;

    for (std::size_t r = 0; r < plan.requests.size(); ++r) {
      if (plan.dropoff_node[r] != k || !plan.picked[r] || plan.dropped[r]) continue;
      plan.dropped[r] = true;
      const TravelerIdx tid = plan.requests[r].traveler;
      v.onboard.erase(std::find_if(v.onboard.begin(), v.onboard.end(), [&](const Rider& x) { return x.traveler == tid; }));
      ++fr.dropped_here;
      finish_leg(travelers_[tid.get()], stop);
    }
    for (std::size_t r = 0; r < plan.requests.size(); ++r) {
      if (plan.pickup_node[r] != k || plan.picked[r]) continue;
      const Traveler& t = travelers_[plan.requests[r].traveler.get()];
      if (t.state == TravelerState::WaitingFlex && t.location == stop) flex_board(vid, plan, r);
      else ++fr.pending;
    }
    if (check_) check_plan_or_throw(plan);
    if (fr.pending == 0) schedule_flex_departure(vid);
  }

  void schedule_flex_departure(VehicleIdx vid) {
    const FlexRun& fr = flex_run_[vid.get()];
    const bool served = fr.picked_here + fr.dropped_here > 0;
    const Seconds dwell = served ? dwell_time(fr.picked_here, fr.dropped_here) : 0.0;
    if (dwell == 0.0) {
      flex_depart(vid);
      return;
    }
    q_.push(now_ + dwell, Phase::VehicleArrival, EventKind::FlexDepart, vid.value);
  }

  void flex_depart(VehicleIdx vid) {
    FlexVehicle& v = fleet_.vehicles[vid.get()];
    FlexRun& fr = flex_run_[vid.get()];
    const PlanIdx pid = *v.plan;
    TripPlan& plan = book_[pid];
    if (plan.progress < plan.nodes.size()) {
      const auto link = net_.link_between(plan.nodes[plan.progress - 1], plan.nodes[plan.progress]);
      if (!link) throw InvariantViolation("trip plan nodes are not adjacent");
      Route hop;
      hop.links = {*link};
      const Seconds dt = drive(hop, static_cast<double>(v.onboard.size()));
      q_.push(now_ + dt, Phase::VehicleArrival, EventKind::FlexArrival, vid.value);
      return;
    }
    if (!v.onboard.empty()) throw InvariantViolation("on-demand riders left after the last plan node");
    book_.retire(pid);
    fr.at_node = false;
    v.plan.reset();
    v.status = FlexStatus::OnCall;
    ensure_dispatch();
  }

  void rebalance_tick() {
    const auto moves = rebalancing_call(fleet_, cfg_.flex.balance_stops, w_.flex_routes);
    for (const Move& m : moves) {
      const Seconds dt = drive(*w_.flex_routes.find(m.from, m.to), 0.0);
      q_.push(now_ + dt, Phase::VehicleArrival, EventKind::FlexRepositioned, m.vehicle.value);
    }
    summary_.rebalancing_moves += static_cast<int>(moves.size());
    const Seconds next = now_ + *cfg_.flex.rebalancing_interval;
    if (next <= horizon_) q_.push(next, Phase::RebalanceTick, EventKind::RebalanceTick);
  }

  void flex_repositioned(VehicleIdx vid) {
    FlexVehicle& v = fleet_.vehicles[vid.get()];
    v.status = FlexStatus::OnCall;
    v.location = v.destination;
    ensure_dispatch();
  }

  // ---- results -----------------------------------------------------------------

  /// A wait still running at the horizon is learned as it stands.
  void censored_wait(const Traveler& t, const LegLog& leg, DayOutput& out) const {
    RealizedLegExperience e;
    e.day = day_;
    e.boarded = false;
    if (leg.first_denied >= 0.0) {
      e.nominal_wait = leg.first_denied - leg.joined;
      e.denied_wait = horizon_ - leg.first_denied;
    } else {
      e.nominal_wait = horizon_ - leg.joined;
    }
    for (ComponentIdx c : leg.components) {
      e.component = c;
      out.experiences.push_back(GroupedExperience{t.traveler_group, t.od_group, e});
    }
  }

  /// Path type of an unfinished traveler when the choices made so far leave only one.
  std::string committed_type(const Traveler& t) const {
    const PathSet& set = t.bucket.empty() ? t.active : t.bucket;
    std::string type;
    for (const ActivePath& a : set) {
      const std::string ty = w_.paths.path(a.path).type();
      if (type.empty()) type = ty;
      else if (ty != type) return "INCOMPLETE";
    }
    return type.empty() ? "INCOMPLETE" : type;
  }

  DayOutput finish() {
    DayOutput out;
    const CrowdingCurve& curve = cfg_.behavior.crowding;
    for (const Traveler& t : travelers_) {
      const bool done = t.state == TravelerState::Completed;
      if (done) ++summary_.completed;
      else ++summary_.stranded;
      if (t.ever_denied) ++summary_.denied_travelers;
      const std::string& cat = w_.od_categories[static_cast<std::size_t>(t.od)];
      std::string type;
      TypeStats delta;
      const GroupIdx g = experience_group(cfg_.behavior.sharing, t.traveler_group, t.od_group);
      for (std::size_t j = 0; j < t.legs.size(); ++j) {
        const LegLog& leg = t.legs[j];
        if (!leg.completed) {
          const bool waiting = t.state == TravelerState::WaitingFix || t.state == TravelerState::WaitingFlex;
          if (cfg_.behavior.learn_censored_waits && waiting && j + 1 == t.legs.size())
            censored_wait(t, leg, out);
          continue;
        }
        if (!type.empty()) type += '-';
        type += to_string(leg.mode);
        for (ComponentIdx c : leg.components) {
          RealizedLegExperience e{c, leg.nominal_wait, leg.denied_wait, leg.ivt, day_};
          out.experiences.push_back(GroupedExperience{t.traveler_group, t.od_group, std::move(e)});
        }
        const RealizedLegExperience e{leg.components.front(), leg.nominal_wait, leg.denied_wait, leg.ivt, day_};
        delta.experienced[0] += weighted_wait(e, curve);
        delta.experienced[1] += weighted_ivt(e, curve);
        delta.anticipated[0] += ledger_.anticipate(g, leg.components.front(), Quantity::Wait);
        delta.anticipated[1] += ledger_.anticipate(g, leg.components.front(), Quantity::Ivt);
        if (j == 0 && leg.mode == Mode::Flex) summary_.flex_first_leg_waits.push_back(leg.nominal_wait);
      }
      if (!done) type = committed_type(t);
      else if (type.empty()) type = "WALK";
      TypeStats& s = summary_.by_category[cat][type];
      s.travelers += 1;
      if (!done) continue;
      s.completed += 1;
      for (int q = 0; q < 2; ++q) {
        s.anticipated[static_cast<std::size_t>(q)] += delta.anticipated[static_cast<std::size_t>(q)];
        s.experienced[static_cast<std::size_t>(q)] += delta.experienced[static_cast<std::size_t>(q)];
      }
    }
    for (const std::string& cat : w_.categories) {
      auto& m = summary_.by_category[cat];
      for (const std::string& type : w_.category_types.at(cat)) (void)m[type];
      (void)m["INCOMPLETE"];
    }
    if (summary_.injected != summary_.completed + summary_.stranded)
      throw InvariantViolation("traveler conservation broken");
    out.summary = std::move(summary_);
    return out;
  }

  const World& w_;
  const ScenarioConfig& cfg_;
  const Network& net_;
  const ExperienceLedger& ledger_;
  std::uint64_t seed_;
  int rep_;
  int day_;
  bool check_;
  RandomStream supply_rng_;
  EventQueue q_;
  std::vector<Traveler> travelers_;
  std::vector<FixTrip> trips_;
  std::vector<StopQueue> queues_;
  FleetState fleet_;
  std::vector<FlexRun> flex_run_;
  PlanBook book_;
  VehicleType flex_type_;
  bool dispatch_pending_ = false;
  DaySummary summary_;
  Seconds window_;
  Seconds horizon_;
  Seconds now_ = 0.0;
};

}  // namespace

DayOutput run_day(const World& world, const ExperienceLedger& ledger, std::uint64_t seed, int replication, int day,
                  bool check_invariants) {
  return DaySim(world, ledger, seed, replication, day, check_invariants).run();
}

ScenarioResult run_scenario(const World& world, const RunOptions& options) {
  const ScenarioConfig& cfg = *world.config;
  ScenarioResult result;
  result.replications.resize(static_cast<std::size_t>(options.replications));

  auto run_one = [&](int rep) {
    ExperienceLedger ledger(world.priors);
    ReplicationResult& rr = result.replications[static_cast<std::size_t>(rep)];
    for (int d = 1; d <= options.days; ++d) {
      DayOutput out = run_day(world, ledger, options.seed, rep, d, options.check_invariants);
      collect_day(out.experiences, ledger, cfg.behavior.sharing, cfg.behavior.crowding, d);
      rr.days.push_back(std::move(out.summary));
      if (options.ledger_snapshots)
        for (const auto& row : ledger.rows())
          rr.ledger_rows.push_back(LedgerRow{d, row.group, row.component, row.quantity,
                                             ledger.prior(row.component, row.quantity), row.entry.experience,
                                             row.entry.n_exp});
      if (options.progress) options.progress(rep, d);
    }
  };

  const int workers = std::clamp(options.parallel, 1, std::max(1, options.replications));
  if (workers == 1) {
    for (int r = 0; r < options.replications; ++r) run_one(r);
    return result;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (int i = 0; i < workers; ++i) {
    pool.emplace_back([&] {
      for (int r = next++; r < options.replications; r = next++) {
        try {
          run_one(r);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return result;
}

}  // namespace fixflex
