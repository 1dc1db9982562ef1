#include "fixflex/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace fixflex {

std::vector<std::pair<StopIdx, StopIdx>> ScenarioConfig::demand_ods() const {
  std::vector<std::pair<StopIdx, StopIdx>> out;
  for (const Cohort& c : demand.cohorts) out.emplace_back(c.origin, c.destination);
  for (const PoissonOd& p : demand.poisson) out.emplace_back(p.origin, p.destination);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

nlohmann::json to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Map: {
      nlohmann::json j = nlohmann::json::object();
      for (const auto& kv : n) j[kv.first.as<std::string>()] = to_json(kv.second);
      return j;
    }
    case YAML::NodeType::Sequence: {
      nlohmann::json j = nlohmann::json::array();
      for (const auto& e : n) j.push_back(to_json(e));
      return j;
    }
    case YAML::NodeType::Scalar: {
      const std::string s = n.Scalar();
      if (n.Tag() != "!") {
        if (s == "true") return true;
        if (s == "false") return false;
        if (s == "null" || s == "~") return nullptr;
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (!s.empty() && end == s.c_str() + s.size()) return v;
      }
      return s;
    }
    default:
      return nullptr;
  }
}

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  std::string where(const YAML::Node& n) const {
    const YAML::Mark m = n.Mark();
    if (m.line < 0) return source_;
    return source_ + ":" + std::to_string(m.line + 1) + ":" + std::to_string(m.column + 1);
  }

  void error(const YAML::Node& n, const std::string& msg) { errors_.push_back(where(n) + ": " + msg); }

  bool is_map(const YAML::Node& n, const std::string& ctx) {
    if (n.IsMap()) return true;
    error(n, ctx + " must be a mapping");
    return false;
  }

  void allow_keys(const YAML::Node& map, std::initializer_list<std::string_view> keys, const std::string& ctx) {
    if (!map.IsMap()) return;
    for (const auto& kv : map) {
      const std::string k = kv.first.as<std::string>();
      if (std::find(keys.begin(), keys.end(), k) == keys.end()) error(kv.first, ctx + ": unknown key '" + k + "'");
    }
  }

  YAML::Node child(const YAML::Node& map, const std::string& key, const std::string& ctx, bool required) {
    if (map.IsMap()) {
      if (YAML::Node c = map[key]; c) return c;
    }
    if (required) error(map, ctx + ": missing key '" + key + "'");
    return YAML::Node(YAML::NodeType::Undefined);
  }

  std::optional<double> number(const YAML::Node& map, const std::string& key, const std::string& ctx, bool required) {
    YAML::Node n = child(map, key, ctx, required);
    if (!n) return std::nullopt;
    if (n.IsScalar()) {
      const std::string s = n.Scalar();
      char* end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (!s.empty() && end == s.c_str() + s.size() && std::isfinite(v)) return v;
    }
    error(n, ctx + ": '" + key + "' must be a number");
    return std::nullopt;
  }

  double number_or(const YAML::Node& map, const std::string& key, const std::string& ctx, double fallback) {
    return number(map, key, ctx, false).value_or(fallback);
  }

  std::optional<std::string> text(const YAML::Node& map, const std::string& key, const std::string& ctx,
                                  bool required) {
    YAML::Node n = child(map, key, ctx, required);
    if (!n) return std::nullopt;
    if (n.IsScalar()) return n.Scalar();
    error(n, ctx + ": '" + key + "' must be a string");
    return std::nullopt;
  }

  std::optional<bool> boolean(const YAML::Node& map, const std::string& key, const std::string& ctx) {
    YAML::Node n = child(map, key, ctx, false);
    if (!n) return std::nullopt;
    if (n.IsScalar() && (n.Scalar() == "true" || n.Scalar() == "false")) return n.Scalar() == "true";
    error(n, ctx + ": '" + key + "' must be true or false");
    return std::nullopt;
  }

  std::optional<StopIdx> stop_ref(const Network& net, const YAML::Node& n, const std::string& ctx) {
    if (!n || !n.IsScalar()) {
      error(n, ctx + ": expected a stop id");
      return std::nullopt;
    }
    if (auto s = net.find_stop(n.Scalar())) return s;
    error(n, ctx + ": unknown stop '" + n.Scalar() + "'");
    return std::nullopt;
  }

  std::vector<StopIdx> stop_list(const Network& net, const YAML::Node& n, const std::string& ctx) {
    std::vector<StopIdx> out;
    if (!n) return out;
    if (!n.IsSequence()) {
      error(n, ctx + " must be a list of stop ids");
      return out;
    }
    for (const auto& e : n)
      if (auto s = stop_ref(net, e, ctx)) out.push_back(*s);
    return out;
  }

  [[nodiscard]] const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::string source_;
  std::vector<std::string> errors_;
};

RunningTime parse_running_time(Reader& r, const YAML::Node& n, const std::string& ctx) {
  if (!r.is_map(n, ctx)) return RunningTime::constant(1.0);
  r.allow_keys(n, {"type", "value", "mu", "sigma", "median"}, ctx);
  const std::string type = r.text(n, "type", ctx, true).value_or("constant");
  RunningTime rt;
  if (type == "constant") {
    rt = RunningTime::constant(r.number(n, "value", ctx, true).value_or(1.0));
  } else if (type == "lognormal") {
    double mu = 0.0;
    if (auto med = r.number(n, "median", ctx, false)) {
      if (*med > 0.0) mu = std::log(*med);
      else r.error(n, ctx + ": median must be positive");
    } else {
      mu = r.number(n, "mu", ctx, true).value_or(0.0);
    }
    rt = RunningTime::lognormal(mu, r.number(n, "sigma", ctx, true).value_or(0.0));
  } else {
    r.error(n, ctx + ": unknown running-time type '" + type + "'");
    return RunningTime::constant(1.0);
  }
  if (auto err = rt.validate()) r.error(n, ctx + ": " + *err);
  return rt;
}

void parse_network(Reader& r, const YAML::Node& n, Network& net) {
  if (!r.is_map(n, "network")) return;
  r.allow_keys(n, {"stops", "links", "walks"}, "network");
  YAML::Node stops = r.child(n, "stops", "network", true);
  if (stops && stops.IsSequence()) {
    for (const auto& s : stops) {
      const std::string ctx = "stop";
      if (!r.is_map(s, ctx)) continue;
      r.allow_keys(s, {"id", "name", "x", "y", "tag"}, ctx);
      Stop st;
      st.id = r.text(s, "id", ctx, true).value_or("");
      st.name = r.text(s, "name", ctx, false).value_or(st.id);
      st.x = r.number_or(s, "x", ctx, 0.0);
      st.y = r.number_or(s, "y", ctx, 0.0);
      st.tag = r.text(s, "tag", ctx, false).value_or("");
      if (st.id.empty()) continue;
      try {
        net.add_stop(std::move(st));
      } catch (const std::invalid_argument& e) {
        r.error(s, e.what());
      }
    }
  } else if (stops) {
    r.error(stops, "network.stops must be a list");
  }
  YAML::Node links = r.child(n, "links", "network", false);
  if (links && links.IsSequence()) {
    for (const auto& l : links) {
      if (!r.is_map(l, "link")) continue;
      r.allow_keys(l, {"id", "from", "to", "length", "running_time"}, "link");
      const std::string id = r.text(l, "id", "link", true).value_or("");
      const std::string ctx = "link '" + id + "'";
      auto from = r.stop_ref(net, r.child(l, "from", ctx, true), ctx + " from");
      auto to = r.stop_ref(net, r.child(l, "to", ctx, true), ctx + " to");
      const double length = r.number(l, "length", ctx, true).value_or(0.0);
      if (!(length > 0.0)) r.error(l, ctx + ": length must be positive");
      YAML::Node rtn = r.child(l, "running_time", ctx, true);
      RunningTime rt = rtn ? parse_running_time(r, rtn, ctx + " running_time") : RunningTime::constant(1.0);
      if (!from || !to || id.empty() || !(length > 0.0) || rt.validate()) continue;
      try {
        net.add_road_link(RoadLink{id, *from, *to, length, rt});
      } catch (const std::invalid_argument& e) {
        r.error(l, e.what());
      }
    }
  }
  YAML::Node walks = r.child(n, "walks", "network", false);
  if (walks && walks.IsSequence()) {
    for (const auto& w : walks) {
      if (!r.is_map(w, "walk")) continue;
      r.allow_keys(w, {"from", "to", "distance"}, "walk");
      auto from = r.stop_ref(net, r.child(w, "from", "walk", true), "walk from");
      auto to = r.stop_ref(net, r.child(w, "to", "walk", true), "walk to");
      const double dist = r.number(w, "distance", "walk", true).value_or(-1.0);
      if (dist < 0.0) r.error(w, "walk: distance must be non-negative");
      if (from && to && dist >= 0.0) net.add_walk_link(WalkLink{*from, *to, dist});
    }
  }
}

ModeWeights parse_weights(Reader& r, const YAML::Node& n, ModeWeights w, const std::string& ctx) {
  if (!r.is_map(n, ctx)) return w;
  r.allow_keys(n, {"wait", "ivt", "walk", "transfer"}, ctx);
  w.wait = r.number_or(n, "wait", ctx, w.wait);
  w.ivt = r.number_or(n, "ivt", ctx, w.ivt);
  w.walk = r.number_or(n, "walk", ctx, w.walk);
  w.transfer = r.number_or(n, "transfer", ctx, w.transfer);
  return w;
}

CrowdingSegment parse_segment(Reader& r, const YAML::Node& n, CrowdingSegment s, const std::string& ctx) {
  if (!r.is_map(n, ctx)) return s;
  r.allow_keys(n, {"lf_low", "value_low", "lf_high", "value_high"}, ctx);
  s.lf_low = r.number_or(n, "lf_low", ctx, s.lf_low);
  s.value_low = r.number_or(n, "value_low", ctx, s.value_low);
  s.lf_high = r.number_or(n, "lf_high", ctx, s.lf_high);
  s.value_high = r.number_or(n, "value_high", ctx, s.value_high);
  if (!(s.lf_high > s.lf_low) || s.value_high < s.value_low)
    r.error(n, ctx + ": needs lf_high > lf_low and value_high >= value_low");
  return s;
}

}  // namespace

ScenarioConfig parse_scenario_text(std::string_view text, const std::string& source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError({source + ":" + std::to_string(e.mark.line + 1) + ":" + std::to_string(e.mark.column + 1) +
                       ": " + e.msg});
  }
  Reader r(source);
  ScenarioConfig cfg;
  if (!root.IsMap()) throw ConfigError({source + ": scenario must be a mapping"});
  r.allow_keys(root, {"name", "network", "vehicle_types", "lines", "flex", "demand", "paths", "behavior", "run"},
               "scenario");
  cfg.name = r.text(root, "name", "scenario", false).value_or("scenario");

  if (YAML::Node n = r.child(root, "network", "scenario", true)) parse_network(r, n, cfg.network);
  Network& net = cfg.network;

  std::map<std::string, VehicleTypeIdx> vtypes;
  if (YAML::Node vt = r.child(root, "vehicle_types", "scenario", true); vt && vt.IsSequence()) {
    for (const auto& v : vt) {
      if (!r.is_map(v, "vehicle type")) continue;
      r.allow_keys(v, {"id", "capacity", "seats"}, "vehicle type");
      VehicleType t;
      t.id = r.text(v, "id", "vehicle type", true).value_or("");
      const std::string ctx = "vehicle type '" + t.id + "'";
      t.capacity = static_cast<int>(r.number(v, "capacity", ctx, true).value_or(0));
      t.seats = static_cast<int>(r.number(v, "seats", ctx, true).value_or(0));
      if (!(t.seats > 0 && t.seats <= t.capacity)) r.error(v, ctx + ": requires 0 < seats <= capacity");
      if (!vtypes.emplace(t.id, VehicleTypeIdx{cfg.vehicle_types.size()}).second)
        r.error(v, "duplicate vehicle type '" + t.id + "'");
      cfg.vehicle_types.push_back(t);
    }
  }
  auto vtype_ref = [&](const YAML::Node& map, const std::string& ctx) -> VehicleTypeIdx {
    auto id = r.text(map, "vehicle_type", ctx, true);
    if (!id) return VehicleTypeIdx{};
    if (auto it = vtypes.find(*id); it != vtypes.end()) return it->second;
    r.error(map["vehicle_type"], ctx + ": unknown vehicle type '" + *id + "'");
    return VehicleTypeIdx{};
  };

  const double window_default = 10800.0;
  const YAML::Node demand_node = r.child(root, "demand", "scenario", true);
  cfg.demand.window = demand_node && demand_node.IsMap() ? r.number_or(demand_node, "window", "demand", window_default)
                                                         : window_default;
  const YAML::Node run_node = r.child(root, "run", "scenario", false);
  if (run_node && r.is_map(run_node, "run")) {
    r.allow_keys(run_node, {"days", "replications", "seed", "drain", "warm_up", "check_invariants"}, "run");
    cfg.run.days = static_cast<int>(r.number_or(run_node, "days", "run", cfg.run.days));
    cfg.run.replications = static_cast<int>(r.number_or(run_node, "replications", "run", cfg.run.replications));
    cfg.run.seed = static_cast<std::uint64_t>(r.number_or(run_node, "seed", "run", static_cast<double>(cfg.run.seed)));
    cfg.run.drain = r.number_or(run_node, "drain", "run", cfg.run.drain);
    cfg.run.warm_up = r.boolean(run_node, "warm_up", "run").value_or(cfg.run.warm_up);
    cfg.run.check_invariants = r.boolean(run_node, "check_invariants", "run").value_or(false);
    if (cfg.run.days < 1) r.error(run_node, "run: days must be >= 1");
    if (cfg.run.replications < 1) r.error(run_node, "run: replications must be >= 1");
    if (cfg.run.drain < 0.0) r.error(run_node, "run: drain must be >= 0");
  }

  std::set<std::string> line_ids;
  if (YAML::Node lines = r.child(root, "lines", "scenario", false); lines && lines.IsSequence()) {
    for (const auto& l : lines) {
      if (!r.is_map(l, "line")) continue;
      r.allow_keys(l,
                   {"id", "stops", "links", "headway", "first_departure", "last_departure", "departures",
                    "vehicle_type"},
                   "line");
      FixLine line;
      line.id = r.text(l, "id", "line", true).value_or("");
      const std::string ctx = "line '" + line.id + "'";
      if (!line_ids.insert(line.id).second) r.error(l, "duplicate line id '" + line.id + "'");
      line.stops = r.stop_list(net, r.child(l, "stops", ctx, true), ctx + " stops");
      bool links_ok = true;
      if (YAML::Node ln = r.child(l, "links", ctx, false); ln && ln.IsSequence()) {
        for (const auto& e : ln) {
          if (auto id = net.find_link(e.as<std::string>())) line.links.push_back(*id);
          else {
            r.error(e, ctx + ": unknown link '" + e.as<std::string>() + "'");
            links_ok = false;
          }
        }
      } else {
        for (std::size_t i = 0; i + 1 < line.stops.size(); ++i) {
          if (auto id = net.link_between(line.stops[i], line.stops[i + 1])) line.links.push_back(*id);
          else {
            r.error(l, ctx + ": no road link " + net.stop(line.stops[i]).id + " -> " + net.stop(line.stops[i + 1]).id);
            links_ok = false;
          }
        }
      }
      if (auto h = r.number(l, "headway", ctx, false)) {
        line.timetable.headway = *h;
        line.timetable.first = r.number_or(l, "first_departure", ctx, 0.0);
        line.timetable.last = r.number_or(l, "last_departure", ctx, cfg.demand.window + cfg.run.drain);
      } else if (YAML::Node dep = r.child(l, "departures", ctx, false); dep && dep.IsSequence()) {
        for (const auto& e : dep) line.timetable.explicit_departures.push_back(e.as<double>());
      } else {
        r.error(l, ctx + ": needs 'headway' or 'departures'");
      }
      line.vehicle_type = vtype_ref(l, ctx);
      if (links_ok && !line.stops.empty()) {
        try {
          finalize_line(line, net);
        } catch (const std::invalid_argument& e) {
          r.error(l, e.what());
        }
      }
      cfg.lines.push_back(std::move(line));
    }
  }

  if (YAML::Node f = r.child(root, "flex", "scenario", false); f && r.is_map(f, "flex")) {
    r.allow_keys(f,
                 {"vehicle_type", "service_area", "fleet", "assignment_interval", "rebalancing_interval",
                  "balance_stops", "insert_into_assigned"},
                 "flex");
    FlexConfig& fc = cfg.flex;
    fc.enabled = true;
    fc.vehicle_type = vtype_ref(f, "flex");
    fc.service_area = r.stop_list(net, r.child(f, "service_area", "flex", true), "flex service_area");
    if (YAML::Node fleet = r.child(f, "fleet", "flex", true); fleet && fleet.IsSequence()) {
      for (const auto& e : fleet) {
        if (!r.is_map(e, "flex fleet entry")) continue;
        r.allow_keys(e, {"stop", "count"}, "flex fleet entry");
        auto s = r.stop_ref(net, r.child(e, "stop", "flex fleet entry", true), "flex fleet entry");
        const int count = static_cast<int>(r.number(e, "count", "flex fleet entry", true).value_or(0));
        if (count < 0) r.error(e, "flex fleet entry: count must be >= 0");
        if (s && std::find(fc.service_area.begin(), fc.service_area.end(), *s) == fc.service_area.end())
          r.error(e, "flex fleet entry: stop outside the service area");
        for (int i = 0; s && i < count; ++i) fc.initial_positions.push_back(*s);
      }
    }
    fc.assignment_interval = r.number_or(f, "assignment_interval", "flex", fc.assignment_interval);
    if (!(fc.assignment_interval > 0.0)) r.error(f, "flex: assignment_interval must be positive");
    if (YAML::Node rb = r.child(f, "rebalancing_interval", "flex", false); rb && !rb.IsNull() && !(rb.IsScalar() && rb.Scalar() == "null")) {
      fc.rebalancing_interval = r.number(f, "rebalancing_interval", "flex", false);
      if (fc.rebalancing_interval && !(*fc.rebalancing_interval > 0.0))
        r.error(rb, "flex: rebalancing_interval must be positive or null");
    }
    fc.balance_stops = r.stop_list(net, r.child(f, "balance_stops", "flex", false), "flex balance_stops");
    fc.insert_into_assigned = r.boolean(f, "insert_into_assigned", "flex").value_or(true);
  }

  if (demand_node && r.is_map(demand_node, "demand")) {
    r.allow_keys(demand_node, {"window", "poisson", "cohorts"}, "demand");
    if (!(cfg.demand.window > 0.0)) r.error(demand_node, "demand: window must be positive");
    if (YAML::Node c = r.child(demand_node, "cohorts", "demand", false); c && c.IsSequence()) {
      for (const auto& e : c) {
        if (!r.is_map(e, "cohort")) continue;
        r.allow_keys(e, {"origin", "destination", "size", "time"}, "cohort");
        auto o = r.stop_ref(net, r.child(e, "origin", "cohort", true), "cohort origin");
        auto d = r.stop_ref(net, r.child(e, "destination", "cohort", true), "cohort destination");
        const int size = static_cast<int>(r.number(e, "size", "cohort", true).value_or(0));
        const double t = r.number_or(e, "time", "cohort", 0.0);
        if (size <= 0) r.error(e, "cohort: size must be positive");
        if (t < 0.0 || t > cfg.demand.window) r.error(e, "cohort: time must lie in the demand window");
        if (o && d && size > 0) cfg.demand.cohorts.push_back({*o, *d, size, t});
      }
    }
    if (YAML::Node p = r.child(demand_node, "poisson", "demand", false); p && p.IsSequence()) {
      for (const auto& e : p) {
        if (!r.is_map(e, "poisson demand")) continue;
        r.allow_keys(e, {"origin", "destination", "rate"}, "poisson demand");
        auto o = r.stop_ref(net, r.child(e, "origin", "poisson demand", true), "poisson origin");
        auto d = r.stop_ref(net, r.child(e, "destination", "poisson demand", true), "poisson destination");
        const double rate = r.number(e, "rate", "poisson demand", true).value_or(0.0);
        if (!(rate > 0.0)) r.error(e, "poisson demand: rate must be positive");
        if (o && d && *o == *d) r.error(e, "poisson demand: origin equals destination");
        if (o && d && rate > 0.0) cfg.demand.poisson.push_back({*o, *d, rate});
      }
    }
  }

  if (YAML::Node p = r.child(root, "paths", "scenario", false); p && r.is_map(p, "paths")) {
    r.allow_keys(p, {"max_transfers", "max_walk", "allowed_types", "transfer_stops", "dominance_pruning", "merge_epsilon"},
                 "paths");
    ChoiceSetFilters& f = cfg.filters;
    f.max_transfers = static_cast<int>(r.number_or(p, "max_transfers", "paths", f.max_transfers));
    if (f.max_transfers < 0) r.error(p, "paths: max_transfers must be >= 0");
    f.max_walk = r.number_or(p, "max_walk", "paths", f.max_walk);
    f.merge_epsilon = r.number_or(p, "merge_epsilon", "paths", f.merge_epsilon);
    f.dominance_pruning = r.boolean(p, "dominance_pruning", "paths").value_or(false);
    f.transfer_stops = r.stop_list(net, r.child(p, "transfer_stops", "paths", false), "paths transfer_stops");
    if (YAML::Node a = r.child(p, "allowed_types", "paths", false); a && r.is_map(a, "paths.allowed_types")) {
      for (const auto& kv : a) {
        std::vector<std::string> types;
        if (!kv.second.IsSequence()) {
          r.error(kv.second, "paths.allowed_types entries must be lists");
          continue;
        }
        for (const auto& t : kv.second) {
          const std::string s = t.as<std::string>();
          static const std::set<std::string> known{"FIX", "FLEX", "FIX-FLEX", "FLEX-FIX", "FIX-FIX",
                                                   "FIX-FIX-FIX", "FIX-FIX-FLEX", "FLEX-FIX-FLEX", "FIX-FLEX-FIX",
                                                   "FLEX-FIX-FIX"};
          if (!known.count(s)) r.error(t, "unknown path type '" + s + "'");
          types.push_back(s);
        }
        f.allowed_types[kv.first.as<std::string>()] = std::move(types);
      }
    }
  }

  if (YAML::Node b = r.child(root, "behavior", "scenario", false); b && r.is_map(b, "behavior")) {
    r.allow_keys(b,
                 {"beta_ivt", "transfer_penalty_ivt_seconds", "value_of_time", "walk_speed", "walk_variability",
                  "crowding", "sharing", "censored_waits"},
                 "behavior");
    BehaviorConfig& bc = cfg.behavior;
    const double beta = r.number_or(b, "beta_ivt", "behavior", -0.0015742);
    const double trans = r.number_or(b, "transfer_penalty_ivt_seconds", "behavior", 300.0);
    if (beta == 0.0) r.error(b, "behavior: beta_ivt must be non-zero");
    bc.vot = ValueOfTime::from_ivt(beta, trans);
    if (YAML::Node v = r.child(b, "value_of_time", "behavior", false); v && r.is_map(v, "behavior.value_of_time")) {
      r.allow_keys(v, {"fix", "flex"}, "behavior.value_of_time");
      if (YAML::Node m = v["fix"]) bc.vot.fix = parse_weights(r, m, bc.vot.fix, "value_of_time.fix");
      if (YAML::Node m = v["flex"]) bc.vot.flex = parse_weights(r, m, bc.vot.flex, "value_of_time.flex");
    }
    for (const ModeWeights* w : {&bc.vot.fix, &bc.vot.flex})
      if (w->wait > 0 || w->ivt >= 0 || w->walk > 0 || w->transfer > 0)
        r.error(b, "behavior: weights must be disutilities (<= 0, ivt < 0)");
    bc.walk.speed = r.number_or(b, "walk_speed", "behavior", bc.walk.speed);
    bc.walk.variability = r.number_or(b, "walk_variability", "behavior", bc.walk.variability);
    if (!(bc.walk.speed > 0.0)) r.error(b, "behavior: walk_speed must be positive");
    if (bc.walk.variability < 0.0) r.error(b, "behavior: walk_variability must be >= 0");
    if (YAML::Node c = r.child(b, "crowding", "behavior", false); c && r.is_map(c, "behavior.crowding")) {
      r.allow_keys(c, {"seated", "standing", "denied_penalty"}, "behavior.crowding");
      if (YAML::Node s = c["seated"]) bc.crowding.seated = parse_segment(r, s, bc.crowding.seated, "crowding.seated");
      if (YAML::Node s = c["standing"])
        bc.crowding.standing = parse_segment(r, s, bc.crowding.standing, "crowding.standing");
      bc.crowding.denied_penalty = r.number_or(c, "denied_penalty", "behavior.crowding", bc.crowding.denied_penalty);
    }
    if (auto s = r.text(b, "sharing", "behavior", false)) {
      if (*s == "individual") bc.sharing = SharingMode::Individual;
      else if (*s == "od_group") bc.sharing = SharingMode::OdGroup;
      else r.error(b["sharing"], "behavior: sharing must be 'individual' or 'od_group'");
    }
    if (auto s = r.text(b, "censored_waits", "behavior", false)) {
      if (*s == "learn") bc.learn_censored_waits = true;
      else if (*s == "exclude") bc.learn_censored_waits = false;
      else r.error(b["censored_waits"], "behavior: censored_waits must be 'exclude' or 'learn'");
    }
  }

  // Cross-checks that need the whole document.
  if (cfg.behavior.sharing == SharingMode::Individual && !cfg.demand.poisson.empty())
    r.error(root, "behavior: individual sharing needs persistent travelers (cohort demand only)");
  if (cfg.demand.cohorts.empty() && cfg.demand.poisson.empty()) r.error(root, "demand: no travelers defined");
  const FlexConfig& fc = cfg.flex;
  for (StopIdx s : fc.balance_stops)
    if (std::find(fc.service_area.begin(), fc.service_area.end(), s) == fc.service_area.end())
      r.error(root, "flex: balance stop '" + net.stop(s).id + "' outside the service area");

  if (!r.errors().empty()) throw ConfigError(r.errors());
  cfg.canonical = to_json(root).dump();
  return cfg;
}

ScenarioConfig parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path.string() + ": cannot open scenario file"});
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario_text(ss.str(), path.string());
}

std::uint64_t config_hash(const ScenarioConfig& cfg) {
  nlohmann::json j;
  j["scenario"] = nlohmann::json::parse(cfg.canonical.empty() ? "null" : cfg.canonical);
  j["run"] = {{"days", cfg.run.days},     {"replications", cfg.run.replications}, {"seed", cfg.run.seed},
              {"drain", cfg.run.drain},   {"warm_up", cfg.run.warm_up}};
  const std::string s = j.dump();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace fixflex
