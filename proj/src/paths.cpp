#include "fixflex/paths.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

namespace fixflex {

Mode mode_of_leg(std::span<const ServiceRef> component) {
  if (component.empty()) throw std::invalid_argument("empty transit component");
  const Mode m = component.front().kind;
  for (const ServiceRef& s : component)
    if (s.kind != m) throw std::invalid_argument("transit component mixes fixed and flexible services");
  return m;
}

bool Leg::has_line(LineIdx l) const {
  return std::any_of(services.begin(), services.end(),
                     [&](const ServiceRef& s) { return s.kind == Mode::Fix && s.line == l; });
}

std::vector<LineIdx> Leg::lines() const {
  std::vector<LineIdx> out;
  for (const ServiceRef& s : services)
    if (s.kind == Mode::Fix) out.push_back(s.line);
  return out;
}

std::string PathAlternative::type() const {
  if (legs.empty()) return "WALK";
  std::string s;
  for (const Leg& l : legs) {
    if (!s.empty()) s += '-';
    s += to_string(l.mode);
  }
  return s;
}

Meters PathAlternative::walk_total() const { return std::accumulate(walks.begin(), walks.end(), 0.0); }

Seconds PathAlternative::free_flow_total() const {
  Seconds t = 0.0;
  for (const Leg& l : legs) t += l.free_flow;
  return t;
}

PathIdx GlobalPathSet::add(PathAlternative p) {
  const PathIdx idx{paths_.size()};
  by_od_[{p.origin, p.destination}].push_back(idx);
  paths_.push_back(std::move(p));
  return idx;
}

ComponentIdx GlobalPathSet::intern(const ComponentInfo& c) {
  auto [it, inserted] = component_ids_.try_emplace(c, ComponentIdx{components_.size()});
  if (inserted) components_.push_back(c);
  return it->second;
}

std::span<const PathIdx> GlobalPathSet::alternatives(StopIdx o, StopIdx d) const {
  const auto it = by_od_.find({o, d});
  if (it == by_od_.end()) return {};
  return it->second;
}

PathSet GlobalPathSet::initial_set(StopIdx o, StopIdx d) const {
  PathSet out;
  for (PathIdx p : alternatives(o, d)) out.push_back(ActivePath{p, 0});
  return out;
}

std::string od_category(const Network& net, StopIdx o, StopIdx d) {
  auto letter = [&](StopIdx s) -> char {
    const std::string& tag = net.stop(s).tag;
    if (tag == "corridor") return 'C';
    if (tag == "branch") return 'B';
    return '?';
  };
  const char a = letter(o);
  const char b = letter(d);
  if (a == '?' || b == '?') return "ALL";
  return std::string{a} + "2" + std::string{b};
}

namespace {

std::vector<Mode> parse_type(const std::string& type) {
  std::vector<Mode> out;
  std::stringstream ss(type);
  std::string part;
  while (std::getline(ss, part, '-')) {
    if (part == "FIX") out.push_back(Mode::Fix);
    else if (part == "FLEX") out.push_back(Mode::Flex);
    else throw ConfigError({"unknown path type '" + type + "'"});
  }
  return out;
}

bool contains(std::span<const StopIdx> v, StopIdx s) { return std::find(v.begin(), v.end(), s) != v.end(); }

class Generator {
 public:
  Generator(const Network& net, std::span<const FixLine> lines, const RouteTable& routes,
            const ChoiceSetFilters& filters, GlobalPathSet& out)
      : net_(net), lines_(lines), routes_(routes), filters_(filters), out_(out), legs_from_(net.stop_count()),
        legs_ready_(net.stop_count(), false) {}

  std::size_t run(StopIdx o, StopIdx d) {
    o_ = o;
    d_ = d;
    category_ = od_category(net_, o, d);
    allowed_.reset();
    if (auto it = filters_.allowed_types.find(category_); it != filters_.allowed_types.end()) {
      allowed_.emplace();
      for (const std::string& t : it->second) allowed_->push_back(parse_type(t));
    }
    found_.clear();
    if (o == d) {
      PathAlternative p{o, d, {}, {0.0}, category_};
      found_.push_back(std::move(p));
    } else {
      visited_ = {o};
      dfs(o);
    }
    if (filters_.dominance_pruning) prune();
    for (PathAlternative& p : found_) out_.add(std::move(p));
    return found_.size();
  }

 private:
  void dfs(StopIdx cur) {
    if (!legs_.empty()) {
      if (auto w = net_.walk_distance(cur, d_); w && *w <= filters_.max_walk) emit(*w);
      if (cur == d_) return;
    }
    if (static_cast<int>(legs_.size()) >= filters_.max_transfers + 1) return;
    for (const WalkLink& wl : net_.walks_from(cur)) {
      if (wl.distance > filters_.max_walk) continue;
      const StopIdx b = wl.to;
      if (b != cur && contains(visited_, b)) continue;
      if (!legs_.empty() && !filters_.transfer_stops.empty() &&
          !(contains(filters_.transfer_stops, cur) && contains(filters_.transfer_stops, b)))
        continue;
      for (const Leg& leg : legs_from(b)) {
        if (!legs_.empty()) {
          const Leg& prev = legs_.back();
          if (prev.mode == Mode::Flex && leg.mode == Mode::Flex) continue;
          if (prev.mode == Mode::Fix && leg.mode == Mode::Fix && b == cur &&
              std::any_of(leg.services.begin(), leg.services.end(),
                          [&](const ServiceRef& s) { return prev.has_line(s.line); }))
            continue;
        }
        const StopIdx a = leg.alight.front();
        if (contains(visited_, a)) continue;
        if (!prefix_allowed(leg.mode)) continue;
        const std::size_t mark = visited_.size();
        if (b != cur) visited_.push_back(b);
        visited_.push_back(a);
        legs_.push_back(leg);
        walks_.push_back(wl.distance);
        dfs(a);
        walks_.pop_back();
        legs_.pop_back();
        visited_.resize(mark);
      }
    }
  }

  bool prefix_allowed(Mode next) const {
    if (!allowed_) return true;
    const std::size_t n = legs_.size() + 1;
    for (const auto& t : *allowed_) {
      if (t.size() < n) continue;
      bool ok = t[n - 1] == next;
      for (std::size_t i = 0; ok && i + 1 < n; ++i) ok = t[i] == legs_[i].mode;
      if (ok) return true;
    }
    return false;
  }

  void emit(Meters egress) {
    if (allowed_) {
      const bool ok = std::any_of(allowed_->begin(), allowed_->end(), [&](const std::vector<Mode>& t) {
        if (t.size() != legs_.size()) return false;
        for (std::size_t i = 0; i < t.size(); ++i)
          if (t[i] != legs_[i].mode) return false;
        return true;
      });
      if (!ok) return;
    }
    PathAlternative p{o_, d_, legs_, walks_, category_};
    p.walks.push_back(egress);
    found_.push_back(std::move(p));
  }

  const std::vector<Leg>& legs_from(StopIdx b) {
    if (legs_ready_[b.get()]) return legs_from_[b.get()];
    std::vector<Leg>& out = legs_from_[b.get()];
    std::map<StopIdx, std::vector<std::pair<Seconds, LineIdx>>> by_alight;
    for (std::size_t li = 0; li < lines_.size(); ++li) {
      const FixLine& line = lines_[li];
      const int p = line.position_of(b);
      if (p < 0) continue;
      for (int q = p + 1; q < static_cast<int>(line.stops.size()); ++q)
        by_alight[line.stops[static_cast<std::size_t>(q)]].emplace_back(line.free_flow_between(p, q), LineIdx{li});
    }
    for (auto& [a, options] : by_alight) {
      std::sort(options.begin(), options.end());
      std::size_t i = 0;
      while (i < options.size()) {
        std::size_t j = i;
        while (j < options.size() && options[j].first - options[i].first <= filters_.merge_epsilon + 1e-9) ++j;
        ComponentInfo info{Mode::Fix, {b}, {}, {a}, 0.0};
        for (std::size_t k = i; k < j; ++k) {
          info.lines.push_back(options[k].second);
          info.free_flow += options[k].first;
        }
        info.free_flow /= static_cast<double>(j - i);
        std::sort(info.lines.begin(), info.lines.end());
        Leg leg;
        leg.board = {b};
        for (LineIdx l : info.lines) leg.services.push_back(ServiceRef::fix(l));
        leg.alight = {a};
        leg.mode = Mode::Fix;
        leg.free_flow = info.free_flow;
        leg.component = out_.intern(info);
        out.push_back(std::move(leg));
        i = j;
      }
    }
    if (routes_.contains(b)) {
      for (StopIdx a : routes_.stops()) {
        if (a == b) continue;
        const Route* r = routes_.find(b, a);
        if (!r) continue;
        ComponentInfo info{Mode::Flex, {b}, {}, {a}, r->free_flow};
        Leg leg;
        leg.board = {b};
        leg.services = {ServiceRef::flex()};
        leg.alight = {a};
        leg.mode = Mode::Flex;
        leg.free_flow = r->free_flow;
        leg.component = out_.intern(info);
        out.push_back(std::move(leg));
      }
    }
    legs_ready_[b.get()] = true;
    return out;
  }

  void prune() {
    std::vector<bool> drop(found_.size(), false);
    for (std::size_t i = 0; i < found_.size(); ++i) {
      const PathAlternative& p = found_[i];
      for (std::size_t j = 0; j < found_.size() && !drop[i]; ++j) {
        if (i == j) continue;
        const PathAlternative& q = found_[j];
        const bool le = q.walk_total() <= p.walk_total() && q.transfers() <= p.transfers() &&
                        q.free_flow_total() <= p.free_flow_total();
        const bool lt = q.walk_total() < p.walk_total() || q.transfers() < p.transfers() ||
                        q.free_flow_total() < p.free_flow_total();
        if (le && lt) drop[i] = true;
      }
    }
    std::vector<PathAlternative> kept;
    for (std::size_t i = 0; i < found_.size(); ++i)
      if (!drop[i]) kept.push_back(std::move(found_[i]));
    found_ = std::move(kept);
  }

  const Network& net_;
  std::span<const FixLine> lines_;
  const RouteTable& routes_;
  const ChoiceSetFilters& filters_;
  GlobalPathSet& out_;
  std::vector<std::vector<Leg>> legs_from_;
  std::vector<bool> legs_ready_;

  StopIdx o_, d_;
  std::string category_;
  std::optional<std::vector<std::vector<Mode>>> allowed_;
  std::vector<Leg> legs_;
  std::vector<Meters> walks_;
  std::vector<StopIdx> visited_;
  std::vector<PathAlternative> found_;
};

}  // namespace

GlobalPathSet generate_choice_sets(const Network& net, std::span<const FixLine> lines, const RouteTable& flex_routes,
                                   const ChoiceSetFilters& filters,
                                   std::span<const std::pair<StopIdx, StopIdx>> ods) {
  if (filters.max_transfers < 0) throw ConfigError({"max_transfers must be >= 0"});
  GlobalPathSet out;
  Generator gen(net, lines, flex_routes, filters, out);
  std::vector<std::string> errors;
  std::set<std::pair<StopIdx, StopIdx>> seen;
  for (const auto& [o, d] : ods) {
    if (!seen.insert({o, d}).second) continue;
    if (gen.run(o, d) == 0)
      errors.push_back("no path alternatives for OD " + net.stop(o).id + " -> " + net.stop(d).id + " (category " +
                       od_category(net, o, d) + ")");
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));
  return out;
}

std::vector<std::string> check_path(const PathAlternative& p, const Network& net, const ChoiceSetFilters& filters) {
  std::vector<std::string> problems;
  if (p.walks.size() != p.legs.size() + 1) problems.push_back("walk/leg alternation broken");
  if (p.transfers() > filters.max_transfers) problems.push_back("too many transfers");
  for (Meters w : p.walks)
    if (w > filters.max_walk) problems.push_back("walk exceeds cap");
  std::vector<StopIdx> seen{p.origin};
  for (std::size_t j = 0; j < p.legs.size(); ++j) {
    const Leg& l = p.legs[j];
    if (l.board.empty() || l.alight.empty() || l.services.empty()) {
      problems.push_back("empty leg component");
      continue;
    }
    try {
      if (mode_of_leg(l.services) != l.mode) problems.push_back("leg mode tag mismatch");
    } catch (const std::invalid_argument& e) {
      problems.push_back(e.what());
    }
    if (l.mode == Mode::Flex && (l.board.size() != 1 || l.alight.size() != 1 || l.services.size() != 1))
      problems.push_back("flexible leg is not a singleton");
    if (j > 0 && l.mode == Mode::Flex && p.legs[j - 1].mode == Mode::Flex)
      problems.push_back("consecutive flexible legs");
    if (j > 0 && !filters.transfer_stops.empty()) {
      for (StopIdx s : p.legs[j - 1].alight)
        if (!contains(filters.transfer_stops, s)) problems.push_back("transfer outside allowed stops");
    }
    for (StopIdx s : l.board)
      if (s != seen.back() && contains(seen, s)) problems.push_back("stop " + net.stop(s).id + " repeated");
    for (StopIdx s : l.board) seen.push_back(s);
    for (StopIdx s : l.alight) {
      if (contains(seen, s)) problems.push_back("stop " + net.stop(s).id + " repeated");
      seen.push_back(s);
    }
  }
  if (auto it = filters.allowed_types.find(p.category); it != filters.allowed_types.end()) {
    if (std::find(it->second.begin(), it->second.end(), p.type()) == it->second.end())
      problems.push_back("path type " + p.type() + " not allowed for " + p.category);
  }
  return problems;
}

std::string describe(const PathAlternative& p, const Network& net, std::span<const FixLine> lines) {
  std::ostringstream os;
  auto stops = [&](const std::vector<StopIdx>& v) {
    os << '{';
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << net.stop(v[i]).id;
    os << '}';
  };
  os << net.stop(p.origin).id;
  for (std::size_t j = 0; j < p.legs.size(); ++j) {
    const Leg& l = p.legs[j];
    os << " W(" << p.walks[j] << "m) ";
    stops(l.board);
    os << " [";
    for (std::size_t i = 0; i < l.services.size(); ++i) {
      if (i) os << '|';
      if (l.services[i].kind == Mode::Flex) os << "FLEX";
      else os << lines[l.services[i].line.get()].id;
    }
    os << "] ";
    stops(l.alight);
  }
  os << " W(" << p.walks.back() << "m) " << net.stop(p.destination).id << "  n_trans=" << p.transfers()
     << " modes=" << p.type();
  return os.str();
}

std::map<StopIdx, PathSet> connection_sets(const GlobalPathSet& g, std::span<const ActivePath> set) {
  std::map<StopIdx, PathSet> out;
  for (const ActivePath& a : set) {
    if (g.finished(a)) continue;
    for (StopIdx s : g.leg(a).board) out[s].push_back(a);
  }
  return out;
}

std::map<Mode, PathSet> mode_sets(const GlobalPathSet& g, std::span<const ActivePath> bucket) {
  std::map<Mode, PathSet> out;
  for (const ActivePath& a : bucket) out[g.leg(a).mode].push_back(a);
  return out;
}

std::map<StopIdx, PathSet> dropoff_sets(const GlobalPathSet& g, std::span<const ActivePath> bucket) {
  std::map<StopIdx, PathSet> out;
  for (const ActivePath& a : bucket)
    for (StopIdx s : g.leg(a).alight) out[s].push_back(a);
  return out;
}

std::pair<PathSet, PathSet> board_stay_partition(const GlobalPathSet& g, std::span<const ActivePath> bucket,
                                                 LineIdx arriving) {
  std::pair<PathSet, PathSet> out;
  for (const ActivePath& a : bucket) (g.leg(a).has_line(arriving) ? out.first : out.second).push_back(a);
  return out;
}

std::map<StopIdx, PathSet> alight_sets(const GlobalPathSet& g, std::span<const ActivePath> boarded) {
  return dropoff_sets(g, boarded);
}

}  // namespace fixflex
