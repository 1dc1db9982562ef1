#include "fixflex/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace fixflex {

Seconds RunningTime::free_flow() const { return kind == Kind::Constant ? value : std::exp(mu); }

std::optional<std::string> RunningTime::validate() const {
  if (kind == Kind::Constant) {
    if (!(value > 0.0) || !std::isfinite(value)) return "constant running time must be positive";
    return std::nullopt;
  }
  if (!std::isfinite(mu)) return "log-normal mu must be finite";
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) return "log-normal sigma must be non-negative";
  return std::nullopt;
}

StopIdx Network::add_stop(Stop stop) {
  const StopIdx idx{stops_.size()};
  if (!stop_ids_.emplace(stop.id, idx).second) throw std::invalid_argument("duplicate stop id '" + stop.id + "'");
  stops_.push_back(std::move(stop));
  out_.emplace_back();
  walks_.push_back({WalkLink{idx, idx, 0.0}});
  return idx;
}

LinkIdx Network::add_road_link(RoadLink link) {
  if (!link.from.valid() || link.from.get() >= stops_.size() || !link.to.valid() || link.to.get() >= stops_.size())
    throw std::invalid_argument("road link '" + link.id + "' references an unknown stop");
  if (!(link.length > 0.0)) throw std::invalid_argument("road link '" + link.id + "' must have positive length");
  if (auto err = link.running_time.validate()) throw std::invalid_argument("road link '" + link.id + "': " + *err);
  const LinkIdx idx{links_.size()};
  if (!link_ids_.emplace(link.id, idx).second) throw std::invalid_argument("duplicate link id '" + link.id + "'");
  out_[link.from.get()].push_back(idx);
  links_.push_back(std::move(link));
  return idx;
}

void Network::add_walk_link(WalkLink link) {
  if (!link.from.valid() || link.from.get() >= stops_.size() || !link.to.valid() || link.to.get() >= stops_.size())
    throw std::invalid_argument("walk link references an unknown stop");
  if (!(link.distance >= 0.0)) throw std::invalid_argument("walk link distance must be non-negative");
  if (link.from == link.to) return;  // self links are implicit
  walks_[link.from.get()].push_back(link);
}

std::optional<StopIdx> Network::find_stop(std::string_view id) const {
  if (auto it = stop_ids_.find(std::string(id)); it != stop_ids_.end()) return it->second;
  return std::nullopt;
}

std::optional<LinkIdx> Network::find_link(std::string_view id) const {
  if (auto it = link_ids_.find(std::string(id)); it != link_ids_.end()) return it->second;
  return std::nullopt;
}

std::optional<LinkIdx> Network::link_between(StopIdx from, StopIdx to) const {
  std::optional<LinkIdx> best;
  for (LinkIdx l : out_links(from)) {
    if (links_[l.get()].to != to) continue;
    if (!best || links_[l.get()].running_time.free_flow() < links_[best->get()].running_time.free_flow()) best = l;
  }
  return best;
}

std::optional<Meters> Network::walk_distance(StopIdx from, StopIdx to) const {
  std::optional<Meters> best;
  for (const WalkLink& w : walks_from(from))
    if (w.to == to && (!best || w.distance < *best)) best = w.distance;
  return best;
}

namespace {

constexpr double kTimeTolerance = 1e-9;

bool lex_less(const Network& net, const std::vector<LinkIdx>& a, const std::vector<LinkIdx>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(), [&](LinkIdx x, LinkIdx y) {
    return net.link(x).id < net.link(y).id;
  });
}

}  // namespace

std::optional<Route> shortest_route(const Network& net, StopIdx origin, StopIdx dest) {
  if (origin == dest) return Route{{}, {origin}, 0.0, 0.0};

  const std::size_t n = net.stop_count();
  std::vector<double> cost(n, std::numeric_limits<double>::infinity());
  std::vector<std::vector<LinkIdx>> seq(n);
  std::vector<bool> settled(n, false);
  using Item = std::pair<double, std::int32_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> open;

  cost[origin.get()] = 0.0;
  open.emplace(0.0, origin.value);
  while (!open.empty()) {
    auto [c, u] = open.top();
    open.pop();
    if (settled[static_cast<std::size_t>(u)] || c > cost[static_cast<std::size_t>(u)]) continue;
    settled[static_cast<std::size_t>(u)] = true;
    if (u == dest.value) break;
    for (LinkIdx l : net.out_links(StopIdx{u})) {
      const RoadLink& link = net.link(l);
      const std::size_t v = link.to.get();
      if (settled[v]) continue;
      const double nc = c + link.running_time.free_flow();
      auto candidate = seq[static_cast<std::size_t>(u)];
      candidate.push_back(l);
      const bool better = nc < cost[v] - kTimeTolerance ||
                          (std::abs(nc - cost[v]) <= kTimeTolerance && lex_less(net, candidate, seq[v]));
      if (better) {
        cost[v] = std::min(nc, cost[v]);
        seq[v] = std::move(candidate);
        open.emplace(cost[v], static_cast<std::int32_t>(v));
      }
    }
  }
  if (!settled[dest.get()]) return std::nullopt;

  Route r;
  r.links = std::move(seq[dest.get()]);
  r.stops.push_back(origin);
  for (LinkIdx l : r.links) {
    const RoadLink& link = net.link(l);
    r.stops.push_back(link.to);
    r.free_flow += link.running_time.free_flow();
    r.length += link.length;
  }
  return r;
}

Seconds sample_running_time(const RoadLink& link, RandomStream& rng) {
  const RunningTime& rt = link.running_time;
  if (rt.kind == RunningTime::Kind::Constant) return rt.value;
  return rng.lognormal(rt.mu, rt.sigma);
}

Seconds WalkModel::realized(Meters distance, RandomStream& rng) const {
  if (distance <= 0.0) return 0.0;
  const Seconds base = anticipated(distance);
  if (variability <= 0.0) return base;
  const double s2 = std::log1p(variability * variability);
  return base * rng.lognormal(-0.5 * s2, std::sqrt(s2));
}

RouteTable::RouteTable(const Network& net, std::span<const StopIdx> stops) : stops_(stops.begin(), stops.end()) {
  slot_of_.assign(net.stop_count(), -1);
  for (std::size_t i = 0; i < stops_.size(); ++i) slot_of_[stops_[i].get()] = static_cast<int>(i);
  routes_.resize(stops_.size() * stops_.size());
  for (std::size_t i = 0; i < stops_.size(); ++i)
    for (std::size_t j = 0; j < stops_.size(); ++j) routes_[i * stops_.size() + j] = shortest_route(net, stops_[i], stops_[j]);
}

const Route* RouteTable::find(StopIdx origin, StopIdx dest) const {
  const int i = slot(origin);
  const int j = slot(dest);
  if (i < 0 || j < 0) return nullptr;
  const auto& r = routes_[static_cast<std::size_t>(i) * stops_.size() + static_cast<std::size_t>(j)];
  return r ? &*r : nullptr;
}

}  // namespace fixflex
