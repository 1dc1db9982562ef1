#include "fixflex/decisions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fixflex {

ValueOfTime ValueOfTime::from_ivt(double beta_ivt, Seconds transfer_ivt_seconds) {
  const ModeWeights w{2.0 * beta_ivt, beta_ivt, beta_ivt, transfer_ivt_seconds * beta_ivt};
  return {w, w};
}

namespace {

Meters access_distance(const Network& net, StopIdx from, const std::vector<StopIdx>& to) {
  Meters best = std::numeric_limits<double>::infinity();
  for (StopIdx s : to)
    if (auto d = net.walk_distance(from, s)) best = std::min(best, *d);
  return best;
}

}  // namespace

double path_utility(const PathAlternative& path, std::size_t from_leg, StopIdx location, bool skip_first_wait,
                    const UtilityContext& ctx) {
  double v = 0.0;
  if (from_leg >= path.legs.size()) {
    const Meters egress = location == path.destination ? 0.0 : *ctx.net.walk_distance(location, path.destination);
    const Mode last = path.legs.empty() ? Mode::Fix : path.legs.back().mode;
    return ctx.vot.of(last).walk * ctx.walk.anticipated(egress);
  }
  for (std::size_t j = from_leg; j < path.legs.size(); ++j) {
    const Leg& leg = path.legs[j];
    const ModeWeights& w = ctx.vot.of(leg.mode);
    const Meters access = j == from_leg ? access_distance(ctx.net, location, leg.board) : path.walks[j];
    v += w.walk * ctx.walk.anticipated(access);
    if (!(j == from_leg && skip_first_wait)) v += w.wait * ctx.ledger.anticipate(ctx.group, leg.component, Quantity::Wait);
    v += w.ivt * ctx.ledger.anticipate(ctx.group, leg.component, Quantity::Ivt);
    if (j > from_leg) v += w.transfer;
  }
  v += ctx.vot.of(path.legs.back().mode).walk * ctx.walk.anticipated(path.walks.back());
  return v;
}

double path_utility(ActivePath a, StopIdx location, bool skip_first_wait, const UtilityContext& ctx) {
  return path_utility(ctx.paths.path(a.path), a.leg, location, skip_first_wait, ctx);
}

double action_logsum(std::span<const double> utilities) {
  if (utilities.empty()) throw std::invalid_argument("logsum of an empty set");
  if (utilities.size() == 1) return utilities.front();
  const double m = *std::max_element(utilities.begin(), utilities.end());
  double s = 0.0;
  for (double v : utilities) s += std::exp(v - m);
  return m + std::log(s);
}

double set_logsum(std::span<const ActivePath> set, StopIdx location, bool skip_first_wait, const UtilityContext& ctx) {
  std::vector<double> v;
  v.reserve(set.size());
  for (const ActivePath& a : set) v.push_back(path_utility(a, location, skip_first_wait, ctx));
  return action_logsum(v);
}

std::vector<double> mnl_probabilities(std::span<const double> utilities) {
  if (utilities.empty()) throw std::invalid_argument("choice among no actions");
  const double m = *std::max_element(utilities.begin(), utilities.end());
  std::vector<double> p(utilities.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) s += p[i] = std::exp(utilities[i] - m);
  for (double& x : p) x /= s;
  return p;
}

std::size_t sample_choice(std::span<const double> probabilities, RandomStream& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probabilities.size(); ++i) {
    acc += probabilities[i];
    if (u < acc) return i;
  }
  for (std::size_t i = probabilities.size(); i-- > 0;)
    if (probabilities[i] > 0.0) return i;
  return 0;
}

std::size_t choose_action(std::span<const double> utilities, RandomStream& rng) {
  if (utilities.size() == 1) return 0;
  return sample_choice(mnl_probabilities(utilities), rng);
}

}  // namespace fixflex
