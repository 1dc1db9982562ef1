#include "fixflex/learning.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <tuple>

namespace fixflex {

double CrowdingSegment::at(double load_factor) const {
  if (load_factor <= lf_low) return value_low;
  if (load_factor >= lf_high) return value_high;
  return value_low + (value_high - value_low) * (load_factor - lf_low) / (lf_high - lf_low);
}

double crowding_multiplier(double load_factor, bool seated, const CrowdingCurve& curve) {
  return seated ? curve.seated.at(load_factor) : curve.standing.at(load_factor);
}

Seconds weighted_wait(const RealizedLegExperience& exp, const CrowdingCurve& curve) {
  return exp.nominal_wait + curve.denied_penalty * exp.denied_wait;
}

Seconds weighted_ivt(const RealizedLegExperience& exp, const CrowdingCurve& curve) {
  Seconds total = 0.0;
  for (const IvtInterval& h : exp.ivt) total += h.duration * crowding_multiplier(h.load_factor, h.seated, curve);
  return total;
}

Seconds ExperienceLedger::prior(ComponentIdx j, Quantity q) const {
  if (!j.valid() || j.get() >= priors_.size())
    throw ConfigError({"no prior for component " + std::to_string(j.value)});
  const ComponentPrior& p = priors_[j.get()];
  return q == Quantity::Wait ? p.wait : p.ivt;
}

Seconds ExperienceLedger::anticipate(GroupIdx g, ComponentIdx j, Quantity q) const {
  const auto it = entries_.find(key(g, j, q));
  if (it == entries_.end() || it->second.n_exp == 0) return prior(j, q);
  return it->second.experience;
}

ExperienceLedger::Entry ExperienceLedger::entry(GroupIdx g, ComponentIdx j, Quantity q) const {
  const auto it = entries_.find(key(g, j, q));
  return it == entries_.end() ? Entry{} : it->second;
}

ExperienceLedger::Entry ExperienceLedger::msa_update(GroupIdx g, ComponentIdx j, Quantity q, Seconds day_mean) {
  (void)prior(j, q);
  Entry& e = entries_[key(g, j, q)];
  e.n_exp += 1;
  e.experience += (day_mean - e.experience) / e.n_exp;
  return e;
}

std::vector<ExperienceLedger::Row> ExperienceLedger::rows() const {
  std::vector<Row> out;
  out.reserve(entries_.size());
  for (const auto& [k, e] : entries_)
    out.push_back({GroupIdx{static_cast<std::int32_t>(k >> 32)},
                   ComponentIdx{static_cast<std::int32_t>((k & 0xFFFFFFFFULL) >> 1)}, static_cast<Quantity>(k & 1), e});
  std::sort(out.begin(), out.end(), [](const Row& a, const Row& b) {
    return std::tie(a.group, a.component, a.quantity) < std::tie(b.group, b.component, b.quantity);
  });
  return out;
}

void ExperienceLedger::mark_collected(int day) {
  if (day <= last_day_) throw std::logic_error("experience for day " + std::to_string(day) + " already collected");
  last_day_ = day;
}

void collect_day(std::span<const GroupedExperience> experiences, ExperienceLedger& ledger, SharingMode sharing,
                 const CrowdingCurve& curve, int day) {
  ledger.mark_collected(day);
  struct Sum {
    double total = 0.0;
    int n = 0;
  };
  std::map<std::tuple<std::int32_t, std::int32_t, int>, Sum> sums;
  for (const GroupedExperience& ge : experiences) {
    const GroupIdx g = experience_group(sharing, ge.traveler_group, ge.od_group);
    const RealizedLegExperience& e = ge.experience;
    Sum& w = sums[{g.value, e.component.value, static_cast<int>(Quantity::Wait)}];
    w.total += weighted_wait(e, curve);
    ++w.n;
    if (!e.boarded) continue;
    Sum& v = sums[{g.value, e.component.value, static_cast<int>(Quantity::Ivt)}];
    v.total += weighted_ivt(e, curve);
    ++v.n;
  }
  for (const auto& [k, s] : sums) {
    const auto [g, j, q] = k;
    ledger.msa_update(GroupIdx{g}, ComponentIdx{j}, static_cast<Quantity>(q), s.total / s.n);
  }
}

}  // namespace fixflex
