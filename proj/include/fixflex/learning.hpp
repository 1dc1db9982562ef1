#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "fixflex/core.hpp"

namespace fixflex {

/// Multiplier that is flat at value_low up to lf_low, linear up to
/// (lf_high, value_high) and flat afterwards.
struct CrowdingSegment {
  double lf_low = 0.0;
  double value_low = 1.0;
  double lf_high = 1.0;
  double value_high = 1.0;

  [[nodiscard]] double at(double load_factor) const;
};

struct CrowdingCurve {
  CrowdingSegment seated{0.5, 0.95, 2.0, 1.71};
  CrowdingSegment standing{1.0, 1.78, 2.0, 2.69};
  double denied_penalty = 3.5;
};

[[nodiscard]] double crowding_multiplier(double load_factor, bool seated, const CrowdingCurve& curve);

struct IvtInterval {
  Seconds duration = 0.0;
  double load_factor = 0.0;
  bool seated = true;
};

struct RealizedLegExperience {
  ComponentIdx component;
  Seconds nominal_wait = 0.0;
  Seconds denied_wait = 0.0;
  std::vector<IvtInterval> ivt;
  int day = 0;
  /// False for a wait cut off by the end of the day; only the wait is learned then.
  bool boarded = true;
};

[[nodiscard]] Seconds weighted_wait(const RealizedLegExperience& exp, const CrowdingCurve& curve);
[[nodiscard]] Seconds weighted_ivt(const RealizedLegExperience& exp, const CrowdingCurve& curve);

enum class Quantity : std::uint8_t { Wait = 0, Ivt = 1 };
enum class SharingMode : std::uint8_t { Individual, OdGroup };

[[nodiscard]] inline const char* to_string(Quantity q) { return q == Quantity::Wait ? "wait" : "ivt"; }

struct ComponentPrior {
  Seconds wait = 0.0;
  Seconds ivt = 0.0;
};

/// Per (experience group, component, quantity) learning state, plus the
/// component priors shared by every group.
class ExperienceLedger {
 public:
  struct Entry {
    Seconds experience = 0.0;
    int n_exp = 0;
  };

  ExperienceLedger() = default;
  explicit ExperienceLedger(std::vector<ComponentPrior> priors) : priors_(std::move(priors)) {}

  [[nodiscard]] Seconds prior(ComponentIdx j, Quantity q) const;
  /// The prior while nothing has been experienced, otherwise the accumulated experience.
  [[nodiscard]] Seconds anticipate(GroupIdx g, ComponentIdx j, Quantity q) const;
  [[nodiscard]] Entry entry(GroupIdx g, ComponentIdx j, Quantity q) const;

  /// Successive-averages step with divisor n_exp; returns the updated entry.
  Entry msa_update(GroupIdx g, ComponentIdx j, Quantity q, Seconds day_mean);

  [[nodiscard]] int last_collected_day() const { return last_day_; }
  void mark_collected(int day);

  [[nodiscard]] std::size_t component_count() const { return priors_.size(); }

  struct Row {
    GroupIdx group;
    ComponentIdx component;
    Quantity quantity;
    Entry entry;
  };
  /// Every recorded entry, ordered by (group, component, quantity).
  [[nodiscard]] std::vector<Row> rows() const;

 private:
  [[nodiscard]] static std::uint64_t key(GroupIdx g, ComponentIdx j, Quantity q) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(g.value)) << 32) |
           (static_cast<std::uint64_t>(static_cast<std::uint32_t>(j.value)) << 1) | static_cast<std::uint64_t>(q);
  }

  std::vector<ComponentPrior> priors_;
  std::unordered_map<std::uint64_t, Entry> entries_;
  int last_day_ = 0;
};

/// One realized leg tagged with both candidate experience groups.
struct GroupedExperience {
  GroupIdx traveler_group;
  GroupIdx od_group;
  RealizedLegExperience experience;
};

[[nodiscard]] inline GroupIdx experience_group(SharingMode mode, GroupIdx traveler_group, GroupIdx od_group) {
  return mode == SharingMode::Individual ? traveler_group : od_group;
}

/// Averages each group's weighted experiences per component and quantity,
/// then applies one update per (group, component, quantity). Days must be
/// collected in increasing order; repeating a day throws std::logic_error.
void collect_day(std::span<const GroupedExperience> experiences, ExperienceLedger& ledger, SharingMode sharing,
                 const CrowdingCurve& curve, int day);

}  // namespace fixflex
