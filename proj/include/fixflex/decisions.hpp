#pragma once

#include <span>
#include <vector>

#include "fixflex/core.hpp"
#include "fixflex/learning.hpp"
#include "fixflex/network.hpp"
#include "fixflex/paths.hpp"

namespace fixflex {

/// Utility weights; time weights are per second, transfer per transfer.
struct ModeWeights {
  double wait = 0.0;
  double ivt = 0.0;
  double walk = 0.0;
  double transfer = 0.0;
};

struct ValueOfTime {
  ModeWeights fix;
  ModeWeights flex;

  [[nodiscard]] const ModeWeights& of(Mode m) const { return m == Mode::Fix ? fix : flex; }

  /// wait = 2 * ivt, walk = ivt, transfer = transfer_ivt_seconds * ivt, both modes.
  static ValueOfTime from_ivt(double beta_ivt, Seconds transfer_ivt_seconds);
};

/// Everything a traveler consults to value a path.
struct UtilityContext {
  const GlobalPathSet& paths;
  const Network& net;
  const ExperienceLedger& ledger;
  const ValueOfTime& vot;
  const WalkModel& walk;
  GroupIdx group;
};

/// Anticipated utility of the remaining legs of `path` starting at leg
/// `from_leg`, for a traveler currently at `location`. With skip_first_wait
/// the first remaining leg's wait is left out (the traveler is already
/// boarding or riding it).
[[nodiscard]] double path_utility(const PathAlternative& path, std::size_t from_leg, StopIdx location,
                                  bool skip_first_wait, const UtilityContext& ctx);

[[nodiscard]] double path_utility(ActivePath a, StopIdx location, bool skip_first_wait, const UtilityContext& ctx);

/// ln(sum(exp(v))) with max shift. Requires a non-empty input.
[[nodiscard]] double action_logsum(std::span<const double> utilities);

/// Logsum of a path set's utilities.
[[nodiscard]] double set_logsum(std::span<const ActivePath> set, StopIdx location, bool skip_first_wait,
                                const UtilityContext& ctx);

[[nodiscard]] std::vector<double> mnl_probabilities(std::span<const double> utilities);

/// Inverse-CDF draw.
[[nodiscard]] std::size_t sample_choice(std::span<const double> probabilities, RandomStream& rng);

/// Softmax choice among action utilities; a lone action is taken without a draw.
[[nodiscard]] std::size_t choose_action(std::span<const double> utilities, RandomStream& rng);

}  // namespace fixflex
