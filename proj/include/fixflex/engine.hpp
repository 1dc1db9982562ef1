#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <string>
#include <vector>

#include "fixflex/core.hpp"
#include "fixflex/flex_service.hpp"
#include "fixflex/learning.hpp"
#include "fixflex/paths.hpp"
#include "fixflex/scenario.hpp"

namespace fixflex {

/// Ordering of simultaneous events.
enum class Phase : std::uint8_t { VehicleArrival = 0, TravelerDecision = 1, DispatchTick = 2, RebalanceTick = 3, DayEnd = 4 };

enum class EventKind : std::uint8_t {
  FixArrival,
  FlexArrival,
  FlexDepart,
  FlexRepositioned,
  TripStart,
  TravelerReachesStop,
  TravelerContinues,
  DispatchTick,
  RebalanceTick,
  DayEnd,
};

struct SimEvent {
  Seconds time = 0.0;
  Phase phase = Phase::TravelerDecision;
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::DayEnd;
  std::int32_t subject = -1;
};

/// Min-queue on (time, phase, sequence); the sequence is assigned on push.
class EventQueue {
 public:
  void push(Seconds time, Phase phase, EventKind kind, std::int32_t subject = -1);
  SimEvent pop();
  [[nodiscard]] const SimEvent& top() const { return heap_.top(); }
  [[nodiscard]] bool empty() const { return heap_.empty(); }
  [[nodiscard]] std::size_t size() const { return heap_.size(); }

 private:
  struct Later {
    bool operator()(const SimEvent& a, const SimEvent& b) const {
      if (a.time != b.time) return a.time > b.time;
      if (a.phase != b.phase) return a.phase > b.phase;
      return a.sequence > b.sequence;
    }
  };
  std::priority_queue<SimEvent, std::vector<SimEvent>, Later> heap_;
  std::uint64_t next_ = 0;
};

enum class TravelerState : std::uint8_t { ArrivedAtStop, WaitingFix, WaitingFlex, OnBoard, Completed };

[[nodiscard]] const char* to_string(TravelerState s);
/// Whether `from -> to` is an edge of the traveler state machine.
[[nodiscard]] bool transition_allowed(TravelerState from, TravelerState to);

/// Immutable inputs shared by every replication of a scenario.
struct World {
  const ScenarioConfig* config = nullptr;
  RouteTable flex_routes;
  GlobalPathSet paths;
  std::vector<ComponentPrior> priors;
  std::vector<std::pair<StopIdx, StopIdx>> ods;
  std::vector<std::string> od_categories;
  /// Categories in first-seen order and the path types each may use.
  std::vector<std::string> categories;
  std::map<std::string, std::vector<std::string>> category_types;

  [[nodiscard]] int od_index(StopIdx o, StopIdx d) const;
};

/// Builds route tables, choice sets and priors. Throws ConfigError on empty choice sets.
[[nodiscard]] World build_world(const ScenarioConfig& cfg);

/// Priors: fixed-line wait is half the combined headway of the component's
/// lines, in-vehicle time the free-flow leg time; on-demand wait is zero.
[[nodiscard]] std::vector<ComponentPrior> component_priors(const GlobalPathSet& paths, std::span<const FixLine> lines);

/// Travelers counts everyone assigned the type, finished or not; the sums
/// cover completed travelers only.
struct TypeStats {
  int travelers = 0;
  int completed = 0;
  std::array<double, 2> anticipated{};
  std::array<double, 2> experienced{};
};

struct ModeKpis {
  double pkt = 0.0;  // passenger-meters
  double vkt = 0.0;  // vehicle-meters
  int seats = 0;
};

struct DaySummary {
  int day = 0;
  int replication = 0;
  /// category -> path type -> sums over travelers. Unfinished travelers count
  /// under the type they committed to, or "INCOMPLETE" if still undecided.
  std::map<std::string, std::map<std::string, TypeStats>> by_category;
  ModeKpis fix;
  ModeKpis flex;
  int denied_travelers = 0;
  int injected = 0;
  int completed = 0;
  int stranded = 0;
  int rebalancing_moves = 0;
  /// FLEX riders on the first leg whose nominal wait was recorded, by value.
  std::vector<Seconds> flex_first_leg_waits;
};

struct DayOutput {
  DaySummary summary;
  std::vector<GroupedExperience> experiences;
};

struct LedgerRow {
  int day = 0;
  GroupIdx group;
  ComponentIdx component;
  Quantity quantity = Quantity::Wait;
  Seconds prior = 0.0;
  Seconds experience = 0.0;
  int n_exp = 0;
};

/// Simulates one day of one replication against the ledger's current state.
[[nodiscard]] DayOutput run_day(const World& world, const ExperienceLedger& ledger, std::uint64_t seed,
                                int replication, int day, bool check_invariants);

struct RunOptions {
  int days = 1;
  int replications = 1;
  std::uint64_t seed = 1;
  int parallel = 1;
  bool check_invariants = false;
  bool ledger_snapshots = false;
  /// Called after each finished day (replication, day); may be invoked from worker threads.
  std::function<void(int, int)> progress;
};

struct ReplicationResult {
  std::vector<DaySummary> days;
  std::vector<LedgerRow> ledger_rows;
};

struct ScenarioResult {
  std::vector<ReplicationResult> replications;
};

/// Runs every replication (in parallel when asked) with fresh ledgers and
/// day-to-day learning between days.
[[nodiscard]] ScenarioResult run_scenario(const World& world, const RunOptions& options);

}  // namespace fixflex
