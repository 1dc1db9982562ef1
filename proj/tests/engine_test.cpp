#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "fixtures.hpp"
#include "fixflex/engine.hpp"
#include "fixflex/kpi.hpp"

using namespace fixflex;
using namespace fixflex::testing;

TEST(EventQueue, OrdersByTimePhaseSequence) {
  EventQueue q;
  q.push(10.0, Phase::DispatchTick, EventKind::DispatchTick);
  q.push(10.0, Phase::VehicleArrival, EventKind::FixArrival, 1);
  q.push(5.0, Phase::DayEnd, EventKind::DayEnd);
  q.push(10.0, Phase::VehicleArrival, EventKind::FixArrival, 2);
  q.push(10.0, Phase::TravelerDecision, EventKind::TravelerContinues);
  std::vector<std::pair<EventKind, int>> got;
  while (!q.empty()) {
    const SimEvent e = q.pop();
    got.emplace_back(e.kind, e.subject);
  }
  const std::vector<std::pair<EventKind, int>> want{{EventKind::DayEnd, -1},
                                                    {EventKind::FixArrival, 1},
                                                    {EventKind::FixArrival, 2},
                                                    {EventKind::TravelerContinues, -1},
                                                    {EventKind::DispatchTick, -1}};
  EXPECT_EQ(got, want);
}

TEST(StateMachine, Edges) {
  using S = TravelerState;
  const std::vector<S> all{S::ArrivedAtStop, S::WaitingFix, S::WaitingFlex, S::OnBoard, S::Completed};
  const std::set<std::pair<S, S>> edges{{S::ArrivedAtStop, S::WaitingFix}, {S::ArrivedAtStop, S::WaitingFlex},
                                        {S::ArrivedAtStop, S::Completed},  {S::WaitingFix, S::OnBoard},
                                        {S::WaitingFlex, S::OnBoard},      {S::OnBoard, S::ArrivedAtStop}};
  for (S a : all)
    for (S b : all) EXPECT_EQ(transition_allowed(a, b), edges.count({a, b}) == 1) << to_string(a) << "->" << to_string(b);
}

namespace {

struct ToyRun {
  ScenarioConfig cfg;
  World world;
  explicit ToyRun(int at_a) : cfg(parse_scenario_text(toy_yaml(at_a))), world(build_world(cfg)) {}
  DayOutput day1(int rep = 0, std::uint64_t seed = 7) const {
    const ExperienceLedger ledger(world.priors);
    return run_day(world, ledger, seed, rep, 1, true);
  }
};

int count(const DaySummary& d, const std::string& cat, const std::string& type) {
  const auto c = d.by_category.find(cat);
  if (c == d.by_category.end()) return 0;
  const auto t = c->second.find(type);
  return t == c->second.end() ? 0 : t->second.travelers;
}

}  // namespace

TEST(Engine, ToyDayOneConservesTravelers) {
  const ToyRun toy(1);
  const DaySummary d = toy.day1().summary;
  EXPECT_EQ(d.injected, 100);
  EXPECT_EQ(d.completed + d.stranded, 100);
  EXPECT_EQ(d.stranded, 0);
  EXPECT_EQ(count(d, "ALL", "FIX") + count(d, "ALL", "FLEX"), 100);
  EXPECT_EQ(d.denied_travelers, 0);
  EXPECT_EQ(d.rebalancing_moves, 0);
}

TEST(Engine, ToyOverflowWaitsForVehiclesFromB) {
  const ToyRun toy(1);
  const DaySummary d = toy.day1().summary;
  const int flex = count(d, "ALL", "FLEX");
  ASSERT_GT(flex, 10);
  ASSERT_EQ(d.flex_first_leg_waits.size(), static_cast<std::size_t>(flex));
  std::vector<Seconds> w = d.flex_first_leg_waits;
  std::sort(w.begin(), w.end());
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(w[static_cast<std::size_t>(i)], 0.0, 1.0);
  for (std::size_t i = 10; i < w.size(); ++i) EXPECT_NEAR(w[i], 1800.0, 1.0);
}

TEST(Engine, FixRidersWaitUntilTheNextDeparture) {
  const ToyRun toy(1);
  const DayOutput out = toy.day1();
  const ComponentIdx fix = [&] {
    for (PathIdx p : toy.world.paths.alternatives(StopIdx{0}, StopIdx{1}))
      if (toy.world.paths.path(p).type() == "FIX") return toy.world.paths.path(p).legs[0].component;
    return ComponentIdx{};
  }();
  int n = 0;
  for (const GroupedExperience& g : out.experiences)
    if (g.experience.component == fix) {
      EXPECT_NEAR(g.experience.nominal_wait, 599.0, 1e-9);
      EXPECT_EQ(g.experience.denied_wait, 0.0);
      ++n;
    }
  EXPECT_EQ(n, count(out.summary, "ALL", "FIX"));
}

TEST(Engine, SameSeedSameDay) {
  const ToyRun toy(3);
  const DaySummary a = toy.day1(0, 11).summary;
  const DaySummary b = toy.day1(0, 11).summary;
  EXPECT_EQ(count(a, "ALL", "FLEX"), count(b, "ALL", "FLEX"));
  EXPECT_EQ(a.flex.vkt, b.flex.vkt);
  EXPECT_EQ(a.flex_first_leg_waits, b.flex_first_leg_waits);
}

TEST(Engine, ReplicationsDrawDifferently) {
  const ScenarioConfig cfg = parse_scenario(scenario_path("branched.yaml"));
  const World world = build_world(cfg);
  const ExperienceLedger ledger(world.priors);
  const DaySummary r0 = run_day(world, ledger, 1, 0, 1, false).summary;
  const DaySummary r1 = run_day(world, ledger, 1, 1, 1, false).summary;
  EXPECT_NE(r0.injected, r1.injected);
  EXPECT_EQ(r0.injected, r0.completed + r0.stranded);
}

TEST(Engine, ZeroDemandDay) {
  ScenarioConfig cfg = parse_scenario_text(toy_yaml(1));
  cfg.demand.cohorts[0].size = 0;
  const World world = build_world(cfg);
  const ExperienceLedger ledger(world.priors);
  const DayOutput out = run_day(world, ledger, 3, 0, 1, true);
  EXPECT_EQ(out.summary.injected, 0);
  EXPECT_TRUE(out.experiences.empty());
  EXPECT_GT(out.summary.fix.vkt, 0.0);
  EXPECT_EQ(out.summary.fix.pkt, 0.0);
  EXPECT_EQ(out.summary.flex.vkt, 0.0);
  const KpiRecord k = compute_kpis(out.summary);
  EXPECT_TRUE(k.flex.zero_vkt());
  EXPECT_EQ(k.fix.ratio, 0.0);
}

TEST(Engine, CensoredWaitsFollowConfig) {
  for (const bool learn : {false, true}) {
    ScenarioConfig cfg = parse_scenario_text(toy_yaml(1));
    cfg.run.drain = 0.0;
    cfg.demand.window = 300.0;
    cfg.behavior.learn_censored_waits = learn;
    const World world = build_world(cfg);
    const ExperienceLedger ledger(world.priors);
    const DayOutput out = run_day(world, ledger, 7, 0, 1, true);
    ASSERT_GT(out.summary.stranded, 0);
    int censored = 0;
    for (const GroupedExperience& g : out.experiences)
      if (!g.experience.boarded) {
        ++censored;
        EXPECT_GT(g.experience.nominal_wait + g.experience.denied_wait, 0.0);
      }
    if (learn) EXPECT_GT(censored, 0);
    else EXPECT_EQ(censored, 0);
  }
}

TEST(Engine, RunScenarioShape) {
  const ToyRun toy(5);
  RunOptions opt;
  opt.days = 1;
  opt.replications = 1;
  const ScenarioResult one = run_scenario(toy.world, opt);
  ASSERT_EQ(one.replications.size(), 1u);
  EXPECT_EQ(one.replications[0].days.size(), 1u);

  opt.days = 4;
  opt.replications = 3;
  opt.parallel = 2;
  opt.check_invariants = true;
  opt.ledger_snapshots = true;
  const ScenarioResult par = run_scenario(toy.world, opt);
  opt.parallel = 1;
  const ScenarioResult seq = run_scenario(toy.world, opt);
  ASSERT_EQ(par.replications.size(), 3u);
  for (std::size_t r = 0; r < 3; ++r) {
    ASSERT_EQ(par.replications[r].days.size(), 4u);
    EXPECT_FALSE(par.replications[r].ledger_rows.empty());
    for (std::size_t d = 0; d < 4; ++d) {
      EXPECT_EQ(par.replications[r].days[d].day, static_cast<int>(d) + 1);
      EXPECT_EQ(par.replications[r].days[d].replication, static_cast<int>(r));
      EXPECT_EQ(count(par.replications[r].days[d], "ALL", "FLEX"), count(seq.replications[r].days[d], "ALL", "FLEX"));
    }
  }
}

TEST(Engine, LearningMovesTowardFixWhenFlexIsScarce) {
  const ToyRun toy(1);
  RunOptions opt;
  opt.days = 20;
  opt.replications = 4;
  const ScenarioResult res = run_scenario(toy.world, opt);
  EXPECT_GT(mean_share(res, "ALL", "FLEX", 1, 1), 0.6);
  EXPECT_LT(mean_share(res, "ALL", "FLEX", 15, 20), 0.4);
}

TEST(World, PriorsFollowHeadwayAndFreeFlow) {
  const ToyRun toy(1);
  for (PathIdx p : toy.world.paths.alternatives(StopIdx{0}, StopIdx{1})) {
    const PathAlternative& path = toy.world.paths.path(p);
    const ComponentPrior prior = toy.world.priors.at(path.legs[0].component.get());
    EXPECT_DOUBLE_EQ(prior.ivt, 1800.0);
    EXPECT_DOUBLE_EQ(prior.wait, path.type() == "FIX" ? 300.0 : 0.0);
  }
  EXPECT_EQ(toy.world.od_index(StopIdx{0}, StopIdx{1}), 0);
  EXPECT_EQ(toy.world.od_index(StopIdx{1}, StopIdx{0}), -1);
}
