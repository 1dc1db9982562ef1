#include <gtest/gtest.h>

#include <set>

#include "fixtures.hpp"
#include "random_networks.hpp"
#include "fixflex/engine.hpp"
#include "fixflex/paths.hpp"

using namespace fixflex;
using namespace fixflex::testing;

TEST(ModeOfLeg, Cases) {
  const std::vector<ServiceRef> one{ServiceRef::fix(LineIdx{0})};
  EXPECT_EQ(mode_of_leg(one), Mode::Fix);
  const std::vector<ServiceRef> flex{ServiceRef::flex()};
  EXPECT_EQ(mode_of_leg(flex), Mode::Flex);
  const std::vector<ServiceRef> merged{ServiceRef::fix(LineIdx{0}), ServiceRef::fix(LineIdx{1})};
  EXPECT_EQ(mode_of_leg(merged), Mode::Fix);
  const std::vector<ServiceRef> mixed{ServiceRef::fix(LineIdx{0}), ServiceRef::flex()};
  EXPECT_THROW((void)mode_of_leg(mixed), std::invalid_argument);
  EXPECT_THROW((void)mode_of_leg(std::span<const ServiceRef>{}), std::invalid_argument);
}

TEST(ChoiceSet, ToyHasFixAndFlexDirect) {
  const ScenarioConfig cfg = parse_scenario_text(toy_yaml(1));
  const World world = build_world(cfg);
  const StopIdx a = *cfg.network.find_stop("A");
  const StopIdx b = *cfg.network.find_stop("B");
  const auto alts = world.paths.alternatives(a, b);
  ASSERT_EQ(alts.size(), 2u);
  std::multiset<std::string> types;
  for (PathIdx p : alts) {
    types.insert(world.paths.path(p).type());
    EXPECT_EQ(world.paths.path(p).transfers(), 0);
    EXPECT_TRUE(check_path(world.paths.path(p), cfg.network, cfg.filters).empty());
  }
  EXPECT_EQ(types, (std::multiset<std::string>{"FIX", "FLEX"}));

  const PathSet init = world.paths.initial_set(a, b);
  const auto conn = connection_sets(world.paths, init);
  ASSERT_EQ(conn.size(), 1u);
  EXPECT_EQ(conn.begin()->first, a);
  EXPECT_EQ(conn.begin()->second.size(), 2u);
  const auto modes = mode_sets(world.paths, conn.begin()->second);
  ASSERT_EQ(modes.size(), 2u);
  EXPECT_EQ(modes.at(Mode::Fix).size(), 1u);
  EXPECT_EQ(modes.at(Mode::Flex).size(), 1u);
  const auto drops = dropoff_sets(world.paths, modes.at(Mode::Flex));
  ASSERT_EQ(drops.size(), 1u);
  EXPECT_EQ(drops.begin()->first, b);
}

class Branched : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    cfg_ = new ScenarioConfig(parse_scenario(scenario_path("branched.yaml")));
    world_ = new World(build_world(*cfg_));
  }
  static void TearDownTestSuite() {
    delete world_;
    delete cfg_;
  }
  static StopIdx s(const char* id) { return *cfg_->network.find_stop(id); }
  static std::set<std::string> types(const char* o, const char* d) {
    std::set<std::string> out;
    for (PathIdx p : world_->paths.alternatives(s(o), s(d))) out.insert(world_->paths.path(p).type());
    return out;
  }
  static inline ScenarioConfig* cfg_ = nullptr;
  static inline World* world_ = nullptr;
};

TEST_F(Branched, TypesFollowAllowList) {
  EXPECT_EQ(types("R4", "R1"), (std::set<std::string>{"FIX", "FLEX"}));
  EXPECT_EQ(types("R3", "C5"), (std::set<std::string>{"FIX", "FLEX-FIX"}));
  EXPECT_EQ(types("C5", "B3"), (std::set<std::string>{"FIX", "FIX-FLEX"}));
  EXPECT_EQ(types("C2", "C9"), (std::set<std::string>{"FIX"}));
}

TEST_F(Branched, EveryPathPassesChecks) {
  for (const PathAlternative& p : world_->paths.paths())
    EXPECT_TRUE(check_path(p, cfg_->network, cfg_->filters).empty()) << describe(p, cfg_->network, cfg_->lines);
}

TEST_F(Branched, FlexFixTransfersOnlyAtJunction) {
  const auto set = world_->paths.initial_set(s("R3"), s("C5"));
  const auto modes = mode_sets(world_->paths, connection_sets(world_->paths, set).at(s("R3")));
  const auto drops = dropoff_sets(world_->paths, modes.at(Mode::Flex));
  ASSERT_EQ(drops.size(), 1u);
  EXPECT_EQ(drops.begin()->first, s("C1"));
}

TEST_F(Branched, AlightingChoiceForCorridorToBranch) {
  const auto set = world_->paths.initial_set(s("C5"), s("B3"));
  const auto at_c5 = connection_sets(world_->paths, set).at(s("C5"));
  const auto fix = mode_sets(world_->paths, at_c5).at(Mode::Fix);
  // line 177 westbound serves both the direct and the FIX-FLEX path
  const LineIdx l177w{3};
  ASSERT_EQ(cfg_->lines[3].id, "177W");
  const auto [board, stay] = board_stay_partition(world_->paths, fix, l177w);
  const auto alight = alight_sets(world_->paths, board);
  EXPECT_TRUE(alight.count(s("C1")));
  EXPECT_TRUE(alight.count(s("B3")));
}

TEST(ChoiceSet, MaxTransfersZeroLeavesOdEmpty) {
  Network net;
  const auto s = chain(net, {"A", "B", "C"}, 300.0);
  std::vector<FixLine> lines{make_line(net, "AB", {s[0], s[1]}, 600.0), make_line(net, "BC", {s[1], s[2]}, 600.0)};
  ChoiceSetFilters f;
  f.max_transfers = 0;
  const std::vector<std::pair<StopIdx, StopIdx>> ods{{s[0], s[2]}};
  try {
    (void)generate_choice_sets(net, lines, RouteTable{}, f, ods);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    ASSERT_EQ(e.violations().size(), 1u);
    EXPECT_NE(e.violations()[0].find("A -> C"), std::string::npos);
  }
  f.max_transfers = 1;
  const auto g = generate_choice_sets(net, lines, RouteTable{}, f, ods);
  ASSERT_EQ(g.alternatives(s[0], s[2]).size(), 1u);
  EXPECT_EQ(g.path(g.alternatives(s[0], s[2])[0]).type(), "FIX-FIX");
}

TEST(ChoiceSet, CommonLinesMergeIntoOneLeg) {
  Network net;
  const auto s = chain(net, {"A", "B", "C"}, 300.0);
  std::vector<FixLine> lines{make_line(net, "176", s, 1800.0), make_line(net, "177", s, 1800.0)};
  ChoiceSetFilters f;
  const std::vector<std::pair<StopIdx, StopIdx>> ods{{s[0], s[2]}};
  const auto g = generate_choice_sets(net, lines, RouteTable{}, f, ods);
  ASSERT_EQ(g.alternatives(s[0], s[2]).size(), 1u);
  const Leg& leg = g.path(g.alternatives(s[0], s[2])[0]).legs.at(0);
  EXPECT_EQ(leg.services.size(), 2u);
  EXPECT_EQ(mode_of_leg(leg.services), Mode::Fix);
  const PathSet set = g.initial_set(s[0], s[2]);
  EXPECT_EQ(board_stay_partition(g, set, LineIdx{1}).first.size(), 1u);
  EXPECT_TRUE(board_stay_partition(g, set, LineIdx{7}).first.empty());
}

TEST(ChoiceSet, NoConsecutiveFlexLegs) {
  Network net;
  const auto s = chain(net, {"A", "B", "C"}, 300.0);
  ChoiceSetFilters f;
  f.max_transfers = 2;
  const std::vector<std::pair<StopIdx, StopIdx>> ods{{s[0], s[2]}};
  const auto g = generate_choice_sets(net, {}, RouteTable(net, s), f, ods);
  for (const PathAlternative& p : g.paths()) {
    EXPECT_EQ(p.type(), "FLEX");
    EXPECT_TRUE(check_path(p, net, f).empty());
  }
}

TEST(Partitions, MatchBruteForce) {
  RandomStream rng(31);
  PartitionReport report;
  for (int trial = 0; trial < 150; ++trial) {
    const auto w = random_world(rng);
    check_partitions(*w, rng, report);
    ChoiceSetFilters f;
    f.max_transfers = 10;
    for (const PathAlternative& p : w->g.paths())
      EXPECT_TRUE(check_path(p, w->net, f).empty()) << describe(p, w->net, w->lines);
  }
  EXPECT_TRUE(report.mismatches.empty()) << report.mismatches.front();
  EXPECT_GT(report.sets_checked, 500);
}

TEST(Partitions, MultiStopComponentLandsInEveryCell) {
  GlobalPathSet g;
  PathAlternative p;
  p.origin = StopIdx{0};
  p.destination = StopIdx{3};
  Leg leg;
  leg.board = {StopIdx{0}, StopIdx{1}};
  leg.services = {ServiceRef::fix(LineIdx{0})};
  leg.alight = {StopIdx{2}, StopIdx{3}};
  p.legs = {leg};
  p.walks = {0.0, 0.0};
  const PathIdx id = g.add(p);
  const PathSet set{ActivePath{id, 0}};
  EXPECT_EQ(connection_sets(g, set).size(), 2u);
  EXPECT_EQ(alight_sets(g, set).size(), 2u);
  EXPECT_TRUE(connection_sets(g, PathSet{ActivePath{id, 1}}).empty());
}

TEST(Category, FromTags) {
  Network net;
  const StopIdx c = stop(net, "C", "corridor");
  const StopIdx b = stop(net, "B", "branch");
  const StopIdx x = stop(net, "X");
  EXPECT_EQ(od_category(net, c, b), "C2B");
  EXPECT_EQ(od_category(net, b, c), "B2C");
  EXPECT_EQ(od_category(net, c, x), "ALL");
}
