#include <gtest/gtest.h>

#include <cmath>

#include "fixflex/core.hpp"
#include "fixflex/learning.hpp"

using namespace fixflex;

namespace {

const ComponentIdx kFix{0};
const ComponentIdx kFlex{1};
const GroupIdx kG{0};

ExperienceLedger toy_ledger() { return ExperienceLedger({{300.0, 1800.0}, {0.0, 1800.0}}); }

RealizedLegExperience wait_only(ComponentIdx j, Seconds nominal, Seconds denied = 0.0) {
  RealizedLegExperience e;
  e.component = j;
  e.nominal_wait = nominal;
  e.denied_wait = denied;
  return e;
}

}  // namespace

TEST(Anticipation, PriorsThenExperience) {
  ExperienceLedger l = toy_ledger();
  EXPECT_EQ(l.anticipate(kG, kFix, Quantity::Wait), 300.0);
  EXPECT_EQ(l.anticipate(kG, kFlex, Quantity::Wait), 0.0);
  for (Seconds x : {400.0, 412.0, 424.0}) l.msa_update(kG, kFix, Quantity::Wait, x);
  EXPECT_EQ(l.entry(kG, kFix, Quantity::Wait).n_exp, 3);
  EXPECT_DOUBLE_EQ(l.anticipate(kG, kFix, Quantity::Wait), 412.0);
  EXPECT_EQ(l.anticipate(GroupIdx{1}, kFix, Quantity::Wait), 300.0);
  EXPECT_THROW((void)l.anticipate(kG, ComponentIdx{7}, Quantity::Wait), ConfigError);
}

TEST(WeightedWait, Values) {
  const CrowdingCurve c;
  EXPECT_DOUBLE_EQ(weighted_wait(wait_only(kFix, 600, 0), c), 600.0);
  EXPECT_DOUBLE_EQ(weighted_wait(wait_only(kFix, 600, 600), c), 2700.0);
  EXPECT_DOUBLE_EQ(weighted_wait(wait_only(kFix, 0, 1800), c), 6300.0);
}

TEST(Crowding, Multipliers) {
  const CrowdingCurve c;
  EXPECT_NEAR(crowding_multiplier(0.4, true, c), 0.95, 1e-12);
  EXPECT_NEAR(crowding_multiplier(2.0, false, c), 2.69, 1e-12);
  EXPECT_NEAR(crowding_multiplier(1.25, true, c), 1.33, 1e-12);
  EXPECT_NEAR(crowding_multiplier(0.5, false, c), 1.78, 1e-12);
  EXPECT_NEAR(crowding_multiplier(3.0, true, c), 1.71, 1e-12);
}

TEST(Crowding, MonotoneAndBounded) {
  const CrowdingCurve c;
  double prev_s = 0.0;
  double prev_t = 0.0;
  for (double lf = 0.0; lf <= 3.0; lf += 0.01) {
    const double s = crowding_multiplier(lf, true, c);
    const double t = crowding_multiplier(lf, false, c);
    EXPECT_GE(s, prev_s);
    EXPECT_GE(t, prev_t);
    EXPECT_GE(s, 0.95);
    EXPECT_LE(s, 1.71);
    EXPECT_GE(t, 1.78);
    EXPECT_LE(t, 2.69);
    prev_s = s;
    prev_t = t;
  }
}

TEST(WeightedIvt, Values) {
  const CrowdingCurve c;
  RealizedLegExperience e;
  e.ivt = {{1800.0, 0.2, true}};
  // LF 0.2 seated is 0.95, so use an explicit unit curve for the plain sum
  CrowdingCurve unit;
  unit.seated = {0.0, 1.0, 1.0, 1.0};
  unit.standing = {0.0, 2.0, 1.0, 2.0};
  EXPECT_DOUBLE_EQ(weighted_ivt(e, unit), 1800.0);
  e.ivt = {{600.0, 0.3, true}, {300.0, 0.3, false}};
  EXPECT_DOUBLE_EQ(weighted_ivt(e, unit), 1200.0);
  e.ivt = {{1800.0, 10.0 / 5.0, true}};
  EXPECT_NEAR(weighted_ivt(e, c), 3078.0, 1e-9);
}

TEST(Msa, FirstDayThenRunningMean) {
  ExperienceLedger l = toy_ledger();
  EXPECT_DOUBLE_EQ(l.msa_update(kG, kFix, Quantity::Wait, 600.0).experience, 600.0);
  EXPECT_DOUBLE_EQ(l.msa_update(kG, kFix, Quantity::Wait, 580.0).experience, 590.0);
}

TEST(Msa, ConstantStreamIsFixedPoint) {
  ExperienceLedger l = toy_ledger();
  for (int d = 0; d < 100; ++d) EXPECT_DOUBLE_EQ(l.msa_update(kG, kFix, Quantity::Ivt, 1234.5).experience, 1234.5);
}

TEST(Msa, RunningMeanProperty) {
  RandomStream rng(123);
  for (int trial = 0; trial < 200; ++trial) {
    ExperienceLedger l = toy_ledger();
    double sum = 0.0;
    const int days = 1 + static_cast<int>(rng.uniform() * 200);
    for (int d = 1; d <= days; ++d) {
      const double x = rng.uniform() * 5000.0;
      sum += x;
      const auto e = l.msa_update(kG, kFlex, Quantity::Wait, x);
      const double mean = sum / d;
      ASSERT_LE(std::abs(e.experience - mean), 1e-9 * std::max(1.0, std::abs(mean)));
      ASSERT_EQ(e.n_exp, d);
    }
  }
}

TEST(CollectDay, GroupMeanIsOneUpdate) {
  ExperienceLedger l = toy_ledger();
  const std::vector<GroupedExperience> xs{{GroupIdx{0}, GroupIdx{5}, wait_only(kFix, 100)},
                                          {GroupIdx{1}, GroupIdx{5}, wait_only(kFix, 300)}};
  collect_day(xs, l, SharingMode::OdGroup, CrowdingCurve{}, 1);
  const auto e = l.entry(GroupIdx{5}, kFix, Quantity::Wait);
  EXPECT_EQ(e.n_exp, 1);
  EXPECT_DOUBLE_EQ(e.experience, 200.0);
}

TEST(CollectDay, IndividualSharingKeepsOwnMeans) {
  ExperienceLedger l = toy_ledger();
  const std::vector<GroupedExperience> xs{{GroupIdx{0}, GroupIdx{5}, wait_only(kFix, 100)},
                                          {GroupIdx{1}, GroupIdx{5}, wait_only(kFix, 300)}};
  collect_day(xs, l, SharingMode::Individual, CrowdingCurve{}, 1);
  EXPECT_DOUBLE_EQ(l.anticipate(GroupIdx{0}, kFix, Quantity::Wait), 100.0);
  EXPECT_DOUBLE_EQ(l.anticipate(GroupIdx{1}, kFix, Quantity::Wait), 300.0);
  EXPECT_EQ(l.entry(GroupIdx{5}, kFix, Quantity::Wait).n_exp, 0);
}

TEST(CollectDay, UnusedComponentUnchanged) {
  ExperienceLedger l = toy_ledger();
  l.msa_update(kG, kFlex, Quantity::Wait, 50.0);
  const std::vector<GroupedExperience> xs{{kG, kG, wait_only(kFix, 100)}};
  collect_day(xs, l, SharingMode::OdGroup, CrowdingCurve{}, 1);
  const auto e = l.entry(kG, kFlex, Quantity::Wait);
  EXPECT_EQ(e.n_exp, 1);
  EXPECT_DOUBLE_EQ(e.experience, 50.0);
}

TEST(CollectDay, CensoredWaitLearnsWaitOnly) {
  ExperienceLedger l = toy_ledger();
  RealizedLegExperience e = wait_only(kFlex, 900);
  e.boarded = false;
  const std::vector<GroupedExperience> xs{{kG, kG, e}};
  collect_day(xs, l, SharingMode::OdGroup, CrowdingCurve{}, 1);
  EXPECT_DOUBLE_EQ(l.anticipate(kG, kFlex, Quantity::Wait), 900.0);
  EXPECT_EQ(l.entry(kG, kFlex, Quantity::Ivt).n_exp, 0);
}

TEST(CollectDay, DaysMustIncrease) {
  ExperienceLedger l = toy_ledger();
  collect_day({}, l, SharingMode::OdGroup, CrowdingCurve{}, 1);
  EXPECT_THROW(collect_day({}, l, SharingMode::OdGroup, CrowdingCurve{}, 1), std::logic_error);
  collect_day({}, l, SharingMode::OdGroup, CrowdingCurve{}, 2);
}

TEST(Ledger, RowsAreOrdered) {
  ExperienceLedger l = toy_ledger();
  l.msa_update(GroupIdx{2}, kFix, Quantity::Ivt, 1.0);
  l.msa_update(GroupIdx{0}, kFlex, Quantity::Wait, 2.0);
  l.msa_update(GroupIdx{0}, kFix, Quantity::Ivt, 3.0);
  const auto rows = l.rows();
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].group, GroupIdx{0});
  EXPECT_EQ(rows[0].component, kFix);
  EXPECT_EQ(rows[1].component, kFlex);
  EXPECT_EQ(rows[2].group, GroupIdx{2});
  EXPECT_EQ(rows[2].quantity, Quantity::Ivt);
}
