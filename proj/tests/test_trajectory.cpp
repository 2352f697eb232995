#include <gtest/gtest.h>

#include "plancritic/parser.hpp"
#include "plancritic/render.hpp"
#include "plancritic/trajectory.hpp"
#include "testing.hpp"

namespace plancritic {
namespace {

using testing::naval_pack;

const DomainModel& naval() { return naval_pack().domain; }
const ProblemModel& mini() { return naval_pack().problem("mini"); }

Plan baseline() { return parse_plan(testing::read_file(testing::fixture("mini_baseline.plan")), naval()); }

// Trajectory over one atom p; `bits[i]` is its truth at snapshot i, time i.
StateTrajectory unit_trajectory(const std::vector<int>& bits) {
  StateTrajectory t;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    Snapshot s{Rational(static_cast<std::int64_t>(i)), {}};
    if (bits[i] & 1) s.state.insert(Atom{"p", {}});
    if (bits[i] & 2) s.state.insert(Atom{"q", {}});
    t.snapshots.push_back(std::move(s));
  }
  return t;
}

TrajectoryConstraint c1(Modality m, std::vector<Rational> d = {}) {
  return {m, {Condition::make_atom("p", {})}, std::move(d)};
}

TrajectoryConstraint c2(Modality m) {
  return {m, {Condition::make_atom("p", {}), Condition::make_atom("q", {})}, {}};
}

TEST(Simulate, EmptyPlanIsInitialState) {
  auto t = simulate(naval(), mini(), Plan{});
  ASSERT_EQ(t.snapshots.size(), 1u);
  EXPECT_EQ(t.snapshots[0].time, Rational(0));
  EXPECT_EQ(t.snapshots[0].state, State(mini().init.begin(), mini().init.end()));
}

TEST(Simulate, MoveUpdatesLocation) {
  auto plan = parse_plan("0.000: (move sct_ast_0 wpt_ini wpt_mid) [1.000]", naval());
  auto t = simulate(naval(), mini(), plan);
  ASSERT_EQ(t.snapshots.size(), 2u);
  EXPECT_EQ(t.snapshots[1].time, Rational(1));
  EXPECT_TRUE(t.snapshots[1].state.count(Atom{"at", {"sct_ast_0", "wpt_mid"}}));
  EXPECT_FALSE(t.snapshots[1].state.count(Atom{"at", {"sct_ast_0", "wpt_ini"}}));
  EXPECT_EQ(t.snapshots[1].state.size(), t.snapshots[0].state.size());
}

TEST(Simulate, InapplicableStepIsReportedWithIndex) {
  auto plan = parse_plan(
      "0: (move sct_ast_0 wpt_ini wpt_mid) [1]\n"
      "1: (move sct_ast_0 wpt_mid wpt_end) [1]\n",
      naval());
  try {
    simulate(naval(), mini(), plan);
    FAIL() << "expected InapplicableAction";
  } catch (const InapplicableAction& e) {
    EXPECT_EQ(e.step_index(), 1u);
    EXPECT_NE(e.failed_precondition().find("blocked"), std::string::npos);
  }
}

TEST(Simulate, UnknownObjectIsReported) {
  auto plan = parse_plan("0: (move sct_ast_9 wpt_ini wpt_mid) [1]", naval());
  EXPECT_THROW(simulate(naval(), mini(), plan), UnknownObject);
}

TEST(Simulate, SnapshotTimesFollowStartPlusDuration) {
  auto plan = parse_plan("0.5: (move sct_ast_0 wpt_ini wpt_mid) [2.25]", naval());
  auto t = simulate(naval(), mini(), plan);
  EXPECT_EQ(t.snapshots[1].time, Rational(11, 4));
}

TEST(Simulate, BaselineReachesGoal) {
  auto report = validate(naval(), mini(), baseline(), {});
  EXPECT_TRUE(report.goal_satisfied);
  EXPECT_DOUBLE_EQ(report.adherence_rate, 1.0);
}

TEST(Check, AtMostOnceWithOneTrailingInterval) {
  const auto& harbor = naval_pack().problem("harbor");
  auto c = testing::constraint("(at-most-once (at sct_ast_0 wpt_end))", harbor);
  auto plan = parse_plan(
      "0: (move sct_ast_0 deb_stn_0 wpt_end) [1]\n"
      "1: (move deb_ast_0 deb_stn_0 wpt_a_0) [1]\n",
      naval());
  auto t = simulate(naval(), harbor, plan);
  EXPECT_TRUE(check_constraint(c, t));
  auto back = parse_plan(
      "0: (move sct_ast_0 deb_stn_0 wpt_end) [1]\n"
      "1: (move sct_ast_0 wpt_end deb_stn_0) [1]\n"
      "2: (move sct_ast_0 deb_stn_0 wpt_end) [1]\n",
      naval());
  EXPECT_FALSE(check_constraint(c, simulate(naval(), harbor, back)));
}

TEST(Check, SometimeBeforeIsVacuousWithoutTrigger) {
  EXPECT_TRUE(check_constraint(c2(Modality::kSometimeBefore), unit_trajectory({0, 2, 0})));
  EXPECT_FALSE(check_constraint(c2(Modality::kSometimeBefore), unit_trajectory({1})));
  // The precondition must come strictly earlier.
  EXPECT_FALSE(check_constraint(c2(Modality::kSometimeBefore), unit_trajectory({0, 3})));
  EXPECT_TRUE(check_constraint(c2(Modality::kSometimeBefore), unit_trajectory({2, 1})));
}

TEST(Check, SometimeAfterAllowsSameSnapshot) {
  EXPECT_TRUE(check_constraint(c2(Modality::kSometimeAfter), unit_trajectory({3})));
  EXPECT_TRUE(check_constraint(c2(Modality::kSometimeAfter), unit_trajectory({1, 0, 2})));
  EXPECT_FALSE(check_constraint(c2(Modality::kSometimeAfter), unit_trajectory({2, 1, 0})));
}

TEST(Check, WithinComparesAgainstSnapshotTime) {
  auto t = unit_trajectory({0, 0, 1});
  EXPECT_FALSE(check_constraint(c1(Modality::kWithin, {1}), t));
  EXPECT_TRUE(check_constraint(c1(Modality::kWithin, {2}), t));
}

TEST(Check, HoldDuringIsHalfOpen) {
  auto t = unit_trajectory({0, 1, 1, 0});
  EXPECT_TRUE(check_constraint(c1(Modality::kHoldDuring, {1, 3}), t));
  EXPECT_FALSE(check_constraint(c1(Modality::kHoldDuring, {1, 4}), t));
  EXPECT_FALSE(check_constraint(c1(Modality::kHoldDuring, {0, 2}), t));
}

TEST(Check, HoldAfterIsStrict) {
  auto t = unit_trajectory({0, 0, 1, 1});
  EXPECT_TRUE(check_constraint(c1(Modality::kHoldAfter, {1}), t));
  EXPECT_FALSE(check_constraint(c1(Modality::kHoldAfter, {0}), t));
}

TEST(Check, AlwaysWithinReadings) {
  auto t = unit_trajectory({1, 0, 0, 1, 0});
  // The last snapshot opens an obligation nothing discharges.
  EXPECT_FALSE(check_constraint(c1(Modality::kAlwaysWithin, {2}), t));
  auto u = unit_trajectory({1, 0, 0, 1});
  EXPECT_TRUE(check_constraint(c1(Modality::kAlwaysWithin, {2}), u));
  EXPECT_FALSE(check_constraint(c1(Modality::kAlwaysWithin, {1}), u));
  Semantics plain{AlwaysWithinReading::kPlainWithin};
  EXPECT_TRUE(check_constraint(c1(Modality::kAlwaysWithin, {0}), t, plain));
}

TEST(Check, AtEndLooksAtLastSnapshot) {
  EXPECT_TRUE(check_constraint(c1(Modality::kAtEnd), unit_trajectory({0, 1})));
  EXPECT_FALSE(check_constraint(c1(Modality::kAtEnd), unit_trajectory({1, 0})));
}

TEST(Check, AlwaysIsDualOfSometimeNot) {
  TrajectoryConstraint not_p{Modality::kSometime, {Condition::make_not(Condition::make_atom("p", {}))}, {}};
  for (int mask = 0; mask < 16; ++mask) {
    std::vector<int> bits;
    for (int i = 0; i < 4; ++i) bits.push_back((mask >> i) & 1);
    auto t = unit_trajectory(bits);
    EXPECT_EQ(check_constraint(c1(Modality::kAlways), t), !check_constraint(not_p, t));
    if (check_constraint(c1(Modality::kAlways), t)) EXPECT_TRUE(check_constraint(c1(Modality::kSometime), t));
  }
}

TEST(Validate, BothConstraintsHold) {
  auto spec = testing::spec("(and (sometime (at shp_0 wpt_end)) (at end (at deb_ast_0 wpt_mid)))", mini());
  auto r = validate(naval(), mini(), baseline(), spec);
  EXPECT_DOUBLE_EQ(r.adherence_rate, 1.0);
  EXPECT_TRUE(r.valid());
}

TEST(Validate, OneOfFourHolds) {
  auto spec = testing::spec(
      "(and (sometime (at shp_0 wpt_end)) (always (at shp_0 wpt_ini)) (at end (at sct_ast_0 wpt_end))"
      " (within 1 (at shp_0 wpt_end)))",
      mini());
  auto r = validate(naval(), mini(), baseline(), spec);
  EXPECT_DOUBLE_EQ(r.adherence_rate, 0.25);
  EXPECT_EQ(r.satisfied_count(), 1u);
  EXPECT_TRUE(r.goal_satisfied);
  EXPECT_FALSE(r.valid());
}

TEST(Validate, ReportFormat) {
  auto spec = testing::spec("(and (sometime (at shp_0 wpt_end)) (always (at shp_0 wpt_ini)))", mini());
  auto text = format_report(validate(naval(), mini(), baseline(), spec));
  EXPECT_EQ(text,
            "0\t(sometime (at shp_0 wpt_end))\ttrue\n"
            "1\t(always (at shp_0 wpt_ini))\tfalse\n"
            "goal_satisfied\ttrue\n"
            "adherence_rate\t0.500000\n");
}

TEST(Validate, ArchetypeGroundTruthHoldsOnKnownGoodPlans) {
  for (const auto* pack : {&testing::naval_pack(), &testing::satellite_pack()}) {
    for (const auto& a : pack->archetypes) {
      auto path = testing::fixture("archetype_plans/" + pack->name + "_" + a.id + ".plan");
      auto plan = parse_plan(testing::read_file(path), pack->domain);
      ASSERT_FALSE(plan.empty()) << path;
      auto r = validate(pack->domain, pack->problem(a.problem_id), plan, a.ground_truth);
      EXPECT_TRUE(r.valid()) << a.id << "\n" << format_report(r);
    }
  }
}

}  // namespace
}  // namespace plancritic
