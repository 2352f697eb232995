#include <gtest/gtest.h>

#include <json.hpp>

#include "plancritic/engine.hpp"
#include "plancritic/render.hpp"
#include "plancritic/trajectory.hpp"
#include "testing.hpp"

namespace plancritic {
namespace {

using testing::naval_pack;

const char* kScoutOnce = "Make sure the scout asset only visits the endpoint once";

EngineConfig exact_config() {
  EngineConfig c;
  c.ga.seed = 7;
  return c;
}

TEST(Kinds, NamesRoundTrip) {
  for (auto k : {PlannerKind::kBuiltin, PlannerKind::kExternal})
    EXPECT_EQ(parse_planner_kind(planner_kind_name(k)), k);
  for (auto k : {OracleKind::kExact, OracleKind::kNoisy, OracleKind::kRemote})
    EXPECT_EQ(parse_oracle_kind(oracle_kind_name(k)), k);
  for (auto k : {TranslatorKind::kTemplate, TranslatorKind::kRemote, TranslatorKind::kReplay})
    EXPECT_EQ(parse_translator_kind(translator_kind_name(k)), k);
  EXPECT_THROW(parse_oracle_kind("psychic"), std::invalid_argument);
}

TEST(GroundTruth, LookupByRephrasingAndProblem) {
  const auto& pack = naval_pack();
  auto gt = lookup_ground_truth(pack, pack.problem("fig5"), "make sure the SCOUT asset only visits the endpoint once!");
  ASSERT_TRUE(gt.has_value());
  EXPECT_EQ(render_specification(*gt), "(:constraints (at-most-once (at sct_ast_0 wpt_end)))");
  EXPECT_TRUE(lookup_ground_truth(pack, pack.problem("harbor"), "Open up the passage at waypoint b").has_value());
  EXPECT_FALSE(lookup_ground_truth(pack, pack.problem("fig5"), "sing a song").has_value());
}

TEST(Session, OpensWithBaselinePlan) {
  auto s = open_session(naval_pack(), "mini", exact_config(), "s1");
  EXPECT_EQ(s.id, "s1");
  EXPECT_EQ(s.status, SessionStatus::kIdle);
  EXPECT_EQ(s.plan, parse_plan(testing::read_file(testing::fixture("mini_baseline.plan")), s.domain));
  EXPECT_THROW(open_session(naval_pack(), "nowhere", exact_config()), PackError);
}

TEST(Refine, ScoutVisitsEndpointOnce) {
  auto config = exact_config();
  auto s = open_session(naval_pack(), "fig5", config);
  auto once = testing::constraint("(at-most-once (at sct_ast_0 wpt_end))", s.problem);

  std::vector<SessionStatus> seen;
  std::size_t generations = 0;
  RefineHooks hooks{[&](SessionStatus st) { seen.push_back(st); }, [&](const GenerationStats&) { ++generations; }};
  refine(s, {kScoutOnce}, naval_pack(), config, hooks);

  ASSERT_EQ(s.status, SessionStatus::kDone) << s.failure;
  EXPECT_EQ(seen, (std::vector<SessionStatus>{SessionStatus::kTranslating, SessionStatus::kEvolving,
                                               SessionStatus::kDone}));
  auto after = simulate(s.domain, s.problem, s.plan);
  EXPECT_TRUE(check_constraint(once, after));
  EXPECT_TRUE(validate(s.domain, s.problem, s.plan, {}).goal_satisfied);
  ASSERT_EQ(s.judgments.size(), 1u);
  EXPECT_TRUE(s.judgments[0].adheres);
  ASSERT_EQ(s.runs.size(), 1u);
  EXPECT_EQ(s.runs[0].history.size(), generations);
  EXPECT_EQ(s.statements[0].constraint, "(:constraints (at-most-once (at sct_ast_0 wpt_end)))");
}

TEST(Refine, CorrectSeedStopsAtGenerationZero) {
  auto config = exact_config();
  auto s = open_session(naval_pack(), "fig5", config);
  refine(s, {"Don't remove any underwater debris"}, naval_pack(), config);
  ASSERT_EQ(s.status, SessionStatus::kDone) << s.failure;
  ASSERT_EQ(s.runs.size(), 1u);
  EXPECT_TRUE(s.runs[0].converged);
  EXPECT_EQ(s.runs[0].history.size(), 1u);
  EXPECT_DOUBLE_EQ(s.best.fitness, 1.0);
}

TEST(Refine, EmptyFeedbackLeavesSessionUntouched) {
  auto config = exact_config();
  auto s = open_session(naval_pack(), "fig5", config);
  auto plan = s.plan;
  EXPECT_THROW(refine(s, {}, naval_pack(), config), std::invalid_argument);
  EXPECT_THROW(refine(s, {"   ", "?!"}, naval_pack(), config), std::invalid_argument);
  EXPECT_EQ(s.status, SessionStatus::kIdle);
  EXPECT_EQ(s.plan, plan);
  EXPECT_TRUE(s.feedback.statements.empty());
}

TEST(Refine, ExactOracleWithoutGroundTruthFails) {
  auto config = exact_config();
  auto s = open_session(naval_pack(), "fig5", config);
  refine(s, {"paint the ship green"}, naval_pack(), config);
  EXPECT_EQ(s.status, SessionStatus::kFailed);
  EXPECT_NE(s.failure.find("ground truth"), std::string::npos);
}

TEST(Refine, FeedbackAccumulatesAcrossRounds) {
  auto config = exact_config();
  auto s = open_session(naval_pack(), "fig5", config);
  refine(s, {kScoutOnce}, naval_pack(), config);
  refine(s, {"Don't remove any underwater debris"}, naval_pack(), config);
  ASSERT_EQ(s.status, SessionStatus::kDone) << s.failure;
  EXPECT_EQ(s.feedback.statements.size(), 2u);
  EXPECT_EQ(s.runs.size(), 2u);
  ASSERT_EQ(s.judgments.size(), 2u);
  EXPECT_TRUE(s.judgments[0].adheres && s.judgments[1].adheres);

  config.accumulate = false;
  refine(s, {kScoutOnce}, naval_pack(), config);
  EXPECT_EQ(s.feedback.statements.size(), 1u);
}

TEST(Refine, FailedTranslationSeedsFromPool) {
  // Replay has no recording for this phrasing, but it has a ground truth.
  auto config = exact_config();
  config.translator.kind = TranslatorKind::kReplay;
  auto s = open_session(naval_pack(), "harbor", config);
  const auto& a = naval_pack().archetypes[6];
  ASSERT_EQ(a.id, "assets_end_at_dock");
  refine(s, {a.rephrasings[4], a.nl_template}, naval_pack(), config);
  ASSERT_EQ(s.status, SessionStatus::kDone) << s.failure;
  ASSERT_EQ(s.statements.size(), 2u);
  EXPECT_TRUE(s.statements[0].seeded_from_pool);
  EXPECT_FALSE(s.statements[0].failure.empty());
  EXPECT_FALSE(s.statements[1].seeded_from_pool);
}

ExperimentReport small_report(double error_rate, std::size_t workers, ExperimentSettings settings = {}) {
  EngineConfig c = exact_config();
  c.translator.error_rate = error_rate;
  c.translator.seed = 7;
  c.workers = workers;
  settings.rephrasings = 2;
  return run_experiment(naval_pack(), c, settings);
}

TEST(Experiment, ZeroErrorIsFullyValid) {
  auto r = small_report(0.0, 1);
  EXPECT_EQ(r.corpus_size(), 18u);
  EXPECT_EQ(r.check_invariants(), "");
  EXPECT_DOUBLE_EQ(r.full_rate(), 1.0);
  EXPECT_DOUBLE_EQ(r.translator_rate(), 1.0);
  EXPECT_EQ(r.cross[1][1], 18u);
}

TEST(Experiment, DeterministicAcrossRunsAndWorkers) {
  auto a = small_report(0.3, 1);
  auto b = small_report(0.3, 1);
  auto c = small_report(0.3, 3);
  EXPECT_EQ(format_report_json(a), format_report_json(b));
  EXPECT_EQ(format_report_json(a), format_report_json(c));
  EXPECT_EQ(a.check_invariants(), "");
  EXPECT_GE(a.full_rate(), a.translator_rate());
}

TEST(Experiment, TranslatorOnlyRunsNoGA) {
  ExperimentSettings s;
  s.full = false;
  auto r = small_report(0.3, 1, s);
  EXPECT_EQ(r.ga_runs, 0u);
  EXPECT_EQ(r.check_invariants(), "");
  auto j = nlohmann::json::parse(format_report_json(r));
  EXPECT_EQ(j["modes"], nlohmann::json::array({"translator-only"}));
}

// Builds a report whose cross table has the given cells and checks the
// derived rates.
ExperimentReport synthetic(std::size_t both, std::size_t t_only, std::size_t p_only, std::size_t neither) {
  ExperimentReport r;
  ArchetypeCounts a{"all"};
  auto add = [&](std::size_t n, bool t, bool p) {
    for (std::size_t i = 0; i < n; ++i) {
      ElementOutcome e;
      e.translator_valid = t;
      e.full_valid = p;
      e.converged = true;
      r.elements.push_back(e);
      r.cross[t][p]++;
      ++a.elements;
      (p ? a.full_valid : a.full_invalid)++;
      (t ? a.translator_valid : a.translator_invalid)++;
    }
  };
  add(both, true, true);
  add(t_only, true, false);
  add(p_only, false, true);
  add(neither, false, false);
  r.archetypes.push_back(a);
  return r;
}

TEST(Report, PublishedNavalArithmetic) {
  auto r = synthetic(56, 34, 76, 111);
  EXPECT_EQ(r.corpus_size(), 277u);
  EXPECT_EQ(r.check_invariants(), "");
  auto table = format_report_table(r);
  EXPECT_NE(table.find("full 47.65%, translator-only 32.49% of 277"), std::string::npos) << table;
}

TEST(Report, PublishedSatelliteArithmetic) {
  auto r = synthetic(7, 2, 40, 91);
  EXPECT_EQ(r.corpus_size(), 140u);
  EXPECT_EQ(r.check_invariants(), "");
  EXPECT_NE(format_report_table(r).find("full 33.57%, translator-only 6.43% of 140"), std::string::npos);
}

TEST(Report, InvariantViolationsAreNamed) {
  auto r = synthetic(1, 1, 1, 1);
  r.cross[0][0]++;
  EXPECT_NE(r.check_invariants(), "");
  r = synthetic(1, 1, 1, 1);
  r.archetypes[0].full_valid++;
  EXPECT_NE(r.check_invariants(), "");
  r = synthetic(1, 1, 1, 1);
  r.full = false;
  r.ga_runs = 4;
  EXPECT_NE(r.check_invariants(), "");
}

}  // namespace
}  // namespace plancritic
