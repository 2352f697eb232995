#include <gtest/gtest.h>

#include <set>

#include "plancritic/genetic.hpp"
#include "plancritic/render.hpp"
#include "testing.hpp"

namespace plancritic {
namespace {

using testing::naval_pack;

const DomainModel& naval() { return naval_pack().domain; }
const ProblemModel& mini() { return naval_pack().problem("mini"); }

const ConstraintPool& pool() {
  static const ConstraintPool p(naval(), mini(), {10, false});
  return p;
}

Specification S(const std::string& text) { return testing::spec(text, mini()); }

// Counts planner calls made through it.
class CountingPlanner final : public Planner {
 public:
  PlannerResult solve(const DomainModel& d, const ProblemModel& p, const Specification& s) const override {
    ++calls;
    return inner.solve(d, p, s);
  }
  std::string id() const override { return "counting"; }

  BuiltinPlanner inner;
  mutable std::atomic<int> calls{0};
};

TEST(Mutate, RemoveOnSingletonFallsBackToModify) {
  auto s = S("(always (at n_deb_0 wpt_mid))");
  std::set<std::string> tags;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    Rng rng(seed);
    std::string tag;
    auto out = mutate(s, pool(), rng, {}, &tag);
    tags.insert(tag);
    EXPECT_NE(tag, "remove");
    EXPECT_GE(out.size(), 1u);
    if (tag != "add") EXPECT_EQ(out.size(), 1u) << tag;
  }
  EXPECT_TRUE(tags.count("add"));
  EXPECT_TRUE(tags.count("negate"));
  EXPECT_TRUE(tags.count("retype"));
  EXPECT_TRUE(tags.count("argument"));
}

TEST(Mutate, AddKeepsExistingConstraints) {
  auto s = S("(and (always (at n_deb_0 wpt_mid)) (sometime (at shp_0 wpt_end)))");
  int adds = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    std::string tag;
    auto out = mutate(s, pool(), rng, {}, &tag);
    if (tag != "add") continue;
    ++adds;
    ASSERT_EQ(out.size(), 3u);
    EXPECT_EQ(out.constraints[0], s.constraints[0]);
    EXPECT_EQ(out.constraints[1], s.constraints[1]);
  }
  EXPECT_GT(adds, 0);
}

TEST(Mutate, NegateWrapsTheOperand) {
  auto s = S("(always (at n_deb_0 wpt_mid))");
  int negations = 0;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng rng(seed);
    std::string tag;
    auto out = mutate(s, pool(), rng, {}, &tag);
    if (tag != "negate") continue;
    ++negations;
    EXPECT_EQ(render_specification(out), "(:constraints (always (not (at n_deb_0 wpt_mid))))");
  }
  EXPECT_GT(negations, 0);
}

TEST(Mutate, ResultsStayWellTyped) {
  Rng rng(11);
  auto s = S("(sometime-before (at deb_ast_0 wpt_mid) (at sct_ast_0 wpt_mid))");
  for (int i = 0; i < 500; ++i) {
    s = mutate(s, pool(), rng, {true});
    EXPECT_NO_THROW(typecheck_specification(s, naval(), mini()));
    for (const auto& c : s.constraints) EXPECT_NO_THROW(c.check_shape());
    if (s.size() > 6) s.constraints.resize(3);
  }
}

TEST(Mutate, DuplicateAppendsAModifiedCopy) {
  auto s = S("(always (at n_deb_0 wpt_mid))");
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    std::string tag;
    auto out = mutate(s, pool(), rng, {true}, &tag);
    if (tag == "duplicate") {
      ASSERT_EQ(out.size(), 2u);
      EXPECT_EQ(out.constraints[0], s.constraints[0]);
      return;
    }
  }
  FAIL() << "duplicate branch never taken";
}

TEST(Mutate, EmptySpecificationIsRejected) {
  Rng rng(1);
  EXPECT_THROW(mutate({}, pool(), rng), std::invalid_argument);
}

TEST(Crossover, IdenticalParents) {
  auto a = S("(and (always (at n_deb_0 wpt_mid)) (sometime (at shp_0 wpt_end)))");
  Rng rng(3);
  auto [c1, c2] = crossover(a, a, rng);
  EXPECT_EQ(c1, a);
  EXPECT_EQ(c2, a);
}

TEST(Crossover, SplitArithmetic) {
  auto a = S("(and (always (at n_deb_0 wpt_mid)) (sometime (at shp_0 wpt_end)) (at end (at sct_ast_0 wpt_ini)))");
  auto b = S("(and (within 3 (at deb_ast_0 wpt_mid)) (hold-after 2 (at shp_0 wpt_end)))");
  auto [c1, c2] = crossover_at(a, b, 2);
  ASSERT_EQ(c1.size(), 2u);
  ASSERT_EQ(c2.size(), 3u);
  EXPECT_EQ(c1.constraints[0], a.constraints[0]);
  EXPECT_EQ(c1.constraints[1], b.constraints[1]);
  EXPECT_EQ(c2.constraints[0], b.constraints[0]);
  EXPECT_EQ(c2.constraints[2], a.constraints[2]);
  EXPECT_THROW(crossover_at(a, b, 0), std::out_of_range);
  EXPECT_THROW(crossover_at(a, b, 3), std::out_of_range);
}

TEST(Crossover, ConservesConstraintCount) {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    Specification a, b;
    std::size_t na = 1 + rng.index(5), nb = 1 + rng.index(5);
    for (std::size_t k = 0; k < na; ++k) a.constraints.push_back(pool().sample(rng));
    for (std::size_t k = 0; k < nb; ++k) b.constraints.push_back(pool().sample(rng));
    auto [c1, c2] = crossover(a, b, rng);
    ASSERT_EQ(c1.size() + c2.size(), na + nb);
  }
}

TEST(Evaluate, GroundTruthScoresOne) {
  auto truth = S("(at end (at sct_ast_0 wpt_mid))");
  FeedbackSet f{{{"scout ends at mid", truth}}};
  ExactOracle oracle(naval(), mini());
  BuiltinPlanner planner;
  Evaluator ev(naval(), mini(), planner, oracle, f);
  Individual ind{truth};
  ev.evaluate(ind);
  EXPECT_TRUE(ind.evaluated);
  ASSERT_TRUE(ind.plan.has_value());
  EXPECT_DOUBLE_EQ(ind.fitness, 1.0);
}

TEST(Evaluate, UnsolvableScoresZero) {
  FeedbackSet f{{{"anything", S("(sometime (at shp_0 wpt_end))")}}};
  ExactOracle oracle(naval(), mini());
  BuiltinPlanner planner;
  Evaluator ev(naval(), mini(), planner, oracle, f);
  Individual ind{S("(always (at shp_0 wpt_ini))")};
  ev.evaluate(ind);
  EXPECT_FALSE(ind.plan.has_value());
  EXPECT_DOUBLE_EQ(ind.fitness, 0.0);
}

TEST(Evaluate, DuplicatesShareOnePlannerCall) {
  FeedbackSet f{{{"anything", S("(sometime (at shp_0 wpt_end))")}}};
  ExactOracle oracle(naval(), mini());
  CountingPlanner planner;
  Evaluator ev(naval(), mini(), planner, oracle, f);
  auto g = S("(sometime (at sct_ast_0 wpt_mid))");
  std::vector<Individual> members{{g}, {g}, {g}};
  ev.evaluate_all(members, 2);
  Individual again{g};
  ev.evaluate(again);
  EXPECT_EQ(planner.calls.load(), 1);
  EXPECT_EQ(ev.planner_calls(), 1u);
  EXPECT_EQ(ev.cache_hits(), 3u);
  for (const auto& m : members) EXPECT_EQ(m.plan, again.plan);
}

TEST(Evolve, StopsAtGenerationZeroWhenSeedIsPerfect) {
  auto truth = S("(at end (at sct_ast_0 wpt_mid))");
  FeedbackSet f{{{"scout ends at mid", truth}}};
  ExactOracle oracle(naval(), mini());
  BuiltinPlanner planner;
  GAConfig cfg;
  auto r = evolve(truth, naval(), mini(), pool(), planner, oracle, f, cfg);
  EXPECT_TRUE(r.converged);
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.history[0].generation, 0u);
  EXPECT_DOUBLE_EQ(r.best.fitness, 1.0);
}

TEST(Evolve, BestFitnessNeverDecreases) {
  FeedbackSet f{{{"scout ends at mid", S("(at end (at sct_ast_0 wpt_mid))")},
                 {"debris asset visits end", S("(sometime (at deb_ast_0 wpt_end))")}}};
  ExactOracle oracle(naval(), mini());
  BuiltinPlanner planner;
  GAConfig cfg;
  cfg.seed = 4;
  auto r = evolve(S("(always (at sct_ast_0 wpt_ini))"), naval(), mini(), pool(), planner, oracle, f, cfg);
  ASSERT_FALSE(r.history.empty());
  EXPECT_LE(r.history.size(), cfg.max_generations + 1);
  for (std::size_t i = 1; i < r.history.size(); ++i)
    EXPECT_GE(r.history[i].best_fitness, r.history[i - 1].best_fitness);
  EXPECT_EQ(r.log.size() % cfg.population_size, 0u);
}

TEST(Evolve, FixedSeedIsReproducibleAndWidthIndependent) {
  FeedbackSet f{{{"scout ends at mid", S("(at end (at sct_ast_0 wpt_mid))")},
                 {"ship avoids mid after 3", S("(hold-after 3 (not (at shp_0 wpt_mid)))")}}};
  ExactOracle oracle(naval(), mini());
  BuiltinPlanner planner;
  GAConfig cfg;
  cfg.seed = 99;
  auto initial = S("(sometime (at sct_ast_0 wpt_end))");
  auto a = evolve(initial, naval(), mini(), pool(), planner, oracle, f, cfg);
  auto b = evolve(initial, naval(), mini(), pool(), planner, oracle, f, cfg);
  cfg.parallel_width = 4;
  auto c = evolve(initial, naval(), mini(), pool(), planner, oracle, f, cfg);
  EXPECT_EQ(format_history(a.history), format_history(b.history));
  EXPECT_EQ(format_generation_log(a.log), format_generation_log(b.log));
  EXPECT_EQ(format_generation_log(a.log), format_generation_log(c.log));
}

TEST(Evolve, ProgressIsReportedPerGeneration) {
  FeedbackSet f{{{"x", S("(sometime (at deb_ast_0 wpt_end))")}}};
  ExactOracle oracle(naval(), mini());
  BuiltinPlanner planner;
  std::vector<std::size_t> seen;
  auto r = evolve(S("(always (at deb_ast_0 wpt_ini))"), naval(), mini(), pool(), planner, oracle, f, GAConfig{},
                  [&](const GenerationStats& g) { seen.push_back(g.generation); });
  ASSERT_EQ(seen.size(), r.history.size());
  for (std::size_t i = 0; i < seen.size(); ++i) EXPECT_EQ(seen[i], i);
}

TEST(Config, RejectsBadValues) {
  GAConfig c;
  c.population_size = 1;
  EXPECT_THROW(c.check(), std::invalid_argument);
  c = {};
  c.elite_fraction = 1.5;
  EXPECT_THROW(c.check(), std::invalid_argument);
  c = {};
  c.mutation_probability = -0.1;
  EXPECT_THROW(c.check(), std::invalid_argument);
}

}  // namespace
}  // namespace plancritic
