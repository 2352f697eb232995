#include <gtest/gtest.h>

#include <json.hpp>
#include <set>
#include <sstream>

#include "plancritic/pool.hpp"
#include "plancritic/render.hpp"
#include "plancritic/trajectory.hpp"
#include "testing.hpp"

namespace plancritic {
namespace {

using testing::naval_pack;

std::filesystem::path pack_file(const std::string& rel) { return std::filesystem::path(PLANCRITIC_PACK_DIR) / rel; }

TEST(Naval, DomainTextMatchesPackFile) {
  EXPECT_EQ(naval_domain_text(), testing::read_file(pack_file("naval/domain.pddl")));
  EXPECT_EQ(naval_domain(), naval_pack().domain);
}

TEST(Naval, GeneratedProblemsMatchPack) {
  std::pair<const char*, NavalScenarioConfig> cases[] = {
      {"mini", mini_config()}, {"harbor", harbor_config()}, {"fig5", fig5_config()}};
  for (const auto& [id, config] : cases) {
    auto [d, p] = generate_naval(config);
    EXPECT_EQ(p, naval_pack().problem(id)) << id;
  }
}

TEST(Naval, ConfigInvariants) {
  auto c = mini_config();
  c.target = c.dock;
  EXPECT_THROW(c.check(), std::invalid_argument);
  c = mini_config();
  c.edges.pop_back();
  EXPECT_THROW(c.check(), std::invalid_argument);
  c = mini_config();
  c.assets.erase(c.assets.begin());
  EXPECT_THROW(c.check(), std::invalid_argument);
  c = mini_config();
  c.debris[0] = {"n_deb_0", false, "wpt_ini", "wpt_end"};
  EXPECT_THROW(c.check(), std::invalid_argument);
}

TEST(Naval, EveryPackProblemIsSolvable) {
  BuiltinPlanner planner;
  for (const auto& [id, p] : naval_pack().problems) {
    auto r = planner.solve(naval_pack().domain, p, {});
    ASSERT_TRUE(r.solved()) << id;
    EXPECT_TRUE(validate(naval_pack().domain, p, r.plan, {}).goal_satisfied) << id;
  }
  BuiltinPlanner::Options o;
  o.horizon = 8;
  EXPECT_TRUE(BuiltinPlanner(o).solve(naval_pack().domain, naval_pack().problem("mini"), {}).solved());
}

TEST(Naval, VariationsAreValidAndSeeded) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    auto c = naval_variation(seed);
    EXPECT_NO_THROW(generate_naval(c)) << seed;
    EXPECT_GE(c.debris.size(), 2u);
    EXPECT_EQ(render_problem(generate_naval(c).second), render_problem(generate_naval(naval_variation(seed)).second));
  }
}

const char* kToggle = R"((define (domain toggle)
  (:predicates (p ?x))
  (:action set :parameters (?x) :precondition (not (p ?x)) :effect (p ?x))))";

TEST(Pool, SingleAtomGivesBothLiterals) {
  auto d = parse_domain(kToggle);
  auto p = parse_problem("(define (problem one) (:domain toggle) (:objects a) (:init) (:goal (p a)))", d);
  auto all = enumerate_constraints(d, p, 2);
  std::set<std::string> texts;
  for (const auto& c : all) texts.insert(render(c));
  EXPECT_TRUE(texts.count("(always (p a))"));
  EXPECT_TRUE(texts.count("(always (not (p a)))"));
  EXPECT_TRUE(texts.count("(within 2 (not (p a)))"));
  EXPECT_TRUE(texts.count("(sometime-before (p a) (not (p a)))"));
  EXPECT_EQ(texts.size(), all.size());
  ConstraintPool pool(d, p, {2, true});
  EXPECT_EQ(pool.atoms().size(), 1u);
}

TEST(Pool, EveryConstraintParsesBack) {
  const auto& mini = naval_pack().problem("mini");
  ConstraintPool pool(naval_pack().domain, mini, {4, false});
  ASSERT_GT(pool.size(), 0u);
  for (std::size_t i = 0; i < pool.size(); i += 7) {
    auto c = pool.at(i);
    EXPECT_EQ(testing::constraint(render(c), mini), c) << render(c);
  }
}

TEST(Pool, StaticPredicatesAreExcludedOnRequest) {
  const auto& mini = naval_pack().problem("mini");
  ConstraintPool dynamic(naval_pack().domain, mini, {4, false});
  ConstraintPool full(naval_pack().domain, mini, {4, true});
  EXPECT_LT(dynamic.atoms().size(), full.atoms().size());
  for (const auto& a : dynamic.atoms()) {
    EXPECT_NE(a.predicate, "connected");
    EXPECT_NE(a.predicate, "debris_station");
  }
}

TEST(Pack, NavalArchetypes) {
  const auto& pack = naval_pack();
  const char* templates[] = {
      "All underwater debris is removed",
      "Scout asset reaches end point before debris asset moves",
      "Waypoint b is made unrestricted",
      "Step 6 happens before step 5",
      "All of the underwater debris is removed and none of the normal debris is removed",
      "Debris asset ends at waypoint b",
      "All assets are at the ship dock at the end of the plan",
      "Scout asset reaches shipwreck before debris asset reaches shipwreck",
      "Scout asset reaches shipwreck before debris asset reaches shipwreck and no underwater debris is removed",
  };
  ASSERT_EQ(pack.archetypes.size(), 9u);
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(pack.archetypes[i].nl_template, templates[i]);
    EXPECT_GE(pack.archetypes[i].rephrasings.size(), 5u) << pack.archetypes[i].id;
    EXPECT_FALSE(pack.archetypes[i].ground_truth.empty());
  }
  EXPECT_FALSE(pack.examples.empty());
  EXPECT_EQ(pack.phrases.actions.count("move"), 1u);
}

TEST(Pack, SatelliteCoversItsActions) {
  const auto& pack = testing::satellite_pack();
  for (const char* a : {"turn_to", "switch_on", "switch_off", "calibrate", "take_image"})
    EXPECT_NE(pack.domain.find_action(a), nullptr) << a;
  EXPECT_EQ(pack.archetypes.size(), 3u);
  EXPECT_EQ(pack.problems.size(), 2u);
}

TEST(Pack, UnknownOrUnsafeNamesAreRejected) {
  EXPECT_THROW(load_pack("nope"), PackError);
  EXPECT_THROW(load_pack("../packs/naval"), PackError);
  EXPECT_THROW(load_pack(""), PackError);
  EXPECT_THROW(naval_pack().problem("missing"), PackError);
}

TEST(Pack, CorruptArchetypeFileIsReported) {
  auto root = std::filesystem::temp_directory_path() / "plancritic_pack_test";
  std::filesystem::remove_all(root);
  std::filesystem::create_directories(root / "broken" / "problems");
  std::filesystem::copy_file(pack_file("naval/domain.pddl"), root / "broken" / "domain.pddl");
  std::filesystem::copy_file(pack_file("naval/problems/mini.pddl"), root / "broken" / "problems" / "mini.pddl");
  std::ofstream(root / "broken" / "archetypes.json") << "{\"archetypes\": [ {\"id\": ";
  EXPECT_THROW(load_pack("broken", root), PackError);
  std::filesystem::remove(root / "broken" / "archetypes.json");
  auto pack = load_pack("broken", root);
  EXPECT_TRUE(pack.archetypes.empty());
  EXPECT_EQ(pack.problems.size(), 1u);
  std::filesystem::remove_all(root);
}

TEST(Training, BalancedAndRevalidated) {
  const auto& pack = naval_pack();
  std::vector<std::pair<std::string, ProblemModel>> problems{{"mini", pack.problem("mini")}};
  TrainingOptions o;
  o.per_problem = 5;
  o.seed = 3;
  BuiltinPlanner planner;
  auto r = generate_training_instances(pack.domain, problems, planner, o);
  EXPECT_EQ(r.produced.at("mini"), 5u);
  EXPECT_TRUE(r.exhausted.empty());
  std::map<std::size_t, std::pair<int, int>> balance;
  for (const auto& e : r.examples) {
    auto t = simulate(pack.domain, pack.problem("mini"), e.plan);
    EXPECT_EQ(check_constraint(e.constraint, t), e.positive) << e.statement;
    (e.positive ? balance[e.instance].first : balance[e.instance].second)++;
    EXPECT_EQ(e.statement, render(e.constraint));
  }
  ASSERT_EQ(balance.size(), 5u);
  for (const auto& [i, pn] : balance) {
    EXPECT_EQ(pn.first, pn.second) << i;
    EXPECT_GE(pn.first, 2);
    EXPECT_LE(pn.first, 5);
  }
}

TEST(Training, JsonLinesFormat) {
  const auto& pack = naval_pack();
  TrainingOptions o;
  o.per_problem = 1;
  auto r = generate_training_instances(pack.domain, {{"mini", pack.problem("mini")}}, BuiltinPlanner(), o);
  std::istringstream lines(format_training_instances(r.examples));
  std::string line;
  std::size_t n = 0;
  while (std::getline(lines, line)) {
    auto j = nlohmann::json::parse(line);
    for (const char* k : {"problem_id", "instance", "plan_steps", "statement", "constraint", "label"})
      EXPECT_TRUE(j.contains(k)) << k;
    ++n;
  }
  EXPECT_EQ(n, r.examples.size());
}

TEST(Training, BadSizesRejected) {
  TrainingOptions o;
  o.min_size = 4;
  o.max_size = 2;
  EXPECT_THROW(generate_training_instances(naval_pack().domain, {}, BuiltinPlanner(), o), std::invalid_argument);
}

}  // namespace
}  // namespace plancritic
