#pragma once

// Naval disaster-response scenarios, scenario packs on disk, and adherence
// training instances.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plancritic/pddl.hpp"
#include "plancritic/planner.hpp"

namespace plancritic {

struct DebrisPlacement {
  std::string name;
  bool underwater = false;
  std::string from;  // debris sits here and blocks from -> to
  std::string to;
};

struct AssetPlacement {
  std::string name;
  std::string type;  // debris_asset, scout_asset or salvage_asset
  std::string waypoint;
};

struct NavalScenarioConfig {
  std::string name = "naval";
  std::vector<std::string> waypoints;
  std::vector<std::pair<std::string, std::string>> edges;  // undirected
  std::vector<DebrisPlacement> debris;
  std::vector<AssetPlacement> assets;
  std::vector<std::string> debris_stations;
  std::string dock;
  std::string target;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument naming the broken invariant.
  void check() const;
};

// Domain text shipped as packs/naval/domain.pddl.
const std::string& naval_domain_text();
DomainModel naval_domain();
std::pair<DomainModel, ProblemModel> generate_naval(const NavalScenarioConfig& config);

NavalScenarioConfig mini_config();
NavalScenarioConfig harbor_config();
NavalScenarioConfig fig5_config();
// Harbor layout with debris kinds and extra debris drawn from the seed.
NavalScenarioConfig naval_variation(std::uint64_t seed);

struct ArchetypeRecord {
  std::string id;
  std::string nl_template;
  std::string problem_id;
  std::vector<std::string> ground_truth_text;
  Specification ground_truth;  // parsed against problem_id
  std::string mid_level;
  std::vector<std::string> rephrasings;
  std::map<std::string, std::string> bindings;
};

// Action and predicate phrase templates. "{0}" is the first argument and
// "{type0}" the phrase for its object type.
struct PhraseTable {
  std::map<std::string, std::string> actions;
  std::map<std::string, std::string> predicates;
  std::map<std::string, std::string> types;
};

struct ScenarioPack {
  std::string name;
  std::filesystem::path directory;
  DomainModel domain;
  std::vector<std::pair<std::string, ProblemModel>> problems;  // sorted by id
  std::vector<ArchetypeRecord> archetypes;
  std::vector<ArchetypeRecord> examples;  // worked translation examples
  PhraseTable phrases;
  std::string note;

  const ProblemModel& problem(const std::string& id) const;
};

class PackError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// $PLANCRITIC_PACKS if set, else the source tree's packs/ directory.
std::filesystem::path default_pack_root();
ScenarioPack load_pack(const std::string& name, const std::filesystem::path& root = default_pack_root());

struct TrainingInstance {
  std::string problem_id;
  std::size_t instance = 0;  // feedback instance the example belongs to
  Plan plan;
  TrajectoryConstraint constraint;
  std::string statement;
  bool positive = false;
};

struct TrainingOptions {
  std::size_t per_problem = 20;
  std::size_t min_size = 2;
  std::size_t max_size = 5;
  std::size_t horizon = 8;
  std::uint64_t seed = 0;
  std::size_t attempts_per_instance = 200;
};

struct TrainingResult {
  std::vector<TrainingInstance> examples;
  std::map<std::string, std::size_t> produced;  // feedback instances per problem
  std::map<std::string, std::string> exhausted;  // problem -> reason
};

using Verbalizer = std::function<std::string(const TrajectoryConstraint&)>;

// For each problem, repeatedly samples a solvable specification of 2-5 pool
// constraints, plans for it, then samples an equally sized set of constraints
// the plan violates. Without a verbalizer statements are rendered PDDL.
TrainingResult generate_training_instances(const DomainModel& domain,
                                           const std::vector<std::pair<std::string, ProblemModel>>& problems,
                                           const Planner& planner, const TrainingOptions& options,
                                           const Verbalizer& verbalize = {});

// {"problem_id", "instance", "plan_steps", "statement", "constraint", "label"} per line.
std::string format_training_instances(const std::vector<TrainingInstance>& examples);

}  // namespace plancritic
