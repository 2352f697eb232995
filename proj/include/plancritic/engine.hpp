#pragma once

// Feedback refinement pipeline: translate, seed the GA, plan, judge. Also the
// corpus experiment sweep and its reports.

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "plancritic/genetic.hpp"
#include "plancritic/oracle.hpp"
#include "plancritic/planner.hpp"
#include "plancritic/scenario.hpp"
#include "plancritic/translator.hpp"

namespace plancritic {

enum class PlannerKind { kBuiltin, kExternal };
enum class OracleKind { kExact, kNoisy, kRemote };
enum class TranslatorKind { kTemplate, kRemote, kReplay };

struct PlannerSettings {
  PlannerKind kind = PlannerKind::kBuiltin;
  BuiltinPlanner::Options builtin;
  ExternalPlannerConfig external;
};

struct OracleSettings {
  OracleKind kind = OracleKind::kExact;
  NoiseProfile noise;
  RemoteOracleConfig remote;
};

struct TranslatorSettings {
  TranslatorKind kind = TranslatorKind::kTemplate;
  double error_rate = 0.0;  // template only
  std::uint64_t seed = 0;
  ChatEndpointConfig endpoint;
  std::filesystem::path replay_fixture;  // empty: <pack>/replay.json
  std::filesystem::path prompt_dir;      // empty: default_prompt_dir()
};

struct EngineConfig {
  PlannerSettings planner;
  OracleSettings oracle;
  TranslatorSettings translator;
  GAConfig ga;
  std::size_t horizon = 10;  // pool durations and builtin search depth
  Semantics semantics;
  bool accumulate = true;  // false: a new round replaces earlier feedback
  std::size_t workers = 1;  // experiment elements evaluated concurrently
};

std::string_view planner_kind_name(PlannerKind kind);
std::string_view oracle_kind_name(OracleKind kind);
std::string_view translator_kind_name(TranslatorKind kind);
PlannerKind parse_planner_kind(std::string_view name);
OracleKind parse_oracle_kind(std::string_view name);
TranslatorKind parse_translator_kind(std::string_view name);

std::unique_ptr<Planner> make_planner(const EngineConfig& config);
std::unique_ptr<AdherenceOracle> make_oracle(const EngineConfig& config, const ScenarioPack& pack,
                                             const ProblemModel& problem);
std::unique_ptr<FeedbackTranslator> make_translator(const EngineConfig& config, const ScenarioPack& pack);

// Ground truth of the pack record whose template, rephrasings or mid-level
// text matches the statement, if it type-checks against `problem`.
std::optional<Specification> lookup_ground_truth(const ScenarioPack& pack, const ProblemModel& problem,
                                                 const std::string& statement);

enum class SessionStatus { kIdle, kTranslating, kEvolving, kDone, kFailed };
std::string_view status_name(SessionStatus status);

struct StatementRecord {
  std::string text;
  std::string mid_level;
  std::string constraint;  // rendered translation, empty on failure
  std::string failure;
  bool seeded_from_pool = false;  // translation failed, seed drawn at random
};

struct RunSummary {
  std::vector<GenerationStats> history;
  std::string initial_genotype;
  std::string best_genotype;
  std::vector<std::string> plan_before;
  std::vector<std::string> plan_after;
  bool converged = false;
  std::size_t planner_calls = 0;
};

struct Session {
  std::string id;
  std::string pack;
  std::string problem_id;
  DomainModel domain;
  ProblemModel problem;
  FeedbackSet feedback;
  std::vector<StatementRecord> statements;  // parallel to feedback
  std::vector<Specification> seeds;         // parallel to feedback
  Individual best;
  Plan plan;
  std::vector<AdherenceJudgment> judgments;  // parallel to feedback
  std::vector<RunSummary> runs;
  SessionStatus status = SessionStatus::kIdle;
  std::string failure;
};

// Plans for the problem's own goal.
Session open_session(const ScenarioPack& pack, const std::string& problem_id, const EngineConfig& config,
                     std::string id = {});

struct RefineHooks {
  std::function<void(SessionStatus)> status;
  ProgressCallback progress;
};

// Translates the statements, evolves a specification from the conjoined
// seeds and updates the session. Throws std::invalid_argument on an empty
// list, leaving the session untouched. Translation failure of every new
// statement marks the session failed.
void refine(Session& session, const std::vector<std::string>& statements, const ScenarioPack& pack,
            const EngineConfig& config, const RefineHooks& hooks = {});

struct ExperimentSettings {
  bool full = true;
  bool translator_only = true;
  std::size_t rephrasings = 5;  // per archetype; 0 takes all
};

struct ElementOutcome {
  std::string archetype;
  std::string statement;
  bool translated = false;
  bool injected = false;
  std::string translation;
  bool translator_valid = false;
  bool full_valid = false;
  bool converged = false;
  bool oracle_false_positive = false;
  std::string reason;  // why the full pipeline plan is invalid, if it is
};

struct ArchetypeCounts {
  std::string id;
  std::size_t elements = 0;
  std::size_t full_valid = 0;
  std::size_t full_invalid = 0;
  std::size_t translator_valid = 0;
  std::size_t translator_invalid = 0;
};

struct ExperimentReport {
  std::string pack;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;
  bool full = true;
  bool translator_only = true;
  std::vector<ArchetypeCounts> archetypes;
  // cross[t][p]: t = translator-only valid, p = full pipeline valid.
  std::array<std::array<std::size_t, 2>, 2> cross{};
  std::size_t non_convergence = 0;
  std::size_t oracle_false_positive = 0;
  std::size_t ga_runs = 0;
  std::vector<ElementOutcome> elements;

  std::size_t corpus_size() const { return elements.size(); }
  double full_rate() const;
  double translator_rate() const;
  // Empty when the arithmetic invariants hold, otherwise the first violation.
  std::string check_invariants() const;
};

ExperimentReport run_experiment(const ScenarioPack& pack, const EngineConfig& config,
                                const ExperimentSettings& settings = {});

std::string format_report_table(const ExperimentReport& report);
std::string format_report_json(const ExperimentReport& report);

}  // namespace plancritic
