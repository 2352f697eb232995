#include "plancritic/engine.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "plancritic/pool.hpp"
#include "plancritic/render.hpp"
#include "plancritic/rng.hpp"
#include "plancritic/trajectory.hpp"

namespace plancritic {

namespace {

template <typename E, std::size_t N>
E parse_kind(std::string_view name, const std::pair<std::string_view, E> (&table)[N], const char* what) {
  for (const auto& [text, kind] : table)
    if (text == name) return kind;
  throw std::invalid_argument(std::string("unknown ") + what + ": " + std::string(name));
}

constexpr std::pair<std::string_view, PlannerKind> kPlannerNames[] = {{"builtin", PlannerKind::kBuiltin},
                                                                      {"external", PlannerKind::kExternal}};
constexpr std::pair<std::string_view, OracleKind> kOracleNames[] = {
    {"exact", OracleKind::kExact}, {"noisy", OracleKind::kNoisy}, {"remote", OracleKind::kRemote}};
constexpr std::pair<std::string_view, TranslatorKind> kTranslatorNames[] = {
    {"template", TranslatorKind::kTemplate}, {"remote", TranslatorKind::kRemote}, {"replay", TranslatorKind::kReplay}};

std::vector<std::string> render_steps(const Plan& plan) {
  std::vector<std::string> out;
  for (const auto& s : plan.steps) out.push_back(render(s));
  return out;
}

Specification conjoin(const std::vector<Specification>& parts) {
  Specification out;
  for (const auto& p : parts) out.constraints.insert(out.constraints.end(), p.constraints.begin(), p.constraints.end());
  return out;
}

std::uint64_t statement_seed(std::uint64_t seed, const std::string& text) {
  return splitmix64(seed ^ fnv1a(normalize_statement(text)));
}

std::string fmt_rate(double r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * r);
  return buf;
}

}  // namespace

std::string_view planner_kind_name(PlannerKind kind) {
  return kind == PlannerKind::kBuiltin ? "builtin" : "external";
}

std::string_view oracle_kind_name(OracleKind kind) {
  switch (kind) {
    case OracleKind::kExact: return "exact";
    case OracleKind::kNoisy: return "noisy";
    case OracleKind::kRemote: return "remote";
  }
  return "?";
}

std::string_view translator_kind_name(TranslatorKind kind) {
  switch (kind) {
    case TranslatorKind::kTemplate: return "template";
    case TranslatorKind::kRemote: return "remote";
    case TranslatorKind::kReplay: return "replay";
  }
  return "?";
}

PlannerKind parse_planner_kind(std::string_view name) { return parse_kind(name, kPlannerNames, "planner"); }
OracleKind parse_oracle_kind(std::string_view name) { return parse_kind(name, kOracleNames, "oracle"); }
TranslatorKind parse_translator_kind(std::string_view name) {
  return parse_kind(name, kTranslatorNames, "translator");
}

std::unique_ptr<Planner> make_planner(const EngineConfig& config) {
  if (config.planner.kind == PlannerKind::kExternal) return std::make_unique<ExternalPlanner>(config.planner.external);
  auto options = config.planner.builtin;
  options.horizon = config.horizon;
  return std::make_unique<BuiltinPlanner>(options);
}

std::unique_ptr<AdherenceOracle> make_oracle(const EngineConfig& config, const ScenarioPack& pack,
                                             const ProblemModel& problem) {
  switch (config.oracle.kind) {
    case OracleKind::kExact:
      return std::make_unique<ExactOracle>(pack.domain, problem, config.semantics);
    case OracleKind::kNoisy:
      return std::make_unique<NoisyOracle>(pack.domain, problem, config.oracle.noise, config.semantics);
    case OracleKind::kRemote: {
      auto describe = [phrases = pack.phrases, domain = pack.domain, problem](const Plan& plan) {
        return describe_plan(plan, phrases, domain, problem);
      };
      return std::make_unique<RemoteOracle>(config.oracle.remote, describe);
    }
  }
  throw std::logic_error("unhandled oracle kind");
}

std::unique_ptr<FeedbackTranslator> make_translator(const EngineConfig& config, const ScenarioPack& pack) {
  const auto& t = config.translator;
  switch (t.kind) {
    case TranslatorKind::kTemplate: {
      auto records = pack.archetypes;
      records.insert(records.end(), pack.examples.begin(), pack.examples.end());
      return std::make_unique<TemplateTranslator>(std::move(records), t.error_rate, t.seed, config.horizon);
    }
    case TranslatorKind::kRemote:
    case TranslatorKind::kReplay: {
      auto prompts = PromptTemplates::load(t.prompt_dir.empty() ? default_prompt_dir() : t.prompt_dir);
      std::shared_ptr<const ChatClient> client;
      if (t.kind == TranslatorKind::kRemote)
        client = std::make_shared<HttpChatClient>(t.endpoint);
      else
        client = std::make_shared<ReplayChatClient>(t.replay_fixture.empty() ? pack.directory / "replay.json"
                                                                             : t.replay_fixture);
      return std::make_unique<RemoteTranslator>(client, std::move(prompts));
    }
  }
  throw std::logic_error("unhandled translator kind");
}

std::optional<Specification> lookup_ground_truth(const ScenarioPack& pack, const ProblemModel& problem,
                                                 const std::string& statement) {
  const std::string key = normalize_statement(statement);
  if (key.empty()) return std::nullopt;
  auto matches = [&](const ArchetypeRecord& r) {
    if (normalize_statement(r.nl_template) == key || normalize_statement(r.mid_level) == key) return true;
    for (const auto& p : r.rephrasings)
      if (normalize_statement(p) == key) return true;
    return false;
  };
  for (const auto* records : {&pack.archetypes, &pack.examples}) {
    for (const auto& r : *records) {
      if (!matches(r)) continue;
      try {
        typecheck_specification(r.ground_truth, pack.domain, problem);
      } catch (const SemanticError&) {
        continue;
      }
      return r.ground_truth;
    }
  }
  return std::nullopt;
}

std::string_view status_name(SessionStatus status) {
  switch (status) {
    case SessionStatus::kIdle: return "idle";
    case SessionStatus::kTranslating: return "translating";
    case SessionStatus::kEvolving: return "evolving";
    case SessionStatus::kDone: return "done";
    case SessionStatus::kFailed: return "failed";
  }
  return "?";
}

Session open_session(const ScenarioPack& pack, const std::string& problem_id, const EngineConfig& config,
                     std::string id) {
  Session s;
  s.id = std::move(id);
  s.pack = pack.name;
  s.problem_id = problem_id;
  s.domain = pack.domain;
  s.problem = pack.problem(problem_id);
  auto planner = make_planner(config);
  auto result = planner->solve(s.domain, s.problem, {});
  if (!result.solved())
    throw std::runtime_error("no plan for the goal of " + problem_id + " (" +
                             std::string(outcome_name(result.outcome)) + ")");
  s.plan = result.plan;
  s.best.plan = result.plan;
  s.best.evaluated = true;
  s.best.fitness = 1.0;
  s.best.lineage = "base";
  return s;
}

void refine(Session& session, const std::vector<std::string>& statements, const ScenarioPack& pack,
            const EngineConfig& config, const RefineHooks& hooks) {
  if (statements.empty()) throw std::invalid_argument("feedback must contain at least one statement");
  for (const auto& s : statements)
    if (normalize_statement(s).empty()) throw std::invalid_argument("feedback statement is blank");

  auto set_status = [&](SessionStatus st) {
    session.status = st;
    if (hooks.status) hooks.status(st);
  };
  auto fail = [&](std::string reason) {
    session.failure = std::move(reason);
    set_status(SessionStatus::kFailed);
  };

  session.failure.clear();
  set_status(SessionStatus::kTranslating);

  FeedbackSet feedback;
  std::vector<StatementRecord> records;
  std::vector<Specification> seeds;
  if (config.accumulate) {
    feedback = session.feedback;
    records = session.statements;
    seeds = session.seeds;
  }

  const bool needs_truth = config.oracle.kind != OracleKind::kRemote;
  auto translator = make_translator(config, pack);
  ConstraintPool pool(session.domain, session.problem, {config.horizon, false});
  std::size_t translated = 0;
  std::string first_failure;
  for (const auto& text : statements) {
    FeedbackStatement f{text, lookup_ground_truth(pack, session.problem, text)};
    if (needs_truth && !f.ground_truth) {
      fail("the " + std::string(oracle_kind_name(config.oracle.kind)) +
           " oracle has no ground truth for: " + text);
      return;
    }
    StatementRecord rec;
    rec.text = text;
    TranslationOutcome outcome;
    try {
      outcome = translator->translate(f, session.domain, session.problem);
    } catch (const std::exception& e) {
      outcome.failure = e.what();
    }
    rec.mid_level = outcome.mid_level.text;
    Specification seed;
    if (outcome.ok()) {
      ++translated;
      seed = *outcome.constraint;
      rec.constraint = render_specification(seed);
    } else {
      rec.failure = outcome.failure;
      if (first_failure.empty()) first_failure = outcome.failure;
      Rng rng(statement_seed(config.ga.seed, text));
      seed.constraints.push_back(pool.sample(rng));
      rec.seeded_from_pool = true;
    }
    feedback.statements.push_back(std::move(f));
    records.push_back(std::move(rec));
    seeds.push_back(std::move(seed));
  }
  if (translated == 0) {
    fail("no statement could be translated: " + first_failure);
    return;
  }

  set_status(SessionStatus::kEvolving);
  RunSummary run;
  EvolveResult result;
  std::unique_ptr<AdherenceOracle> oracle;
  try {
    auto planner = make_planner(config);
    oracle = make_oracle(config, pack, session.problem);
    Specification initial = conjoin(seeds);
    run.initial_genotype = render_specification(initial);
    result = evolve(initial, session.domain, session.problem, pool, *planner, *oracle, feedback, config.ga,
                    hooks.progress);
  } catch (const std::exception& e) {
    fail(e.what());
    throw;
  }

  run.history = result.history;
  run.best_genotype = render_specification(result.best.genotype);
  run.plan_before = render_steps(session.plan);
  run.converged = result.converged;
  run.planner_calls = result.planner_calls;
  session.best = result.best;
  if (result.best.plan) session.plan = *result.best.plan;
  run.plan_after = render_steps(session.plan);

  session.feedback = std::move(feedback);
  session.statements = std::move(records);
  session.seeds = std::move(seeds);
  session.judgments = oracle->assess_all(session.plan, session.feedback);
  session.runs.push_back(std::move(run));
  set_status(SessionStatus::kDone);
}

double ExperimentReport::full_rate() const {
  if (elements.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& e : elements) n += e.full_valid;
  return static_cast<double>(n) / static_cast<double>(elements.size());
}

double ExperimentReport::translator_rate() const {
  if (elements.empty()) return 0.0;
  std::size_t n = 0;
  for (const auto& e : elements) n += e.translator_valid;
  return static_cast<double>(n) / static_cast<double>(elements.size());
}

std::string ExperimentReport::check_invariants() const {
  const std::size_t cells = cross[0][0] + cross[0][1] + cross[1][0] + cross[1][1];
  if (cells != corpus_size())
    return "cross table sums to " + std::to_string(cells) + ", corpus has " + std::to_string(corpus_size());
  std::size_t elements_total = 0;
  for (const auto& a : archetypes) {
    elements_total += a.elements;
    if (full && a.full_valid + a.full_invalid != a.elements) return "full counts of " + a.id + " do not sum";
    if (translator_only && a.translator_valid + a.translator_invalid != a.elements)
      return "translator-only counts of " + a.id + " do not sum";
  }
  if (elements_total != corpus_size()) return "archetype element counts do not sum to the corpus size";
  std::size_t tv = 0, fv = 0, fp = 0, nc = 0;
  for (const auto& e : elements) {
    tv += e.translator_valid;
    fv += e.full_valid;
    fp += e.oracle_false_positive;
    nc += full && !e.converged;
  }
  if (cross[1][0] + cross[1][1] != tv) return "cross table rows disagree with translator-only validity";
  if (cross[0][1] + cross[1][1] != fv) return "cross table columns disagree with full validity";
  if (fp != oracle_false_positive || nc != non_convergence) return "failure-mode counts disagree with elements";
  if (fp + nc > corpus_size()) return "failure modes overlap";
  if (!full && ga_runs != 0) return "translator-only sweep ran the GA";
  return {};
}

ExperimentReport run_experiment(const ScenarioPack& pack, const EngineConfig& config,
                                const ExperimentSettings& settings) {
  if (!settings.full && !settings.translator_only) throw std::invalid_argument("no experiment mode selected");
  config.ga.check();

  struct Element {
    const ArchetypeRecord* record;
    std::string statement;
  };
  std::vector<Element> corpus;
  for (const auto& r : pack.archetypes) {
    std::size_t n = settings.rephrasings == 0 ? r.rephrasings.size() : settings.rephrasings;
    if (n > r.rephrasings.size())
      throw std::invalid_argument("archetype " + r.id + " has only " + std::to_string(r.rephrasings.size()) +
                                  " rephrasings");
    for (std::size_t i = 0; i < n; ++i) corpus.push_back({&r, r.rephrasings[i]});
  }

  auto planner = make_planner(config);
  auto translator = make_translator(config, pack);
  std::map<std::string, std::unique_ptr<AdherenceOracle>> oracles;
  std::map<std::string, std::unique_ptr<ConstraintPool>> pools;
  for (const auto& e : corpus) {
    const auto& id = e.record->problem_id;
    if (oracles.count(id)) continue;
    oracles[id] = make_oracle(config, pack, pack.problem(id));
    pools[id] = std::make_unique<ConstraintPool>(pack.domain, pack.problem(id),
                                                 ConstraintPool::Options{config.horizon, false});
  }

  std::atomic<std::size_t> ga_runs{0};
  std::vector<ElementOutcome> outcomes(corpus.size());

  auto run_element = [&](std::size_t index) {
    const Element& el = corpus[index];
    const ProblemModel& problem = pack.problem(el.record->problem_id);
    ElementOutcome out;
    out.archetype = el.record->id;
    out.statement = el.statement;
    FeedbackStatement f{el.statement, el.record->ground_truth};
    FeedbackSet feedback{{f}};
    auto exact_valid = [&](const Plan& plan) {
      return validate(pack.domain, problem, plan, el.record->ground_truth, config.semantics).valid();
    };

    TranslationOutcome translation;
    try {
      translation = translator->translate(f, pack.domain, problem);
    } catch (const std::exception& e) {
      translation.failure = e.what();
    }
    out.translated = translation.ok();
    out.injected = translation.injected_error;
    if (translation.ok()) out.translation = render_specification(*translation.constraint);

    if (settings.translator_only && translation.ok()) {
      try {
        auto r = planner->solve(pack.domain, problem, *translation.constraint);
        out.translator_valid = r.solved() && exact_valid(r.plan);
      } catch (const std::exception& e) {
        out.reason = std::string("translator-only: ") + e.what();
      }
    }

    if (settings.full) {
      Specification seed;
      if (translation.ok()) {
        seed = *translation.constraint;
      } else {
        Rng rng(statement_seed(config.ga.seed, el.statement));
        seed.constraints.push_back(pools.at(el.record->problem_id)->sample(rng));
      }
      GAConfig ga = config.ga;
      ga.seed = statement_seed(config.ga.seed, el.statement);
      try {
        ++ga_runs;
        auto result = evolve(seed, pack.domain, problem, *pools.at(el.record->problem_id), *planner,
                             *oracles.at(el.record->problem_id), feedback, ga);
        out.converged = result.converged;
        out.full_valid = result.best.plan && exact_valid(*result.best.plan);
        if (!out.full_valid) {
          if (!result.converged)
            out.reason = "ga did not converge";
          else
            out.reason = "oracle accepted a plan the ground truth rejects";
        }
        out.oracle_false_positive = result.converged && !out.full_valid;
      } catch (const std::exception& e) {
        out.full_valid = false;
        out.converged = false;
        out.reason = e.what();
      }
    }
    outcomes[index] = std::move(out);
  };

  const std::size_t width = std::max<std::size_t>(1, std::min(config.workers, corpus.size()));
  if (width == 1) {
    for (std::size_t i = 0; i < corpus.size(); ++i) run_element(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < width; ++w)
      threads.emplace_back([&] {
        for (std::size_t i = next++; i < corpus.size(); i = next++) {
          try {
            run_element(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
  }

  ExperimentReport report;
  report.pack = pack.name;
  report.seed = config.ga.seed;
  report.full = settings.full;
  report.translator_only = settings.translator_only;
  report.config = {
      {"planner", std::string(planner_kind_name(config.planner.kind))},
      {"oracle", std::string(oracle_kind_name(config.oracle.kind))},
      {"translator", std::string(translator_kind_name(config.translator.kind))},
      {"translator_error_rate", std::to_string(config.translator.error_rate)},
      {"translator_seed", std::to_string(config.translator.seed)},
      {"horizon", std::to_string(config.horizon)},
      {"population_size", std::to_string(config.ga.population_size)},
      {"max_generations", std::to_string(config.ga.max_generations)},
      {"elite_fraction", std::to_string(config.ga.elite_fraction)},
      {"mutation_probability", std::to_string(config.ga.mutation_probability)},
      {"rephrasings", std::to_string(settings.rephrasings)},
  };
  if (config.oracle.kind == OracleKind::kNoisy) {
    report.config["false_positive_rate"] = std::to_string(config.oracle.noise.false_positive_rate);
    report.config["false_negative_rate"] = std::to_string(config.oracle.noise.false_negative_rate);
  }
  for (const auto& e : outcomes) {
    if (report.archetypes.empty() || report.archetypes.back().id != e.archetype)
      report.archetypes.push_back({e.archetype});
    auto& a = report.archetypes.back();
    ++a.elements;
    if (settings.full) (e.full_valid ? a.full_valid : a.full_invalid)++;
    if (settings.translator_only) (e.translator_valid ? a.translator_valid : a.translator_invalid)++;
    ++report.cross[e.translator_valid][e.full_valid];
    if (settings.full && !e.converged) ++report.non_convergence;
    if (e.oracle_false_positive) ++report.oracle_false_positive;
  }
  report.ga_runs = ga_runs.load();
  report.elements = std::move(outcomes);
  return report;
}

std::string format_report_table(const ExperimentReport& report) {
  std::ostringstream out;
  char line[256];
  out << "pack " << report.pack << "  seed " << report.seed << "\n";
  for (const auto& [k, v] : report.config) out << "  " << k << " = " << v << "\n";
  out << "\n";
  std::snprintf(line, sizeof line, "%-36s %6s %6s %8s %8s\n", "archetype", "full+", "full-", "transl+", "transl-");
  out << line;
  for (const auto& a : report.archetypes) {
    std::snprintf(line, sizeof line, "%-36s %6zu %6zu %8zu %8zu\n", a.id.c_str(), a.full_valid, a.full_invalid,
                  a.translator_valid, a.translator_invalid);
    out << line;
  }
  out << "\nvalid plans: full " << fmt_rate(report.full_rate()) << ", translator-only "
      << fmt_rate(report.translator_rate()) << " of " << report.corpus_size() << "\n\n";
  std::snprintf(line, sizeof line, "%-22s %12s %12s\n", "", "full valid", "full invalid");
  out << line;
  std::snprintf(line, sizeof line, "%-22s %12zu %12zu\n", "translator valid", report.cross[1][1], report.cross[1][0]);
  out << line;
  std::snprintf(line, sizeof line, "%-22s %12zu %12zu\n", "translator invalid", report.cross[0][1],
                report.cross[0][0]);
  out << line;
  out << "\nga non-convergence " << report.non_convergence << ", oracle false positive "
      << report.oracle_false_positive << ", ga runs " << report.ga_runs << "\n";
  return out.str();
}

std::string format_report_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["pack"] = report.pack;
  j["seed"] = report.seed;
  j["config"] = report.config;
  j["modes"] = nlohmann::json::array();
  if (report.full) j["modes"].push_back("full");
  if (report.translator_only) j["modes"].push_back("translator-only");
  for (const auto& a : report.archetypes)
    j["archetypes"].push_back({{"id", a.id},
                               {"elements", a.elements},
                               {"full_valid", a.full_valid},
                               {"full_invalid", a.full_invalid},
                               {"translator_valid", a.translator_valid},
                               {"translator_invalid", a.translator_invalid}});
  j["cross"] = {{"translator_valid_full_valid", report.cross[1][1]},
                {"translator_valid_full_invalid", report.cross[1][0]},
                {"translator_invalid_full_valid", report.cross[0][1]},
                {"translator_invalid_full_invalid", report.cross[0][0]}};
  j["full_rate"] = report.full_rate();
  j["translator_rate"] = report.translator_rate();
  j["non_convergence"] = report.non_convergence;
  j["oracle_false_positive"] = report.oracle_false_positive;
  j["ga_runs"] = report.ga_runs;
  for (const auto& e : report.elements)
    j["elements"].push_back({{"archetype", e.archetype},
                             {"statement", e.statement},
                             {"translated", e.translated},
                             {"injected", e.injected},
                             {"translation", e.translation},
                             {"translator_valid", e.translator_valid},
                             {"full_valid", e.full_valid},
                             {"converged", e.converged},
                             {"oracle_false_positive", e.oracle_false_positive},
                             {"reason", e.reason}});
  return j.dump(2) + "\n";
}

}  // namespace plancritic
