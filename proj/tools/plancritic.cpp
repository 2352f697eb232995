// plancritic command line: validate, plan, evolve, corpus, experiment, serve.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "plancritic/engine.hpp"
#include "plancritic/parser.hpp"
#include "plancritic/render.hpp"
#include "plancritic/service.hpp"

using namespace plancritic;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_report(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

struct Globals {
  std::uint64_t seed = 0;
  std::string pack = "naval";
  std::string engine = "builtin";
  std::string oracle = "exact";
  std::string translator = "template";
  std::string report;

  std::string planner_cmd;
  std::vector<std::string> planner_args;
  int planner_timeout_ms = 60'000;
  std::size_t horizon = 10;
  double fp = 0.125;
  double fn = 0.125;
  std::string oracle_url;
  double error_rate = 0.0;
  std::string chat_url;
  std::string chat_model;
  std::string replay;
  std::size_t population = 20;
  std::size_t generations = 3;
  std::size_t width = 1;
};

EngineConfig engine_config(const Globals& g) {
  EngineConfig c;
  c.horizon = g.horizon;
  c.planner.kind = parse_planner_kind(g.engine);
  c.planner.builtin.timeout = std::chrono::milliseconds(g.planner_timeout_ms);
  if (c.planner.kind == PlannerKind::kExternal) {
    if (g.planner_cmd.empty()) throw std::invalid_argument("--engine external needs --planner-cmd");
    c.planner.external.executable = g.planner_cmd;
    if (!g.planner_args.empty()) c.planner.external.arguments = g.planner_args;
    c.planner.external.timeout = std::chrono::milliseconds(g.planner_timeout_ms);
    c.planner.external.check();
  }
  c.oracle.kind = parse_oracle_kind(g.oracle);
  c.oracle.noise = {g.fp, g.fn, g.seed};
  c.oracle.noise.check();
  if (c.oracle.kind == OracleKind::kRemote) {
    if (g.oracle_url.empty()) throw std::invalid_argument("--oracle remote needs --oracle-url");
    c.oracle.remote.url = g.oracle_url;
  }
  c.translator.kind = parse_translator_kind(g.translator);
  c.translator.error_rate = g.error_rate;
  c.translator.seed = g.seed;
  if (!g.chat_url.empty()) c.translator.endpoint.url = g.chat_url;
  if (!g.chat_model.empty()) c.translator.endpoint.model = g.chat_model;
  c.translator.replay_fixture = g.replay;
  c.ga.seed = g.seed;
  c.ga.population_size = g.population;
  c.ga.max_generations = g.generations;
  c.ga.parallel_width = g.width;
  c.ga.check();
  return c;
}

Specification read_constraints(const std::string& path, const DomainModel& d, const ProblemModel& p) {
  if (path.empty()) return {};
  return parse_specification(slurp(path), d, p);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Refine plans from natural-language feedback with trajectory constraints"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--pack", g.pack, "Scenario pack name");
  app.add_option("--engine", g.engine, "Planner: builtin or external")->check(CLI::IsMember({"builtin", "external"}));
  app.add_option("--oracle", g.oracle, "Adherence oracle: exact, noisy or remote")
      ->check(CLI::IsMember({"exact", "noisy", "remote"}));
  app.add_option("--translator", g.translator, "Feedback translator: template, remote or replay")
      ->check(CLI::IsMember({"template", "remote", "replay"}));
  app.add_option("--report", g.report, "Write the machine-readable output to this path");
  app.add_option("--planner-cmd", g.planner_cmd, "External planner executable");
  app.add_option("--planner-arg", g.planner_args, "External planner argument; {domain} and {problem} are substituted");
  app.add_option("--timeout", g.planner_timeout_ms, "Planner timeout in milliseconds");
  app.add_option("--horizon", g.horizon, "Search depth and largest constraint duration");
  app.add_option("--fp", g.fp, "Noisy oracle false-positive rate");
  app.add_option("--fn", g.fn, "Noisy oracle false-negative rate");
  app.add_option("--oracle-url", g.oracle_url, "Remote oracle endpoint");
  app.add_option("--error-rate", g.error_rate, "Template translator error injection rate");
  app.add_option("--chat-url", g.chat_url, "Chat completion endpoint for the remote translator");
  app.add_option("--chat-model", g.chat_model, "Model name for the remote translator");
  app.add_option("--replay", g.replay, "Recorded responses for the replay translator");
  app.add_option("--population", g.population, "GA population size");
  app.add_option("--generations", g.generations, "GA generations after the first");
  app.add_option("--width", g.width, "Concurrent fitness evaluations");

  auto* validate_cmd = app.add_subcommand("validate", "Check a plan against goal and constraints");
  std::string v_domain, v_problem, v_plan, v_constraints;
  validate_cmd->add_option("domain", v_domain)->required();
  validate_cmd->add_option("problem", v_problem)->required();
  validate_cmd->add_option("plan", v_plan)->required();
  validate_cmd->add_option("--constraints", v_constraints);

  auto* plan_cmd = app.add_subcommand("plan", "Plan for a problem, optionally under extra constraints");
  std::string p_domain, p_problem, p_constraints;
  plan_cmd->add_option("domain", p_domain)->required();
  plan_cmd->add_option("problem", p_problem)->required();
  plan_cmd->add_option("--constraints", p_constraints);

  auto* evolve_cmd = app.add_subcommand("evolve", "Refine the plan of a pack problem with feedback");
  std::string e_problem;
  std::vector<std::string> e_feedback;
  bool e_replace = false;
  evolve_cmd->add_option("--problem", e_problem, "Problem id within the pack")->required();
  evolve_cmd->add_option("--feedback,-f", e_feedback, "Feedback statement (repeatable)")
      ->required();
  evolve_cmd->add_flag("--replace", e_replace, "Each round replaces earlier feedback");
  bool e_rounds = false;
  evolve_cmd->add_flag("--rounds", e_rounds, "Treat each statement as its own feedback round");

  auto* corpus_cmd = app.add_subcommand("corpus", "Inspect packs and generate scenarios and training data");
  corpus_cmd->require_subcommand(1);
  auto* list_cmd = corpus_cmd->add_subcommand("list", "List archetypes and problems of the pack");
  auto* naval_cmd = corpus_cmd->add_subcommand("naval", "Write a naval scenario variation");
  std::string n_out;
  naval_cmd->add_option("--out", n_out, "Directory for domain.pddl and problem.pddl")->required();
  auto* training_cmd = corpus_cmd->add_subcommand("training", "Generate adherence training instances");
  std::vector<std::string> t_problems;
  std::size_t t_count = 20;
  training_cmd->add_option("--problem", t_problems, "Problem ids (default: all)");
  training_cmd->add_option("--count", t_count, "Feedback instances per problem");

  auto* experiment_cmd = app.add_subcommand("experiment", "Run the corpus sweep");
  std::string x_mode = "both";
  std::size_t x_rephrasings = 5, x_workers = 1;
  experiment_cmd->add_option("--mode", x_mode)->check(CLI::IsMember({"full", "translator-only", "both"}));
  experiment_cmd->add_option("--rephrasings", x_rephrasings, "Rephrasings per archetype (0: all)");
  experiment_cmd->add_option("--workers", x_workers, "Corpus elements evaluated concurrently");

  auto* serve_cmd = app.add_subcommand("serve", "Serve the session HTTP API");
  std::string s_host = "127.0.0.1";
  int s_port = 8080;
  serve_cmd->add_option("--host", s_host);
  serve_cmd->add_option("--port", s_port);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate_cmd) {
      auto domain = parse_domain(slurp(v_domain));
      auto problem = parse_problem(slurp(v_problem), domain);
      auto plan = parse_plan(slurp(v_plan), domain);
      auto spec = read_constraints(v_constraints, domain, problem);
      auto report = validate(domain, problem, plan, spec);
      std::string text = format_report(report);
      std::cout << text;
      write_report(g.report, text);
      return report.valid() ? 0 : 1;
    }

    auto config = engine_config(g);

    if (*plan_cmd) {
      auto domain = parse_domain(slurp(p_domain));
      auto problem = parse_problem(slurp(p_problem), domain);
      auto spec = read_constraints(p_constraints, domain, problem);
      auto planner = make_planner(config);
      auto result = planner->solve(domain, problem, spec);
      std::cerr << "; " << outcome_name(result.outcome) << " in " << result.wall_time.count() << " ms\n";
      if (!result.solved()) return 2;
      std::cout << render_plan(result.plan);
      write_report(g.report, render_plan(result.plan));
      return 0;
    }

    auto pack = load_pack(g.pack);

    if (*evolve_cmd) {
      config.accumulate = !e_replace;
      auto session = open_session(pack, e_problem, config, "cli");
      std::cout << "; initial plan\n" << render_plan(session.plan);
      std::vector<std::vector<std::string>> rounds;
      if (e_rounds)
        for (const auto& f : e_feedback) rounds.push_back({f});
      else
        rounds.push_back(e_feedback);
      std::string log;
      for (const auto& round : rounds) {
        RefineHooks hooks;
        hooks.progress = [](const GenerationStats& s) {
          std::cerr << "generation " << s.generation << " best " << s.best_fitness << " mean " << s.mean_fitness
                    << " evaluations " << s.evaluations << "\n";
        };
        refine(session, round, pack, config, hooks);
        if (session.status == SessionStatus::kFailed) {
          std::cerr << "failed: " << session.failure << "\n";
          return 1;
        }
        log += format_history(session.runs.back().history);
      }
      for (std::size_t i = 0; i < session.statements.size(); ++i) {
        const auto& r = session.statements[i];
        std::cout << "; feedback: " << r.text << "\n;   mid-level: " << r.mid_level << "\n;   constraint: "
                  << (r.constraint.empty() ? "(failed: " + r.failure + ")" : r.constraint) << "\n;   adheres: "
                  << (session.judgments[i].adheres ? "yes" : "no") << "\n";
      }
      std::cout << "; specification " << render_specification(session.best.genotype) << "\n; fitness "
                << session.best.fitness << "\n"
                << render_plan(session.plan);
      write_report(g.report, log);
      return 0;
    }

    if (*list_cmd) {
      for (const auto& [id, p] : pack.problems) std::cout << "problem " << id << " (" << p.objects.size()
                                                           << " objects)\n";
      for (const auto& a : pack.archetypes)
        std::cout << "archetype " << a.id << " [" << a.problem_id << "] " << a.nl_template << "\n  "
                  << render_specification(a.ground_truth) << "\n";
      return 0;
    }

    if (*naval_cmd) {
      auto [domain, problem] = generate_naval(naval_variation(g.seed));
      std::filesystem::create_directories(n_out);
      write_report((std::filesystem::path(n_out) / "domain.pddl").string(), naval_domain_text());
      write_report((std::filesystem::path(n_out) / "problem.pddl").string(), render_problem(problem));
      std::cout << render_problem(problem);
      return 0;
    }

    if (*training_cmd) {
      std::vector<std::pair<std::string, ProblemModel>> problems;
      for (const auto& [id, p] : pack.problems)
        if (t_problems.empty() || std::find(t_problems.begin(), t_problems.end(), id) != t_problems.end())
          problems.emplace_back(id, p);
      TrainingOptions options;
      options.per_problem = t_count;
      options.seed = g.seed;
      auto planner = make_planner(config);
      auto verbal = [&](const TrajectoryConstraint& c) { return verbalize(c, pack.phrases); };
      auto result = generate_training_instances(pack.domain, problems, *planner, options, verbal);
      std::string text = format_training_instances(result.examples);
      std::cout << text;
      for (const auto& [id, why] : result.exhausted) std::cerr << id << ": " << why << "\n";
      write_report(g.report, text);
      return 0;
    }

    if (*experiment_cmd) {
      ExperimentSettings settings;
      settings.full = x_mode != "translator-only";
      settings.translator_only = x_mode != "full";
      settings.rephrasings = x_rephrasings;
      config.workers = x_workers;
      auto report = run_experiment(pack, config, settings);
      std::cout << format_report_table(report);
      write_report(g.report, format_report_json(report));
      auto broken = report.check_invariants();
      if (!broken.empty()) {
        std::cerr << "report invariant violated: " << broken << "\n";
        return 1;
      }
      return 0;
    }

    if (*serve_cmd) {
      ServiceConfig sc;
      sc.host = s_host;
      sc.port = s_port;
      sc.engine = config;
      SessionService service(sc);
      std::cerr << "serving on " << s_host << ":" << s_port << "\n";
      service.run();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
