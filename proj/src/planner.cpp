#include "plancritic/planner.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_set>

#include "plancritic/grounding.hpp"
#include "plancritic/parser.hpp"
#include "plancritic/render.hpp"
#include "plancritic/trajectory.hpp"
#include "subprocess.hpp"

namespace plancritic {

std::string_view outcome_name(PlannerResult::Outcome outcome) {
  switch (outcome) {
    case PlannerResult::Outcome::kSolved: return "solved";
    case PlannerResult::Outcome::kUnsolvable: return "unsolvable";
    case PlannerResult::Outcome::kTimeout: return "timeout";
  }
  return "?";
}

namespace {

struct CompiledConstraint {
  TrajectoryConstraint source;
  CompiledCondition first;
  CompiledCondition second;
  bool binary = false;
};

struct Node {
  Bitset state;
  std::vector<ConstraintMonitor> monitors;
  std::int32_t parent = -1;
  std::int32_t action = -1;
  std::uint32_t depth = 0;
};

bool observe_all(std::vector<ConstraintMonitor>& monitors, const std::vector<CompiledConstraint>& constraints,
                 const Bitset& state, const Rational& t) {
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    const auto& c = constraints[i];
    monitors[i].observe(c.first.eval(state), c.binary && c.second.eval(state), t);
    if (monitors[i].violated()) return false;
  }
  return true;
}

bool accepting(const Node& n, const CompiledCondition& goal) {
  if (!goal.eval(n.state)) return false;
  return std::all_of(n.monitors.begin(), n.monitors.end(), [](const ConstraintMonitor& m) { return m.accepts(); });
}

std::string node_key(const Node& n, std::uint32_t time_cap) {
  std::string key(reinterpret_cast<const char*>(n.state.data()), n.state.size() * sizeof(std::uint64_t));
  Rational now(static_cast<std::int64_t>(n.depth));
  for (const auto& m : n.monitors) m.append_key(key, now);
  std::uint32_t t = std::min(n.depth, time_cap);
  key.append(reinterpret_cast<const char*>(&t), sizeof t);
  return key;
}

Plan extract_plan(const std::vector<Node>& nodes, std::size_t leaf, const GroundTask& task) {
  std::vector<std::int32_t> chain;
  for (auto i = static_cast<std::int32_t>(leaf); nodes[static_cast<std::size_t>(i)].parent >= 0;
       i = nodes[static_cast<std::size_t>(i)].parent)
    chain.push_back(nodes[static_cast<std::size_t>(i)].action);
  std::reverse(chain.begin(), chain.end());
  Plan plan;
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const GroundAction& a = task.actions()[static_cast<std::size_t>(chain[i])];
    plan.steps.push_back({Rational(static_cast<std::int64_t>(i)), a.name, a.args, Rational(1)});
  }
  return plan;
}

}  // namespace

PlannerResult BuiltinPlanner::solve(const DomainModel& domain, const ProblemModel& problem,
                                    const Specification& spec) const {
  calls_.fetch_add(1);
  auto started = std::chrono::steady_clock::now();
  auto deadline = started + options_.timeout;
  PlannerResult result;
  result.planner_id = id();
  auto finish = [&](PlannerResult::Outcome outcome) {
    result.outcome = outcome;
    result.wall_time =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
    return result;
  };

  GroundTask task(domain, problem);
  CompiledCondition goal = task.compile(problem.goal);
  std::vector<CompiledConstraint> constraints;
  std::uint32_t time_cap = 1;
  auto add_constraint = [&](const TrajectoryConstraint& c) {
    CompiledConstraint cc{c, task.compile(c.conditions.at(0)), {}, c.conditions.size() > 1};
    if (cc.binary) cc.second = task.compile(c.conditions[1]);
    for (const auto& d : c.durations) {
      auto whole = static_cast<std::uint32_t>(d.numerator() / d.denominator());
      time_cap = std::max(time_cap, whole + 2);
    }
    constraints.push_back(std::move(cc));
  };
  for (const auto& c : problem.base_constraints.constraints) add_constraint(c);
  for (const auto& c : spec.constraints) add_constraint(c);

  std::vector<Node> nodes;
  Node root;
  root.state = task.initial_state();
  for (const auto& c : constraints) root.monitors.emplace_back(c.source.modality, c.source.durations);
  if (!observe_all(root.monitors, constraints, root.state, Rational(0))) return finish(PlannerResult::Outcome::kUnsolvable);
  if (accepting(root, goal)) return finish(PlannerResult::Outcome::kSolved);

  std::unordered_set<std::string> seen;
  seen.insert(node_key(root, time_cap));
  nodes.push_back(std::move(root));
  const auto& actions = task.actions();
  bool truncated = false;
  for (std::size_t head = 0; head < nodes.size(); ++head) {
    if ((head & 255U) == 0 && std::chrono::steady_clock::now() > deadline) return finish(PlannerResult::Outcome::kTimeout);
    if (nodes[head].depth >= options_.horizon) continue;
    for (std::size_t a = 0; a < actions.size(); ++a) {
      if (!actions[a].applicable(nodes[head].state)) continue;
      Node child;
      child.state = nodes[head].state;
      actions[a].apply(child.state);
      child.depth = nodes[head].depth + 1;
      child.monitors = nodes[head].monitors;
      if (!observe_all(child.monitors, constraints, child.state, Rational(static_cast<std::int64_t>(child.depth))))
        continue;
      if (!seen.insert(node_key(child, time_cap)).second) continue;
      child.parent = static_cast<std::int32_t>(head);
      child.action = static_cast<std::int32_t>(a);
      bool done = accepting(child, goal);
      nodes.push_back(std::move(child));
      if (done) {
        result.plan = extract_plan(nodes, nodes.size() - 1, task);
        Specification all = problem.base_constraints;
        all.constraints.insert(all.constraints.end(), spec.constraints.begin(), spec.constraints.end());
        if (!validate(domain, problem, result.plan, all).valid())
          throw std::logic_error("builtin planner produced a plan that fails validation");
        return finish(PlannerResult::Outcome::kSolved);
      }
      if (nodes.size() >= options_.max_nodes) {
        truncated = true;
        break;
      }
    }
    if (truncated) return finish(PlannerResult::Outcome::kTimeout);
  }
  return finish(PlannerResult::Outcome::kUnsolvable);
}

PlannerResult plan_builtin(const DomainModel& domain, const ProblemModel& problem, const Specification& spec,
                           std::size_t horizon, std::chrono::milliseconds timeout) {
  BuiltinPlanner::Options options;
  options.horizon = horizon;
  options.timeout = timeout;
  return BuiltinPlanner(options).solve(domain, problem, spec);
}

void ExternalPlannerConfig::check() const {
  if (executable.empty()) throw std::invalid_argument("external planner executable not set");
  auto count = [&](std::string_view needle) {
    std::size_t n = 0;
    for (const auto& a : arguments)
      for (std::size_t p = a.find(needle); p != std::string::npos; p = a.find(needle, p + 1)) ++n;
    return n;
  };
  if (count("{domain}") != 1 || count("{problem}") != 1)
    throw std::invalid_argument("argument template needs {domain} and {problem} exactly once");
}

ExternalPlanner::ExternalPlanner(ExternalPlannerConfig config)
    : config_(std::move(config)),
      slots_(std::make_shared<std::counting_semaphore<64>>(
          static_cast<std::ptrdiff_t>(std::clamp<std::size_t>(config_.max_concurrent, 1, 64)))) {
  config_.check();
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool looks_like_step(std::string_view line) {
  auto first = line.find_first_not_of(" \t");
  if (first == std::string_view::npos) return false;
  line = line.substr(first);
  auto colon = line.find(':');
  if (colon == std::string_view::npos || colon == 0) return false;
  Rational r;
  if (!Rational::try_parse(line.substr(0, colon), r)) return false;
  return line.find('(', colon) != std::string_view::npos;
}

}  // namespace

PlannerResult interpret_planner_output(const std::string& output, const DomainModel& domain) {
  std::vector<std::string> blocks;
  std::string current;
  bool in_block = false;
  std::size_t pos = 0;
  while (pos < output.size()) {
    std::size_t eol = output.find('\n', pos);
    if (eol == std::string::npos) eol = output.size();
    std::string line = output.substr(pos, eol - pos);
    pos = eol + 1;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line.substr(std::min(line.size(), line.find_first_not_of(" \t")));
    if (looks_like_step(line)) {
      current += line + "\n";
      in_block = true;
      continue;
    }
    bool comment = !trimmed.empty() && trimmed[0] == ';';
    bool starts_new = comment && lower(trimmed).find("plan found") != std::string::npos;
    if (in_block && (trimmed.empty() || starts_new || !comment)) {
      blocks.push_back(std::move(current));
      current.clear();
      in_block = false;
    }
  }
  if (in_block) blocks.push_back(std::move(current));

  PlannerResult result;
  if (!blocks.empty()) {
    try {
      result.plan = parse_plan(blocks.back(), domain);
    } catch (const std::exception& e) {
      throw PlannerError(PlannerError::Kind::kParseFailure, std::string("unreadable plan: ") + e.what());
    }
    result.outcome = PlannerResult::Outcome::kSolved;
    return result;
  }
  static const char* const kSentinels[] = {"no solution", "unsolvable", "no plan", "goal can be simplified to false"};
  std::string text = lower(output);
  for (const char* s : kSentinels)
    if (text.find(s) != std::string::npos) {
      result.outcome = PlannerResult::Outcome::kUnsolvable;
      return result;
    }
  // Goals already true produce an empty plan with an explicit marker.
  if (text.find("solution found") != std::string::npos || text.find("plan found") != std::string::npos) {
    result.outcome = PlannerResult::Outcome::kSolved;
    return result;
  }
  throw PlannerError(PlannerError::Kind::kParseFailure, "planner output contains neither a plan nor a known sentinel");
}

PlannerResult ExternalPlanner::solve(const DomainModel& domain, const ProblemModel& problem,
                                     const Specification& spec) const {
  auto started = std::chrono::steady_clock::now();
  detail::TempFile domain_file("plancritic-domain", ".pddl", render_domain(domain));
  detail::TempFile problem_file("plancritic-problem", ".pddl", render_problem(problem, &spec));
  std::vector<std::string> argv{config_.executable.string()};
  for (std::string arg : config_.arguments) {
    if (auto p = arg.find("{domain}"); p != std::string::npos) arg.replace(p, 8, domain_file.path().string());
    if (auto p = arg.find("{problem}"); p != std::string::npos) arg.replace(p, 9, problem_file.path().string());
    argv.push_back(std::move(arg));
  }
  slots_->acquire();
  detail::ProcessResult run;
  try {
    run = detail::run_process(argv, config_.timeout, config_.working_directory);
  } catch (const std::exception& e) {
    slots_->release();
    throw PlannerError(PlannerError::Kind::kProcessFailure, e.what());
  }
  slots_->release();

  PlannerResult result;
  if (run.timed_out) {
    result.outcome = PlannerResult::Outcome::kTimeout;
  } else {
    try {
      result = interpret_planner_output(run.output, domain);
    } catch (const PlannerError&) {
      if (run.exit_code != 0)
        throw PlannerError(PlannerError::Kind::kProcessFailure,
                           "planner exited with status " + std::to_string(run.exit_code) + " and no plan");
      throw;
    }
  }
  result.planner_id = id();
  result.wall_time = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started);
  return result;
}

PlannerResult plan_external(const ExternalPlannerConfig& config, const DomainModel& domain,
                            const ProblemModel& problem, const Specification& spec) {
  return ExternalPlanner(config).solve(domain, problem, spec);
}

}  // namespace plancritic
