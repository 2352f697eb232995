#include "plancritic/trajectory.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "plancritic/render.hpp"

namespace plancritic {

bool holds(const Condition& c, const State& state) {
  switch (c.kind) {
    case Condition::Kind::kAtom:
      if (c.atom.predicate == kEqualityPredicate) return c.atom.args.size() == 2 && c.atom.args[0] == c.atom.args[1];
      return state.count(c.atom) > 0;
    case Condition::Kind::kNot:
      return !holds(c.operands.front(), state);
    case Condition::Kind::kAnd:
      return std::all_of(c.operands.begin(), c.operands.end(), [&](const Condition& op) { return holds(op, state); });
    case Condition::Kind::kOr:
      return std::any_of(c.operands.begin(), c.operands.end(), [&](const Condition& op) { return holds(op, state); });
  }
  return false;
}

namespace {

using Binding = std::map<std::string, std::string>;

Atom instantiate(const Atom& a, const Binding& b) {
  Atom out{a.predicate, {}};
  out.args.reserve(a.args.size());
  for (const auto& arg : a.args) {
    auto it = b.find(arg);
    out.args.push_back(it == b.end() ? arg : it->second);
  }
  return out;
}

Condition instantiate(const Condition& c, const Binding& b) {
  Condition out = c;
  if (c.kind == Condition::Kind::kAtom) {
    out.atom = instantiate(c.atom, b);
    return out;
  }
  for (auto& op : out.operands) op = instantiate(op, b);
  return out;
}

// First conjunct that fails, for error messages.
const Condition* first_failure(const Condition& c, const State& s) {
  if (c.kind == Condition::Kind::kAnd) {
    for (const auto& op : c.operands)
      if (const Condition* f = first_failure(op, s)) return f;
    return nullptr;
  }
  return holds(c, s) ? nullptr : &c;
}

}  // namespace

StateTrajectory simulate(const DomainModel& domain, const ProblemModel& problem, const Plan& plan) {
  StateTrajectory traj;
  State state(problem.init.begin(), problem.init.end());
  traj.snapshots.push_back({Rational(0), state});
  Rational clock(0);
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    const PlanStep& step = plan.steps[i];
    const ActionSchema* schema = domain.find_action(step.action);
    if (schema == nullptr) throw InapplicableAction(i, "unknown action " + step.action);
    if (schema->parameters.size() != step.args.size())
      throw InapplicableAction(i, "wrong argument count for " + step.action);
    Binding binding;
    for (std::size_t k = 0; k < step.args.size(); ++k) {
      auto type = problem.object_type(step.args[k], domain);
      if (!type) throw UnknownObject(step.args[k]);
      if (!domain.is_subtype(*type, schema->parameters[k].type))
        throw InapplicableAction(i, step.args[k] + " is not a " + schema->parameters[k].type);
      binding[schema->parameters[k].name] = step.args[k];
    }
    Condition pre = instantiate(schema->precondition, binding);
    if (const Condition* failed = first_failure(pre, state)) throw InapplicableAction(i, render(*failed));
    for (const auto& e : schema->effects)
      if (!e.positive) state.erase(instantiate(e.atom, binding));
    for (const auto& e : schema->effects)
      if (e.positive) state.insert(instantiate(e.atom, binding));
    // Overlapping external steps may end earlier than a predecessor; the
    // trajectory clock never runs backwards.
    clock = std::max(clock, step.start + step.duration);
    traj.snapshots.push_back({clock, state});
  }
  return traj;
}

ConstraintMonitor::ConstraintMonitor(Modality modality, const std::vector<Rational>& durations, Semantics semantics)
    : modality_(modality), semantics_(semantics) {
  for (std::size_t i = 0; i < durations.size() && i < durations_.size(); ++i) durations_[i] = durations[i];
}

void ConstraintMonitor::observe(bool first, bool second, const Rational& t) {
  if (violated_) return;
  last_ = first;
  switch (modality_) {
    case Modality::kAlways:
      if (!first) violated_ = true;
      break;
    case Modality::kSometime:
      flag_ = flag_ || first;
      break;
    case Modality::kWithin:
      if (first && t <= durations_[0]) flag_ = true;
      if (!flag_ && t > durations_[0]) violated_ = true;
      break;
    case Modality::kAtMostOnce:
      if (first) {
        if (phase_ == 2) violated_ = true;
        phase_ = 1;
      } else if (phase_ == 1) {
        phase_ = 2;
      }
      break;
    case Modality::kSometimeAfter:
      // `flag_` marks an occurrence of the trigger not yet followed by the
      // response.
      if (second) {
        flag_ = false;
      } else if (first) {
        flag_ = true;
      }
      break;
    case Modality::kSometimeBefore:
      // `flag_` records that the precondition was seen strictly earlier.
      if (first && !flag_) violated_ = true;
      if (second) flag_ = true;
      break;
    case Modality::kAlwaysWithin:
      if (semantics_.always_within == AlwaysWithinReading::kPlainWithin) {
        if (first && t <= durations_[0]) flag_ = true;
        if (!flag_ && t > durations_[0]) violated_ = true;
        break;
      }
      // `flag_` means an obligation issued at `mark_` is still open; it is
      // the earliest one, so it has the tightest deadline.
      if (flag_ && t > mark_ + durations_[0]) {
        violated_ = true;
        break;
      }
      if (first) {
        flag_ = false;
      } else if (!flag_) {
        flag_ = true;
        mark_ = t;
      }
      break;
    case Modality::kHoldDuring:
      if (durations_[0] <= t && t < durations_[1] && !first) violated_ = true;
      break;
    case Modality::kHoldAfter:
      if (t > durations_[0] && !first) violated_ = true;
      break;
    case Modality::kAtEnd:
      break;
  }
}

bool ConstraintMonitor::accepts() const {
  if (violated_) return false;
  switch (modality_) {
    case Modality::kSometime:
    case Modality::kWithin:
      return flag_;
    case Modality::kSometimeAfter:
      return !flag_;
    case Modality::kAlwaysWithin:
      return semantics_.always_within == AlwaysWithinReading::kPlainWithin ? flag_ : !flag_;
    case Modality::kAtEnd:
      return last_;
    default:
      return true;
  }
}

void ConstraintMonitor::append_key(std::string& key, const Rational& now) const {
  key.push_back(static_cast<char>((violated_ ? 1 : 0) | (flag_ ? 2 : 0) | (phase_ << 2)));
  if (modality_ == Modality::kAlwaysWithin && flag_ &&
      semantics_.always_within == AlwaysWithinReading::kRecurrence) {
    key += (now - mark_).str();
    key.push_back('|');
  }
}

bool check_constraint(const TrajectoryConstraint& c, const StateTrajectory& trajectory, Semantics semantics) {
  ConstraintMonitor monitor(c.modality, c.durations, semantics);
  bool binary = c.conditions.size() > 1;
  for (const auto& snap : trajectory.snapshots) {
    bool first = holds(c.conditions[0], snap.state);
    bool second = binary && holds(c.conditions[1], snap.state);
    monitor.observe(first, second, snap.time);
    if (monitor.violated()) return false;
  }
  return monitor.accepts();
}

std::size_t ValidationReport::satisfied_count() const {
  return static_cast<std::size_t>(
      std::count_if(per_constraint.begin(), per_constraint.end(), [](const ConstraintResult& r) { return r.satisfied; }));
}

ValidationReport validate(const DomainModel& domain, const ProblemModel& problem, const StateTrajectory& trajectory,
                          const Specification& spec, Semantics semantics) {
  (void)domain;
  (void)problem;
  ValidationReport report;
  report.goal_satisfied = holds(problem.goal, trajectory.snapshots.back().state);
  for (const auto& c : spec.constraints)
    report.per_constraint.push_back({c, check_constraint(c, trajectory, semantics)});
  if (!report.per_constraint.empty())
    report.adherence_rate =
        static_cast<double>(report.satisfied_count()) / static_cast<double>(report.per_constraint.size());
  return report;
}

ValidationReport validate(const DomainModel& domain, const ProblemModel& problem, const Plan& plan,
                          const Specification& spec, Semantics semantics) {
  return validate(domain, problem, simulate(domain, problem, plan), spec, semantics);
}

std::string format_report(const ValidationReport& report) {
  std::string out;
  for (std::size_t i = 0; i < report.per_constraint.size(); ++i) {
    const auto& r = report.per_constraint[i];
    out += std::to_string(i) + "\t" + render(r.constraint) + "\t" + (r.satisfied ? "true" : "false") + "\n";
  }
  out += std::string("goal_satisfied\t") + (report.goal_satisfied ? "true" : "false") + "\n";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", report.adherence_rate);
  out += std::string("adherence_rate\t") + buf + "\n";
  return out;
}

}  // namespace plancritic
