#pragma once

// Plan simulation and exact evaluation of PDDL3 state-trajectory constraints.

#include <array>
#include <cstddef>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "plancritic/pddl.hpp"

namespace plancritic {

using State = std::set<Atom>;

struct Snapshot {
  Rational time;
  State state;
};

// Snapshot 0 is the initial state at time 0; snapshot i > 0 is the state
// after step i - 1 completes.
struct StateTrajectory {
  std::vector<Snapshot> snapshots;
};

class InapplicableAction : public std::runtime_error {
 public:
  InapplicableAction(std::size_t step_index, const std::string& failed_precondition)
      : std::runtime_error("step " + std::to_string(step_index) + " is not applicable: " + failed_precondition),
        step_index_(step_index),
        failed_precondition_(failed_precondition) {}

  std::size_t step_index() const { return step_index_; }
  const std::string& failed_precondition() const { return failed_precondition_; }

 private:
  std::size_t step_index_;
  std::string failed_precondition_;
};

class UnknownObject : public std::runtime_error {
 public:
  explicit UnknownObject(const std::string& object) : std::runtime_error("unknown object: " + object), object_(object) {}
  const std::string& object() const { return object_; }

 private:
  std::string object_;
};

// always-within takes a single operand. kRecurrence reads
// it as "from every snapshot, the condition recurs within d"; kPlainWithin
// treats it exactly like `within`.
enum class AlwaysWithinReading { kRecurrence, kPlainWithin };

struct Semantics {
  AlwaysWithinReading always_within = AlwaysWithinReading::kRecurrence;
};

bool holds(const Condition& c, const State& state);

StateTrajectory simulate(const DomainModel& domain, const ProblemModel& problem, const Plan& plan);

// Incremental evaluator for one constraint. Feed snapshots in order with the
// truth values of the constraint's operand(s); `violated()` becomes true as
// soon as no extension of the prefix can satisfy the constraint, and
// `accepts()` tells whether the trajectory seen so far satisfies it.
class ConstraintMonitor {
 public:
  ConstraintMonitor() = default;
  ConstraintMonitor(Modality modality, const std::vector<Rational>& durations, Semantics semantics = {});

  void observe(bool first, bool second, const Rational& time);
  bool violated() const { return violated_; }
  bool accepts() const;

  // Compact summary of the state relevant to future observations, with the
  // pending always-within obligation expressed relative to `now`.
  void append_key(std::string& key, const Rational& now) const;

 private:
  Modality modality_ = Modality::kAlways;
  std::array<Rational, 2> durations_{};
  Semantics semantics_;
  bool violated_ = false;
  bool flag_ = false;
  bool last_ = false;
  int phase_ = 0;
  Rational mark_;
};

bool check_constraint(const TrajectoryConstraint& c, const StateTrajectory& trajectory, Semantics semantics = {});

struct ConstraintResult {
  TrajectoryConstraint constraint;
  bool satisfied = false;
};

struct ValidationReport {
  bool goal_satisfied = false;
  std::vector<ConstraintResult> per_constraint;
  double adherence_rate = 1.0;  // 1.0 for an empty specification

  std::size_t satisfied_count() const;
  bool all_satisfied() const { return satisfied_count() == per_constraint.size(); }
  bool valid() const { return goal_satisfied && all_satisfied(); }
};

ValidationReport validate(const DomainModel& domain, const ProblemModel& problem, const Plan& plan,
                          const Specification& spec, Semantics semantics = {});
ValidationReport validate(const DomainModel& domain, const ProblemModel& problem, const StateTrajectory& trajectory,
                          const Specification& spec, Semantics semantics = {});

// "index<TAB>constraint<TAB>true|false" lines then "adherence_rate<TAB>r".
std::string format_report(const ValidationReport& report);

}  // namespace plancritic
