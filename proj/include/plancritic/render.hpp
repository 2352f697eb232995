#pragma once

#include <string>

#include "plancritic/pddl.hpp"

namespace plancritic {

// Canonical text: lowercase keywords, single spaces, input order preserved.

std::string render(const Atom& atom);
std::string render(const Condition& condition);
std::string render(const TrajectoryConstraint& constraint);
std::string render(const PlanStep& step);  // "(move a b c)"

// "(:constraints c)" for one constraint, "(:constraints (and c1 c2 ...))"
// otherwise. An empty specification renders as "(:constraints (and))".
std::string render_specification(const Specification& spec);

// Canonical genotype identity used for memoization and tie-breaking.
inline std::string canonical_text(const Specification& spec) { return render_specification(spec); }

std::string render_domain(const DomainModel& domain);
// Renders a standalone problem file. When `extra` is given its constraints are
// conjoined after the problem's own base constraints.
std::string render_problem(const ProblemModel& problem, const Specification* extra = nullptr);
// One `start: (action args) [duration]` line per step.
std::string render_plan(const Plan& plan);

}  // namespace plancritic
