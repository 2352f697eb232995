#pragma once

#include <string_view>

#include "plancritic/pddl.hpp"

namespace plancritic {

// All parsers throw ParseError for syntax problems and SemanticError for
// typing/naming problems. Keywords are case-insensitive; identifiers keep
// their case.

DomainModel parse_domain(std::string_view text);
ProblemModel parse_problem(std::string_view text, const DomainModel& domain);

// One atomic trajectory constraint, type-checked against the problem.
TrajectoryConstraint parse_constraint(std::string_view text, const DomainModel& domain,
                                      const ProblemModel& problem);
// Grammar-only variant: shape is checked, predicates and objects are not.
TrajectoryConstraint parse_constraint_syntax(std::string_view text);

// Accepts `(:constraints c)`, `(:constraints (and c1 c2 ...))`, a bare
// `(and c1 ...)`, or a whitespace-separated sequence of constraints.
Specification parse_specification(std::string_view text, const DomainModel& domain,
                                  const ProblemModel& problem);
Specification parse_specification_syntax(std::string_view text);

Condition parse_condition(std::string_view text, const DomainModel& domain, const ProblemModel& problem);

// Plan lines look like `0.000: (move a b c) [1.000]`; `;` starts a comment.
Plan parse_plan(std::string_view text, const DomainModel& domain);

}  // namespace plancritic
