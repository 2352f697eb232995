#pragma once

// Object model for the PDDL subset handled by plancritic: typed STRIPS with
// negative preconditions, a simple-time durative-action subset, and the
// PDDL3 state-trajectory constraints used to express user feedback.

#include <compare>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "plancritic/rational.hpp"

namespace plancritic {

// Syntax error with a 1-based position in the source text.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : std::runtime_error(message + " at " + std::to_string(line) + ":" + std::to_string(column)),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Well-formed text that violates a typing or naming rule. `identifier` names
// the offending type, predicate, object or action.
class SemanticError : public std::runtime_error {
 public:
  SemanticError(const std::string& message, std::string identifier)
      : std::runtime_error(message + ": " + identifier), identifier_(std::move(identifier)) {}

  const std::string& identifier() const { return identifier_; }

 private:
  std::string identifier_;
};

inline constexpr std::string_view kRootType = "object";
inline constexpr std::string_view kEqualityPredicate = "=";

struct TypedName {
  std::string name;
  std::string type{kRootType};

  bool operator==(const TypedName&) const = default;
};

struct TypeDecl {
  std::string name;
  std::string parent{kRootType};

  bool operator==(const TypeDecl&) const = default;
};

struct PredicateSignature {
  std::string name;
  std::vector<TypedName> parameters;

  std::size_t arity() const { return parameters.size(); }
  bool operator==(const PredicateSignature&) const = default;
};

// Predicate instance. Arguments are object names, or `?var` names inside
// action schemas.
struct Atom {
  std::string predicate;
  std::vector<std::string> args;

  bool operator==(const Atom&) const = default;
  auto operator<=>(const Atom&) const = default;
};

struct Condition {
  enum class Kind { kAtom, kNot, kAnd, kOr };

  Kind kind = Kind::kAnd;
  Atom atom;                         // kAtom only
  std::vector<Condition> operands;   // kNot: exactly one; kAnd/kOr: any count

  static Condition make_atom(Atom a);
  static Condition make_atom(std::string predicate, std::vector<std::string> args);
  static Condition make_not(Condition c);
  static Condition make_and(std::vector<Condition> cs);
  static Condition make_or(std::vector<Condition> cs);
  // Empty conjunction, i.e. true.
  static Condition truth() { return make_and({}); }

  bool is_atom() const { return kind == Kind::kAtom; }
  bool is_literal() const {
    return kind == Kind::kAtom || (kind == Kind::kNot && operands.size() == 1 && operands[0].is_atom());
  }

  bool operator==(const Condition&) const = default;
};

// Logical negation that removes a double negation instead of stacking it.
Condition negate(const Condition& c);

struct Literal {
  Atom atom;
  bool positive = true;

  bool operator==(const Literal&) const = default;
};

struct ActionSchema {
  std::string name;
  std::vector<TypedName> parameters;
  Condition precondition = Condition::truth();
  std::vector<Literal> effects;
  Rational duration{1};

  bool operator==(const ActionSchema&) const = default;
};

class DomainModel {
 public:
  std::string name;
  std::vector<std::string> requirements;
  std::vector<TypeDecl> types;
  std::vector<TypedName> constants;
  std::vector<PredicateSignature> predicates;
  std::vector<ActionSchema> actions;

  const PredicateSignature* find_predicate(std::string_view name) const;
  const ActionSchema* find_action(std::string_view name) const;
  bool has_type(std::string_view type) const;
  // True when `type` equals `ancestor` or inherits from it.
  bool is_subtype(std::string_view type, std::string_view ancestor) const;

  // Checks the model invariants; throws SemanticError.
  void validate() const;

  bool operator==(const DomainModel&) const = default;
};

enum class Modality {
  kAlways,
  kSometime,
  kWithin,
  kAtMostOnce,
  kSometimeAfter,
  kSometimeBefore,
  kAlwaysWithin,
  kHoldDuring,
  kHoldAfter,
  kAtEnd,
};

inline constexpr Modality kAllModalities[] = {
    Modality::kAlways,        Modality::kSometime,       Modality::kWithin,
    Modality::kAtMostOnce,    Modality::kSometimeAfter,  Modality::kSometimeBefore,
    Modality::kAlwaysWithin,  Modality::kHoldDuring,     Modality::kHoldAfter,
    Modality::kAtEnd,
};

std::string_view modality_keyword(Modality m);
std::optional<Modality> modality_from_keyword(std::string_view keyword);
std::size_t condition_arity(Modality m);
std::size_t duration_arity(Modality m);

struct TrajectoryConstraint {
  Modality modality = Modality::kAlways;
  std::vector<Condition> conditions;
  std::vector<Rational> durations;

  // Operand counts, duration ranges and hold-during ordering.
  void check_shape() const;

  bool operator==(const TrajectoryConstraint&) const = default;
};

struct Specification {
  std::vector<TrajectoryConstraint> constraints;

  std::size_t size() const { return constraints.size(); }
  bool empty() const { return constraints.empty(); }
  bool operator==(const Specification&) const = default;
};

class ProblemModel {
 public:
  std::string name;
  std::string domain_name;
  std::vector<TypedName> objects;
  std::vector<Atom> init;  // sorted, unique
  Condition goal = Condition::truth();
  Specification base_constraints;

  // Problem objects followed by domain constants.
  std::optional<std::string> object_type(std::string_view object, const DomainModel& domain) const;
  std::vector<std::string> objects_of_type(std::string_view type, const DomainModel& domain) const;

  // Checks the model invariants against `domain`; throws SemanticError.
  void validate(const DomainModel& domain) const;

  bool operator==(const ProblemModel&) const = default;
};

struct PlanStep {
  Rational start;
  std::string action;
  std::vector<std::string> args;
  Rational duration{1};

  bool operator==(const PlanStep&) const = default;
};

struct Plan {
  std::vector<PlanStep> steps;

  std::size_t size() const { return steps.size(); }
  bool empty() const { return steps.empty(); }
  bool operator==(const Plan&) const = default;
};

// Type checks for conditions appearing in problems and constraints (ground)
// or in action schemas (`parameters` names the bound variables).
void typecheck_condition(const Condition& c, const DomainModel& domain, const ProblemModel* problem,
                         const std::vector<TypedName>* parameters = nullptr);
void typecheck_constraint(const TrajectoryConstraint& c, const DomainModel& domain,
                          const ProblemModel& problem);
void typecheck_specification(const Specification& s, const DomainModel& domain,
                             const ProblemModel& problem);

}  // namespace plancritic
