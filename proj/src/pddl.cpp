#include "plancritic/pddl.hpp"

#include <algorithm>
#include <set>

namespace plancritic {

Condition Condition::make_atom(Atom a) {
  Condition c;
  c.kind = Kind::kAtom;
  c.atom = std::move(a);
  return c;
}

Condition Condition::make_atom(std::string predicate, std::vector<std::string> args) {
  return make_atom(Atom{std::move(predicate), std::move(args)});
}

Condition Condition::make_not(Condition inner) {
  Condition c;
  c.kind = Kind::kNot;
  c.operands.push_back(std::move(inner));
  return c;
}

Condition Condition::make_and(std::vector<Condition> cs) {
  Condition c;
  c.kind = Kind::kAnd;
  c.operands = std::move(cs);
  return c;
}

Condition Condition::make_or(std::vector<Condition> cs) {
  Condition c;
  c.kind = Kind::kOr;
  c.operands = std::move(cs);
  return c;
}

Condition negate(const Condition& c) {
  if (c.kind == Condition::Kind::kNot) return c.operands.front();
  return Condition::make_not(c);
}

const PredicateSignature* DomainModel::find_predicate(std::string_view n) const {
  for (const auto& p : predicates)
    if (p.name == n) return &p;
  return nullptr;
}

const ActionSchema* DomainModel::find_action(std::string_view n) const {
  for (const auto& a : actions)
    if (a.name == n) return &a;
  return nullptr;
}

bool DomainModel::has_type(std::string_view type) const {
  if (type == kRootType) return true;
  return std::any_of(types.begin(), types.end(), [&](const TypeDecl& t) { return t.name == type; });
}

bool DomainModel::is_subtype(std::string_view type, std::string_view ancestor) const {
  if (ancestor == kRootType || type == ancestor) return true;
  std::string_view current = type;
  // Bounded walk guards against cyclic declarations.
  for (std::size_t hops = 0; hops <= types.size(); ++hops) {
    auto it = std::find_if(types.begin(), types.end(), [&](const TypeDecl& t) { return t.name == current; });
    if (it == types.end()) return false;
    if (it->parent == ancestor) return true;
    if (it->parent == kRootType) return false;
    current = it->parent;
  }
  return false;
}

namespace {

void require_type(const DomainModel& d, const std::string& type) {
  if (!d.has_type(type)) throw SemanticError("undeclared type", type);
}

void check_unique_variables(const std::vector<TypedName>& params, const std::string& owner) {
  std::set<std::string> seen;
  for (const auto& p : params)
    if (!seen.insert(p.name).second) throw SemanticError("duplicate parameter in " + owner, p.name);
}

std::string atom_text(const Atom& a) {
  std::string s = "(" + a.predicate;
  for (const auto& arg : a.args) s += " " + arg;
  return s + ")";
}

void check_atom(const Atom& a, const DomainModel& domain, const ProblemModel* problem,
                const std::vector<TypedName>* params) {
  if (a.predicate == kEqualityPredicate) {
    if (a.args.size() != 2) throw SemanticError("equality takes two arguments", atom_text(a));
  }
  const PredicateSignature* sig = domain.find_predicate(a.predicate);
  if (a.predicate != kEqualityPredicate && sig == nullptr) throw SemanticError("unknown predicate", a.predicate);
  if (sig != nullptr && sig->arity() != a.args.size()) throw SemanticError("wrong arity for predicate", atom_text(a));
  for (std::size_t i = 0; i < a.args.size(); ++i) {
    const std::string& arg = a.args[i];
    std::optional<std::string> type;
    if (!arg.empty() && arg[0] == '?') {
      if (params != nullptr) {
        auto it = std::find_if(params->begin(), params->end(), [&](const TypedName& p) { return p.name == arg; });
        if (it != params->end()) type = it->type;
      }
      if (!type) throw SemanticError("undeclared variable", arg);
    } else {
      if (problem != nullptr) type = problem->object_type(arg, domain);
      if (!type) {
        auto it = std::find_if(domain.constants.begin(), domain.constants.end(),
                               [&](const TypedName& c) { return c.name == arg; });
        if (it != domain.constants.end()) type = it->type;
      }
      if (!type) throw SemanticError("unknown object", arg);
    }
    if (sig != nullptr && !domain.is_subtype(*type, sig->parameters[i].type))
      throw SemanticError("argument type mismatch in " + atom_text(a), arg);
  }
}

}  // namespace

void typecheck_condition(const Condition& c, const DomainModel& domain, const ProblemModel* problem,
                         const std::vector<TypedName>* parameters) {
  switch (c.kind) {
    case Condition::Kind::kAtom:
      check_atom(c.atom, domain, problem, parameters);
      return;
    case Condition::Kind::kNot:
      if (c.operands.size() != 1) throw SemanticError("negation takes one operand", "not");
      break;
    case Condition::Kind::kAnd:
    case Condition::Kind::kOr:
      break;
  }
  for (const auto& op : c.operands) typecheck_condition(op, domain, problem, parameters);
}

void DomainModel::validate() const {
  std::set<std::string> type_names{std::string(kRootType)};
  for (const auto& t : types) {
    if (!type_names.insert(t.name).second && t.name != kRootType) throw SemanticError("duplicate type", t.name);
  }
  for (const auto& t : types) require_type(*this, t.parent);
  for (const auto& t : types)
    if (t.name != kRootType && is_subtype(t.parent, t.name)) throw SemanticError("cyclic type hierarchy", t.name);
  std::set<std::string> seen;
  for (const auto& c : constants) {
    require_type(*this, c.type);
    if (!seen.insert(c.name).second) throw SemanticError("duplicate constant", c.name);
  }
  seen.clear();
  for (const auto& p : predicates) {
    if (!seen.insert(p.name).second) throw SemanticError("duplicate predicate", p.name);
    check_unique_variables(p.parameters, p.name);
    for (const auto& param : p.parameters) require_type(*this, param.type);
  }
  seen.clear();
  for (const auto& a : actions) {
    if (!seen.insert(a.name).second) throw SemanticError("duplicate action", a.name);
    check_unique_variables(a.parameters, a.name);
    for (const auto& param : a.parameters) require_type(*this, param.type);
    typecheck_condition(a.precondition, *this, nullptr, &a.parameters);
    for (const auto& e : a.effects) {
      if (e.atom.predicate == kEqualityPredicate) throw SemanticError("equality in effect of", a.name);
      check_atom(e.atom, *this, nullptr, &a.parameters);
    }
    for (std::size_t i = 0; i < a.effects.size(); ++i)
      for (std::size_t j = i + 1; j < a.effects.size(); ++j)
        if (a.effects[i].atom == a.effects[j].atom && a.effects[i].positive != a.effects[j].positive)
          throw SemanticError("contradictory effects in " + a.name, atom_text(a.effects[i].atom));
    if (a.duration < Rational(0)) throw SemanticError("negative duration", a.name);
  }
}

std::optional<std::string> ProblemModel::object_type(std::string_view object, const DomainModel& domain) const {
  for (const auto& o : objects)
    if (o.name == object) return o.type;
  for (const auto& c : domain.constants)
    if (c.name == object) return c.type;
  return std::nullopt;
}

std::vector<std::string> ProblemModel::objects_of_type(std::string_view type, const DomainModel& domain) const {
  std::vector<std::string> out;
  for (const auto& o : objects)
    if (domain.is_subtype(o.type, type)) out.push_back(o.name);
  for (const auto& c : domain.constants)
    if (domain.is_subtype(c.type, type)) out.push_back(c.name);
  return out;
}

void ProblemModel::validate(const DomainModel& domain) const {
  if (domain_name != domain.name) throw SemanticError("problem refers to a different domain", domain_name);
  std::set<std::string> seen;
  for (const auto& c : domain.constants) seen.insert(c.name);
  for (const auto& o : objects) {
    if (!seen.insert(o.name).second) throw SemanticError("duplicate object", o.name);
    require_type(domain, o.type);
  }
  for (const auto& a : init) {
    if (a.predicate == kEqualityPredicate) throw SemanticError("equality in initial state", atom_text(a));
    try {
      check_atom(a, domain, this, nullptr);
    } catch (const SemanticError& e) {
      throw SemanticError(std::string("bad initial atom (") + e.what() + ")", atom_text(a));
    }
  }
  typecheck_condition(goal, domain, this);
  typecheck_specification(base_constraints, domain, *this);
}

std::string_view modality_keyword(Modality m) {
  switch (m) {
    case Modality::kAlways: return "always";
    case Modality::kSometime: return "sometime";
    case Modality::kWithin: return "within";
    case Modality::kAtMostOnce: return "at-most-once";
    case Modality::kSometimeAfter: return "sometime-after";
    case Modality::kSometimeBefore: return "sometime-before";
    case Modality::kAlwaysWithin: return "always-within";
    case Modality::kHoldDuring: return "hold-during";
    case Modality::kHoldAfter: return "hold-after";
    case Modality::kAtEnd: return "at end";
  }
  return "?";
}

std::optional<Modality> modality_from_keyword(std::string_view keyword) {
  for (Modality m : kAllModalities)
    if (modality_keyword(m) == keyword) return m;
  return std::nullopt;
}

std::size_t condition_arity(Modality m) {
  return (m == Modality::kSometimeAfter || m == Modality::kSometimeBefore) ? 2 : 1;
}

std::size_t duration_arity(Modality m) {
  switch (m) {
    case Modality::kWithin:
    case Modality::kAlwaysWithin:
    case Modality::kHoldAfter:
      return 1;
    case Modality::kHoldDuring:
      return 2;
    default:
      return 0;
  }
}

void TrajectoryConstraint::check_shape() const {
  std::string kw(modality_keyword(modality));
  if (conditions.size() != condition_arity(modality)) throw SemanticError("wrong operand count for", kw);
  if (durations.size() != duration_arity(modality)) throw SemanticError("wrong duration count for", kw);
  for (const auto& d : durations)
    if (d < Rational(0)) throw SemanticError("negative duration in", kw);
  if (modality == Modality::kHoldDuring && !(durations[0] < durations[1]))
    throw SemanticError("hold-during needs its first bound below its second", kw);
}

void typecheck_constraint(const TrajectoryConstraint& c, const DomainModel& domain, const ProblemModel& problem) {
  c.check_shape();
  for (const auto& cond : c.conditions) typecheck_condition(cond, domain, &problem);
}

void typecheck_specification(const Specification& s, const DomainModel& domain, const ProblemModel& problem) {
  for (const auto& c : s.constraints) typecheck_constraint(c, domain, problem);
}

}  // namespace plancritic
