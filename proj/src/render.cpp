#include "plancritic/render.hpp"

#include <sstream>

namespace plancritic {

std::string render(const Atom& atom) {
  std::string s = "(" + atom.predicate;
  for (const auto& a : atom.args) {
    s += ' ';
    s += a;
  }
  s += ')';
  return s;
}

std::string render(const Condition& c) {
  switch (c.kind) {
    case Condition::Kind::kAtom:
      return render(c.atom);
    case Condition::Kind::kNot:
      return "(not " + render(c.operands.front()) + ")";
    case Condition::Kind::kAnd:
    case Condition::Kind::kOr: {
      std::string s = c.kind == Condition::Kind::kAnd ? "(and" : "(or";
      for (const auto& op : c.operands) s += " " + render(op);
      return s + ")";
    }
  }
  return {};
}

std::string render(const TrajectoryConstraint& c) {
  std::string s = "(";
  s += modality_keyword(c.modality);
  for (const auto& d : c.durations) s += " " + d.str();
  for (const auto& cond : c.conditions) s += " " + render(cond);
  return s + ")";
}

std::string render(const PlanStep& step) {
  std::string s = "(" + step.action;
  for (const auto& a : step.args) s += " " + a;
  return s + ")";
}

std::string render_specification(const Specification& spec) {
  if (spec.constraints.size() == 1) return "(:constraints " + render(spec.constraints[0]) + ")";
  std::string s = "(:constraints (and";
  for (const auto& c : spec.constraints) s += " " + render(c);
  return s + "))";
}

namespace {

std::string typed_list(const std::vector<TypedName>& names) {
  std::string s;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) s += ' ';
    s += names[i].name;
    bool last_of_type = i + 1 == names.size() || names[i + 1].type != names[i].type;
    if (last_of_type) s += " - " + names[i].type;
  }
  return s;
}

}  // namespace

std::string render_domain(const DomainModel& d) {
  std::ostringstream out;
  out << "(define (domain " << d.name << ")\n";
  if (!d.requirements.empty()) {
    out << "  (:requirements";
    for (const auto& r : d.requirements) out << ' ' << r;
    out << ")\n";
  }
  if (!d.types.empty()) {
    out << "  (:types";
    for (const auto& t : d.types) out << ' ' << t.name << " - " << t.parent;
    out << ")\n";
  }
  if (!d.constants.empty()) out << "  (:constants " << typed_list(d.constants) << ")\n";
  out << "  (:predicates";
  for (const auto& p : d.predicates) {
    out << "\n    (" << p.name;
    if (!p.parameters.empty()) out << ' ' << typed_list(p.parameters);
    out << ')';
  }
  out << ")\n";
  for (const auto& a : d.actions) {
    bool durative = a.duration != Rational(1);
    out << "  (:" << (durative ? "durative-action " : "action ") << a.name << "\n";
    out << "    :parameters (" << typed_list(a.parameters) << ")\n";
    std::string effects = "(and";
    for (const auto& e : a.effects) {
      std::string lit = e.positive ? render(e.atom) : "(not " + render(e.atom) + ")";
      effects += " " + (durative ? "(at end " + lit + ")" : lit);
    }
    effects += ")";
    if (durative) {
      out << "    :duration (= ?duration " << a.duration.str() << ")\n";
      out << "    :condition (at start " << render(a.precondition) << ")\n";
    } else {
      out << "    :precondition " << render(a.precondition) << "\n";
    }
    out << "    :effect " << effects << ")\n";
  }
  out << ")\n";
  return out.str();
}

std::string render_problem(const ProblemModel& p, const Specification* extra) {
  std::ostringstream out;
  out << "(define (problem " << p.name << ")\n";
  out << "  (:domain " << p.domain_name << ")\n";
  out << "  (:objects";
  if (!p.objects.empty()) out << "\n    " << typed_list(p.objects);
  out << ")\n";
  out << "  (:init";
  for (const auto& a : p.init) out << "\n    " << render(a);
  out << ")\n";
  out << "  (:goal " << render(p.goal) << ")\n";
  Specification all = p.base_constraints;
  if (extra != nullptr)
    all.constraints.insert(all.constraints.end(), extra->constraints.begin(), extra->constraints.end());
  if (!all.empty()) out << "  " << render_specification(all) << "\n";
  out << ")\n";
  return out.str();
}

std::string render_plan(const Plan& plan) {
  std::string s;
  for (const auto& step : plan.steps)
    s += step.start.str_fixed(3) + ": " + render(step) + " [" + step.duration.str_fixed(3) + "]\n";
  return s;
}

}  // namespace plancritic
