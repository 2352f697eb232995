#include "plancritic/grounding.hpp"

#include <algorithm>
#include <set>

#include "plancritic/render.hpp"

namespace plancritic {

bool CompiledCondition::eval(const Bitset& state) const {
  switch (op) {
    case Op::kTrue: return true;
    case Op::kFalse: return false;
    case Op::kAtom: return test_bit(state, atom);
    case Op::kNot: return !operands.front().eval(state);
    case Op::kAnd:
      for (const auto& o : operands)
        if (!o.eval(state)) return false;
      return true;
    case Op::kOr:
      for (const auto& o : operands)
        if (o.eval(state)) return true;
      return false;
  }
  return false;
}

bool GroundAction::applicable(const Bitset& state) const {
  for (int a : pre_positive)
    if (!test_bit(state, a)) return false;
  for (int a : pre_negative)
    if (test_bit(state, a)) return false;
  return pre_other.eval(state);
}

void GroundAction::apply(Bitset& state) const {
  for (int a : del) clear_bit(state, a);
  for (int a : add) set_bit(state, a);
}

namespace {

struct SchemaLiteral {
  Atom atom;
  bool positive = true;
  int last_param = -1;  // highest parameter index the literal mentions
};

void flatten_conjunction(const Condition& c, std::vector<SchemaLiteral>& literals, std::vector<Condition>& rest) {
  if (c.kind == Condition::Kind::kAnd) {
    for (const auto& op : c.operands) flatten_conjunction(op, literals, rest);
  } else if (c.kind == Condition::Kind::kAtom) {
    literals.push_back({c.atom, true, -1});
  } else if (c.kind == Condition::Kind::kNot && c.operands[0].is_atom()) {
    literals.push_back({c.operands[0].atom, false, -1});
  } else {
    rest.push_back(c);
  }
}

Atom substitute(const Atom& a, const std::vector<TypedName>& params, const std::vector<std::string>& values) {
  Atom out{a.predicate, {}};
  for (const auto& arg : a.args) {
    auto it = std::find_if(params.begin(), params.end(), [&](const TypedName& p) { return p.name == arg; });
    out.args.push_back(it == params.end() ? arg : values[static_cast<std::size_t>(it - params.begin())]);
  }
  return out;
}

Condition substitute(const Condition& c, const std::vector<TypedName>& params, const std::vector<std::string>& values) {
  Condition out = c;
  if (c.kind == Condition::Kind::kAtom) {
    out.atom = substitute(c.atom, params, values);
  } else {
    for (auto& op : out.operands) op = substitute(op, params, values);
  }
  return out;
}

struct RawAction {
  std::string name;
  std::vector<std::string> args;
  std::vector<Atom> pre_pos, pre_neg;
  std::vector<Condition> other;
  std::vector<Atom> add, del;
};

}  // namespace

GroundTask::GroundTask(const DomainModel& domain, const ProblemModel& problem) {
  std::set<std::string> fluent_predicates;
  std::set<std::string> added_predicates;
  for (const auto& a : domain.actions)
    for (const auto& e : a.effects) {
      fluent_predicates.insert(e.atom.predicate);
      if (e.positive) added_predicates.insert(e.atom.predicate);
    }
  const std::set<Atom> init_set(problem.init.begin(), problem.init.end());

  std::vector<RawAction> raw;
  for (const auto& schema : domain.actions) {
    std::vector<SchemaLiteral> literals;
    std::vector<Condition> rest;
    flatten_conjunction(schema.precondition, literals, rest);
    for (auto& lit : literals)
      for (const auto& arg : lit.atom.args)
        for (std::size_t k = 0; k < schema.parameters.size(); ++k)
          if (schema.parameters[k].name == arg) lit.last_param = std::max(lit.last_param, static_cast<int>(k));

    std::vector<std::vector<std::string>> candidates;
    for (const auto& p : schema.parameters) candidates.push_back(problem.objects_of_type(p.type, domain));

    auto literal_possible = [&](const SchemaLiteral& lit, const std::vector<std::string>& values) {
      Atom g = substitute(lit.atom, schema.parameters, values);
      if (g.predicate == kEqualityPredicate) return (g.args[0] == g.args[1]) == lit.positive;
      bool in_init = init_set.count(g) > 0;
      if (!fluent_predicates.count(g.predicate)) return in_init == lit.positive;
      if (lit.positive) return in_init || added_predicates.count(g.predicate) > 0;
      return true;
    };

    std::vector<std::string> values(schema.parameters.size());
    // Depth-first assignment, pruning on literals as soon as they are bound.
    auto assign = [&](auto&& self, std::size_t k) -> void {
      if (k == schema.parameters.size()) {
        RawAction ra;
        ra.name = schema.name;
        ra.args = values;
        for (const auto& lit : literals) {
          Atom g = substitute(lit.atom, schema.parameters, values);
          if (g.predicate == kEqualityPredicate) continue;
          (lit.positive ? ra.pre_pos : ra.pre_neg).push_back(std::move(g));
        }
        for (const auto& c : rest) ra.other.push_back(substitute(c, schema.parameters, values));
        for (const auto& e : schema.effects) {
          Atom g = substitute(e.atom, schema.parameters, values);
          (e.positive ? ra.add : ra.del).push_back(std::move(g));
        }
        raw.push_back(std::move(ra));
        return;
      }
      for (const auto& obj : candidates[k]) {
        values[k] = obj;
        bool ok = true;
        for (const auto& lit : literals)
          if (lit.last_param == static_cast<int>(k) && !literal_possible(lit, values)) {
            ok = false;
            break;
          }
        if (ok) self(self, k + 1);
      }
    };
    bool ground_ok = std::all_of(literals.begin(), literals.end(), [&](const SchemaLiteral& lit) {
      return lit.last_param >= 0 || literal_possible(lit, values);
    });
    if (ground_ok) assign(assign, 0);
  }

  std::set<Atom> universe(init_set.begin(), init_set.end());
  for (const auto& ra : raw)
    for (const auto& a : ra.add) universe.insert(a);
  atoms_.assign(universe.begin(), universe.end());
  for (std::size_t i = 0; i < atoms_.size(); ++i) index_.emplace(atoms_[i], static_cast<int>(i));
  words_ = (atoms_.size() + 63) / 64;
  if (words_ == 0) words_ = 1;
  init_.assign(words_, 0);
  for (const auto& a : problem.init) set_bit(init_, index_.at(a));

  for (auto& ra : raw) {
    GroundAction ga;
    ga.name = ra.name;
    ga.args = ra.args;
    ga.text = render(PlanStep{Rational(0), ra.name, ra.args, Rational(1)});
    bool possible = true;
    for (const auto& a : ra.pre_pos) {
      int idx = atom_index(a);
      if (idx < 0) {
        possible = false;
        break;
      }
      ga.pre_positive.push_back(idx);
    }
    if (!possible) continue;
    for (const auto& a : ra.pre_neg)
      if (int idx = atom_index(a); idx >= 0) ga.pre_negative.push_back(idx);
    if (!ra.other.empty()) ga.pre_other = compile(Condition::make_and(ra.other));
    for (const auto& a : ra.add) ga.add.push_back(atom_index(a));
    for (const auto& a : ra.del)
      if (int idx = atom_index(a); idx >= 0) ga.del.push_back(idx);
    actions_.push_back(std::move(ga));
  }
  std::sort(actions_.begin(), actions_.end(), [](const GroundAction& a, const GroundAction& b) { return a.text < b.text; });
}

int GroundTask::atom_index(const Atom& atom) const {
  auto it = index_.find(atom);
  return it == index_.end() ? -1 : it->second;
}

CompiledCondition GroundTask::compile(const Condition& c) const {
  CompiledCondition out;
  switch (c.kind) {
    case Condition::Kind::kAtom:
      if (c.atom.predicate == kEqualityPredicate) {
        out.op = c.atom.args.size() == 2 && c.atom.args[0] == c.atom.args[1] ? CompiledCondition::Op::kTrue
                                                                            : CompiledCondition::Op::kFalse;
      } else if (int idx = atom_index(c.atom); idx >= 0) {
        out.op = CompiledCondition::Op::kAtom;
        out.atom = idx;
      } else {
        out.op = CompiledCondition::Op::kFalse;
      }
      return out;
    case Condition::Kind::kNot:
      out.op = CompiledCondition::Op::kNot;
      break;
    case Condition::Kind::kAnd:
      out.op = CompiledCondition::Op::kAnd;
      break;
    case Condition::Kind::kOr:
      out.op = CompiledCondition::Op::kOr;
      break;
  }
  for (const auto& op : c.operands) out.operands.push_back(compile(op));
  return out;
}

}  // namespace plancritic
