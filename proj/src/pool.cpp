#include "plancritic/pool.hpp"

#include <algorithm>
#include <iterator>
#include <set>

namespace plancritic {

ConstraintPool::ConstraintPool(const DomainModel& domain, const ProblemModel& problem, Options options)
    : options_(options) {
  if (options_.horizon == 0) throw std::invalid_argument("constraint pool horizon must be positive");
  std::set<std::string> fluent;
  for (const auto& a : domain.actions)
    for (const auto& e : a.effects) fluent.insert(e.atom.predicate);

  for (const auto& sig : domain.predicates) {
    if (sig.name == kEqualityPredicate) continue;
    auto& slots = compatible_[sig.name];
    for (const auto& p : sig.parameters) slots.push_back(problem.objects_of_type(p.type, domain));
    if (!options_.include_static && !fluent.count(sig.name)) continue;
    std::vector<std::string> args(sig.arity());
    auto fill = [&](auto&& self, std::size_t k) -> void {
      if (k == args.size()) {
        atoms_.push_back({sig.name, args});
        return;
      }
      for (const auto& o : slots[k]) {
        args[k] = o;
        self(self, k + 1);
      }
    };
    fill(fill, 0);
  }
  std::sort(atoms_.begin(), atoms_.end());
  atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
  if (atoms_.empty()) throw std::invalid_argument("constraint pool is empty: no ground atoms");
}

Condition ConstraintPool::literal(std::size_t i) const {
  Condition c = Condition::make_atom(atoms_[i / 2]);
  return i % 2 ? Condition::make_not(std::move(c)) : c;
}

std::size_t ConstraintPool::block_size(Modality m) const {
  const std::size_t lits = literal_count();
  const std::size_t h = options_.horizon;
  std::size_t n = condition_arity(m) == 2 ? lits * lits : lits;
  switch (duration_arity(m)) {
    case 1: return n * h;
    case 2: return n * (h * (h - 1) / 2);
    default: return n;
  }
}

std::size_t ConstraintPool::size() const {
  std::size_t n = 0;
  for (Modality m : kAllModalities) n += block_size(m);
  return n;
}

TrajectoryConstraint ConstraintPool::at(std::size_t index) const {
  for (Modality m : kAllModalities) {
    std::size_t block = block_size(m);
    if (index >= block) {
      index -= block;
      continue;
    }
    TrajectoryConstraint c;
    c.modality = m;
    const std::size_t lits = literal_count();
    const auto h = static_cast<std::int64_t>(options_.horizon);
    std::size_t per_operands = block_size(m) / (condition_arity(m) == 2 ? lits * lits : lits);
    std::size_t operands = index / per_operands;
    std::size_t dur = index % per_operands;
    if (condition_arity(m) == 2) {
      c.conditions = {literal(operands / lits), literal(operands % lits)};
    } else {
      c.conditions = {literal(operands)};
    }
    if (duration_arity(m) == 1) {
      c.durations = {Rational(static_cast<std::int64_t>(dur) + 1)};
    } else if (duration_arity(m) == 2) {
      // Pairs (d1, d2) with 1 <= d1 < d2 <= h in lexicographic order.
      std::int64_t d1 = 1;
      auto rest = static_cast<std::int64_t>(dur);
      while (rest >= h - d1) {
        rest -= h - d1;
        ++d1;
      }
      c.durations = {Rational(d1), Rational(d1 + 1 + rest)};
    }
    return c;
  }
  throw std::out_of_range("constraint pool index out of range");
}

Condition ConstraintPool::sample_literal(Rng& rng) const { return literal(rng.index(literal_count())); }

std::vector<Rational> ConstraintPool::sample_durations(Modality modality, Rng& rng) const {
  const auto h = options_.horizon;
  switch (duration_arity(modality)) {
    case 1: return {Rational(static_cast<std::int64_t>(rng.index(h)) + 1)};
    case 2: {
      if (h < 2) return {Rational(0), Rational(1)};
      auto a = static_cast<std::int64_t>(rng.index(h)) + 1;
      auto b = static_cast<std::int64_t>(rng.index(h - 1)) + 1;
      if (b >= a) ++b;
      return {Rational(std::min(a, b)), Rational(std::max(a, b))};
    }
    default: return {};
  }
}

TrajectoryConstraint ConstraintPool::sample(Modality modality, Rng& rng) const {
  TrajectoryConstraint c;
  c.modality = modality;
  for (std::size_t i = 0; i < condition_arity(modality); ++i) c.conditions.push_back(sample_literal(rng));
  c.durations = sample_durations(modality, rng);
  return c;
}

TrajectoryConstraint ConstraintPool::sample(Rng& rng) const {
  constexpr std::size_t kVariants = std::size(kAllModalities);
  return sample(kAllModalities[rng.index(kVariants)], rng);
}

const std::vector<std::string>& ConstraintPool::compatible(const std::string& predicate, std::size_t position) const {
  static const std::vector<std::string> kNone;
  auto it = compatible_.find(predicate);
  if (it == compatible_.end() || position >= it->second.size()) return kNone;
  return it->second[position];
}

std::vector<TrajectoryConstraint> enumerate_constraints(const DomainModel& domain, const ProblemModel& problem,
                                                        std::size_t horizon) {
  ConstraintPool pool(domain, problem, {horizon, true});
  std::vector<TrajectoryConstraint> out;
  out.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) out.push_back(pool.at(i));
  return out;
}

}  // namespace plancritic
