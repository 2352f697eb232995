#pragma once

// Propositional view of a (domain, problem) pair for forward search.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "plancritic/pddl.hpp"

namespace plancritic {

using Bitset = std::vector<std::uint64_t>;

inline bool test_bit(const Bitset& b, int i) { return (b[static_cast<std::size_t>(i) >> 6] >> (i & 63)) & 1U; }
inline void set_bit(Bitset& b, int i) { b[static_cast<std::size_t>(i) >> 6] |= std::uint64_t{1} << (i & 63); }
inline void clear_bit(Bitset& b, int i) { b[static_cast<std::size_t>(i) >> 6] &= ~(std::uint64_t{1} << (i & 63)); }

// Ground condition over atom indices. Atoms outside the task's atom table
// can never be true and compile to constants.
struct CompiledCondition {
  enum class Op { kTrue, kFalse, kAtom, kNot, kAnd, kOr };

  Op op = Op::kTrue;
  int atom = -1;
  std::vector<CompiledCondition> operands;

  bool eval(const Bitset& state) const;
};

struct GroundAction {
  std::string name;
  std::vector<std::string> args;
  std::string text;  // canonical "(name a b)"
  std::vector<int> pre_positive;
  std::vector<int> pre_negative;
  CompiledCondition pre_other;  // non-literal parts of the precondition
  std::vector<int> add;
  std::vector<int> del;

  bool applicable(const Bitset& state) const;
  void apply(Bitset& state) const;
};

class GroundTask {
 public:
  GroundTask(const DomainModel& domain, const ProblemModel& problem);

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<GroundAction>& actions() const { return actions_; }
  const Bitset& initial_state() const { return init_; }
  std::size_t words() const { return words_; }

  int atom_index(const Atom& atom) const;
  CompiledCondition compile(const Condition& ground) const;

 private:
  std::vector<Atom> atoms_;
  std::map<Atom, int> index_;
  std::vector<GroundAction> actions_;
  Bitset init_;
  std::size_t words_ = 0;
};

}  // namespace plancritic
