#pragma once

// Candidate atomic constraints over single ground literals for one problem.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "plancritic/pddl.hpp"
#include "plancritic/rng.hpp"

namespace plancritic {

class ConstraintPool {
 public:
  struct Options {
    std::size_t horizon = 10;  // durations are drawn from 1..horizon
    // Predicates no action changes produce constraints that are constant
    // over every trajectory; the GA pool leaves them out.
    bool include_static = true;
  };

  ConstraintPool(const DomainModel& domain, const ProblemModel& problem, Options options);

  // Number of distinct constraints and random access in enumeration order:
  // variants in declaration order, then literals, then durations.
  std::size_t size() const;
  TrajectoryConstraint at(std::size_t index) const;

  const std::vector<Atom>& atoms() const { return atoms_; }
  std::size_t horizon() const { return options_.horizon; }

  // Uniform variant, then uniform operands and durations for it.
  TrajectoryConstraint sample(Rng& rng) const;
  TrajectoryConstraint sample(Modality modality, Rng& rng) const;
  Condition sample_literal(Rng& rng) const;
  std::vector<Rational> sample_durations(Modality modality, Rng& rng) const;

  // Objects that may fill argument `position` of `predicate`.
  const std::vector<std::string>& compatible(const std::string& predicate, std::size_t position) const;

 private:
  std::size_t block_size(Modality m) const;
  std::size_t literal_count() const { return atoms_.size() * 2; }
  Condition literal(std::size_t i) const;

  Options options_;
  std::vector<Atom> atoms_;
  std::map<std::string, std::vector<std::vector<std::string>>> compatible_;
};

// Every pooled constraint, deduplicated by canonical text.
std::vector<TrajectoryConstraint> enumerate_constraints(const DomainModel& domain, const ProblemModel& problem,
                                                        std::size_t horizon);

}  // namespace plancritic
