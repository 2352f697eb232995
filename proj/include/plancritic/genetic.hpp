#pragma once

// Genetic search over specifications. Fitness of a genotype is the oracle's
// adherence rate of the plan the planner produces for it.

#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "plancritic/oracle.hpp"
#include "plancritic/planner.hpp"
#include "plancritic/pool.hpp"
#include "plancritic/rng.hpp"

namespace plancritic {

struct Individual {
  Specification genotype;
  std::optional<Plan> plan;  // empty when unsolvable or timed out
  double fitness = 0.0;
  bool evaluated = false;
  std::string lineage;  // operator that produced this genotype
  std::size_t generation = 0;
};

struct GAConfig {
  std::size_t population_size = 20;
  std::size_t max_generations = 3;  // bred generations after generation 0
  double elite_fraction = 0.5;
  double mutation_probability = 0.5;
  std::uint64_t seed = 0;
  std::size_t parallel_width = 1;
  bool duplicate_mutation = false;

  void check() const;
};

struct MutationOptions {
  bool duplicate = false;
};

// One application of the mutation operator; `tag` receives the branch taken
// ("add", "remove", "negate", "retype", "argument" or "duplicate").
Specification mutate(const Specification& spec, const ConstraintPool& pool, Rng& rng, MutationOptions options = {},
                     std::string* tag = nullptr);

// Single-point crossover at p drawn from 1..min(|a|, |b|): the first p - 1
// constraints of one parent followed by the rest of the other.
std::pair<Specification, Specification> crossover(const Specification& a, const Specification& b, Rng& rng);
std::pair<Specification, Specification> crossover_at(const Specification& a, const Specification& b, std::size_t p);

// Memoizing fitness evaluator shared by one evolve run.
class Evaluator {
 public:
  Evaluator(const DomainModel& domain, const ProblemModel& problem, const Planner& planner,
            const AdherenceOracle& oracle, const FeedbackSet& feedback);

  void evaluate(Individual& ind);
  // Evaluates every unevaluated member, fanning out distinct genotypes over
  // `width` threads. Results do not depend on `width`.
  void evaluate_all(std::vector<Individual>& members, std::size_t width);

  std::size_t planner_calls() const { return planner_calls_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }

 private:
  struct Entry {
    std::optional<Plan> plan;
    double fitness = 0.0;
  };
  Entry compute(const Specification& genotype);

  const DomainModel& domain_;
  const ProblemModel& problem_;
  const Planner& planner_;
  const AdherenceOracle& oracle_;
  const FeedbackSet& feedback_;
  std::mutex mutex_;
  std::map<std::string, Entry> cache_;
  std::atomic<std::size_t> planner_calls_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

struct GenerationStats {
  std::size_t generation = 0;
  double best_fitness = 0.0;
  double mean_fitness = 0.0;
  std::size_t evaluations = 0;  // planner calls so far in the run
  std::string best_genotype;
};

// One record per individual per generation, for failure analysis.
struct GenerationRecord {
  std::size_t generation = 0;
  std::string genotype;
  double fitness = 0.0;
  long plan_length = -1;  // -1 when no plan
  std::string lineage;
};

struct EvolveResult {
  Individual best;
  std::vector<GenerationStats> history;
  std::vector<GenerationRecord> log;
  std::size_t planner_calls = 0;
  bool converged = false;  // some individual reached fitness 1.0
};

using ProgressCallback = std::function<void(const GenerationStats&)>;

EvolveResult evolve(const Specification& initial, const DomainModel& domain, const ProblemModel& problem,
                    const ConstraintPool& pool, const Planner& planner, const AdherenceOracle& oracle,
                    const FeedbackSet& feedback, const GAConfig& config, const ProgressCallback& progress = {});

// Line-delimited JSON, one object per record.
std::string format_generation_log(const std::vector<GenerationRecord>& log);
std::string format_history(const std::vector<GenerationStats>& history);

}  // namespace plancritic
