#include "plancritic/genetic.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

#include <json.hpp>

#include "plancritic/render.hpp"

namespace plancritic {

void GAConfig::check() const {
  if (population_size < 2) throw std::invalid_argument("population size must be at least 2");
  if (!(elite_fraction > 0.0 && elite_fraction < 1.0)) throw std::invalid_argument("elite fraction must lie in (0, 1)");
  if (!(mutation_probability >= 0.0 && mutation_probability <= 1.0))
    throw std::invalid_argument("mutation probability must lie in [0, 1]");
}

namespace {

void collect_atoms(Condition& c, std::vector<Atom*>& out) {
  if (c.kind == Condition::Kind::kAtom) {
    if (!c.atom.args.empty() && c.atom.predicate != kEqualityPredicate) out.push_back(&c.atom);
    return;
  }
  for (auto& op : c.operands) collect_atoms(op, out);
}

void negate_operand(TrajectoryConstraint& c, Rng& rng) {
  std::size_t i = rng.index(c.conditions.size());
  c.conditions[i] = negate(c.conditions[i]);
}

void retype(TrajectoryConstraint& c, const ConstraintPool& pool, Rng& rng) {
  constexpr std::size_t kVariants = std::size(kAllModalities);
  std::size_t current = 0;
  while (kAllModalities[current] != c.modality) ++current;
  std::size_t pick = rng.index(kVariants - 1);
  if (pick >= current) ++pick;
  Modality next = kAllModalities[pick];

  if (condition_arity(next) == 2 && c.conditions.size() == 1) c.conditions.push_back(pool.sample_literal(rng));
  if (condition_arity(next) == 1) c.conditions.resize(1);
  if (duration_arity(next) != c.durations.size()) c.durations = pool.sample_durations(next, rng);
  c.modality = next;
}

bool change_argument(TrajectoryConstraint& c, const ConstraintPool& pool, Rng& rng) {
  std::vector<Atom*> atoms;
  for (auto& cond : c.conditions) collect_atoms(cond, atoms);
  if (atoms.empty()) return false;
  Atom& atom = *atoms[rng.index(atoms.size())];
  std::size_t pos = rng.index(atom.args.size());
  std::vector<std::string> options;
  for (const auto& o : pool.compatible(atom.predicate, pos))
    if (o != atom.args[pos]) options.push_back(o);
  if (options.empty()) return false;
  atom.args[pos] = options[rng.index(options.size())];
  return true;
}

void modify(TrajectoryConstraint& c, const ConstraintPool& pool, Rng& rng, std::string& tag) {
  switch (rng.index(3)) {
    case 0:
      negate_operand(c, rng);
      tag = "negate";
      return;
    case 1:
      retype(c, pool, rng);
      tag = "retype";
      return;
    default:
      if (change_argument(c, pool, rng)) {
        tag = "argument";
      } else {
        negate_operand(c, rng);
        tag = "negate";
      }
  }
}

}  // namespace

Specification mutate(const Specification& spec, const ConstraintPool& pool, Rng& rng, MutationOptions options,
                     std::string* tag) {
  if (spec.empty()) throw std::invalid_argument("cannot mutate an empty specification");
  Specification out = spec;
  std::string branch;
  std::size_t op = rng.index(options.duplicate ? 4 : 3);
  if (op == 1 && out.size() <= 1) op = 2;
  switch (op) {
    case 0:
      out.constraints.push_back(pool.sample(rng));
      branch = "add";
      break;
    case 1:
      out.constraints.erase(out.constraints.begin() + static_cast<std::ptrdiff_t>(rng.index(out.size())));
      branch = "remove";
      break;
    case 2:
      modify(out.constraints[rng.index(out.size())], pool, rng, branch);
      break;
    default: {
      TrajectoryConstraint copy = out.constraints[rng.index(out.size())];
      std::string ignored;
      modify(copy, pool, rng, ignored);
      out.constraints.push_back(std::move(copy));
      branch = "duplicate";
    }
  }
  if (tag) *tag = branch;
  return out;
}

std::pair<Specification, Specification> crossover_at(const Specification& a, const Specification& b, std::size_t p) {
  if (a.empty() || b.empty()) throw std::invalid_argument("crossover needs non-empty parents");
  if (p < 1 || p > std::min(a.size(), b.size())) throw std::out_of_range("crossover point out of range");
  auto splice = [p](const Specification& head, const Specification& tail) {
    Specification s;
    s.constraints.assign(head.constraints.begin(), head.constraints.begin() + static_cast<std::ptrdiff_t>(p - 1));
    s.constraints.insert(s.constraints.end(), tail.constraints.begin() + static_cast<std::ptrdiff_t>(p - 1),
                         tail.constraints.end());
    return s;
  };
  return {splice(a, b), splice(b, a)};
}

std::pair<Specification, Specification> crossover(const Specification& a, const Specification& b, Rng& rng) {
  if (a.empty() || b.empty()) throw std::invalid_argument("crossover needs non-empty parents");
  return crossover_at(a, b, rng.index(std::min(a.size(), b.size())) + 1);
}

Evaluator::Evaluator(const DomainModel& domain, const ProblemModel& problem, const Planner& planner,
                     const AdherenceOracle& oracle, const FeedbackSet& feedback)
    : domain_(domain), problem_(problem), planner_(planner), oracle_(oracle), feedback_(feedback) {}

Evaluator::Entry Evaluator::compute(const Specification& genotype) {
  planner_calls_.fetch_add(1);
  PlannerResult r = planner_.solve(domain_, problem_, genotype);
  Entry e;
  if (r.solved()) {
    e.plan = std::move(r.plan);
    e.fitness = oracle_.rate(*e.plan, feedback_);
  }
  return e;
}

void Evaluator::evaluate(Individual& ind) {
  std::vector<Individual> one{ind};
  evaluate_all(one, 1);
  ind = std::move(one.front());
}

void Evaluator::evaluate_all(std::vector<Individual>& members, std::size_t width) {
  std::vector<std::string> keys(members.size());
  std::vector<std::size_t> pending;  // index of first member per missing key
  {
    std::lock_guard lock(mutex_);
    std::map<std::string, bool> queued;
    for (std::size_t i = 0; i < members.size(); ++i) {
      if (members[i].evaluated) continue;
      keys[i] = canonical_text(members[i].genotype);
      if (cache_.count(keys[i]) || queued.count(keys[i])) continue;
      queued[keys[i]] = true;
      pending.push_back(i);
    }
  }

  std::vector<Entry> results(pending.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < pending.size(); k = next.fetch_add(1)) {
      try {
        results[k] = compute(members[pending[k]].genotype);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::size_t threads = std::min(std::max<std::size_t>(width, 1), pending.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  std::lock_guard lock(mutex_);
  for (std::size_t k = 0; k < pending.size(); ++k) cache_[keys[pending[k]]] = std::move(results[k]);
  std::size_t fresh = 0;
  for (std::size_t i = 0; i < members.size(); ++i) {
    if (members[i].evaluated) continue;
    ++fresh;
    const Entry& e = cache_.at(keys[i]);
    members[i].plan = e.plan;
    members[i].fitness = e.fitness;
    members[i].evaluated = true;
  }
  cache_hits_.fetch_add(fresh - pending.size());
}

namespace {

struct Ranked {
  std::size_t index;
  double fitness;
  std::size_t size;
  std::string text;
};

bool ranks_before(const Ranked& a, const Ranked& b) {
  if (a.fitness != b.fitness) return a.fitness > b.fitness;
  if (a.size != b.size) return a.size < b.size;
  return a.text < b.text;
}

std::vector<Ranked> rank(const std::vector<Individual>& members) {
  std::vector<Ranked> out;
  for (std::size_t i = 0; i < members.size(); ++i)
    out.push_back({i, members[i].fitness, members[i].genotype.size(), canonical_text(members[i].genotype)});
  std::stable_sort(out.begin(), out.end(), ranks_before);
  return out;
}

std::size_t roulette(const std::vector<Individual>& members, Rng& rng) {
  double total = 0.0;
  for (const auto& m : members) total += m.fitness;
  if (total <= 0.0) return rng.index(members.size());
  double u = rng.unit() * total;
  for (std::size_t i = 0; i < members.size(); ++i) {
    u -= members[i].fitness;
    if (u < 0.0) return i;
  }
  // Rounding left a sliver past the last positive entry.
  for (std::size_t i = members.size(); i-- > 0;)
    if (members[i].fitness > 0.0) return i;
  return members.size() - 1;
}

}  // namespace

EvolveResult evolve(const Specification& initial, const DomainModel& domain, const ProblemModel& problem,
                    const ConstraintPool& pool, const Planner& planner, const AdherenceOracle& oracle,
                    const FeedbackSet& feedback, const GAConfig& config, const ProgressCallback& progress) {
  config.check();
  if (initial.empty()) throw std::invalid_argument("initial specification is empty");
  const std::size_t m = config.population_size;
  const MutationOptions mutation{config.duplicate_mutation};
  Rng rng(config.seed);
  Evaluator evaluator(domain, problem, planner, oracle, feedback);
  EvolveResult result;
  std::optional<Ranked> best_rank;

  std::vector<Individual> population;
  population.push_back({initial, std::nullopt, 0.0, false, "initial", 0});
  while (population.size() < m) {
    Individual ind;
    ind.genotype = mutate(initial, pool, rng, mutation, &ind.lineage);
    population.push_back(std::move(ind));
  }

  auto record = [&](std::size_t generation) {
    evaluator.evaluate_all(population, config.parallel_width);
    GenerationStats stats;
    stats.generation = generation;
    double sum = 0.0;
    for (const auto& ind : population) {
      sum += ind.fitness;
      result.log.push_back({generation, canonical_text(ind.genotype), ind.fitness,
                            ind.plan ? static_cast<long>(ind.plan->size()) : -1L, ind.lineage});
    }
    auto ranked = rank(population);
    const Ranked& top = ranked.front();
    stats.best_fitness = top.fitness;
    stats.mean_fitness = sum / static_cast<double>(population.size());
    stats.evaluations = evaluator.planner_calls();
    stats.best_genotype = top.text;
    if (!best_rank || ranks_before(top, *best_rank)) {
      best_rank = top;
      result.best = population[top.index];
    }
    result.history.push_back(stats);
    if (progress) progress(stats);
    return ranked;
  };

  auto ranked = record(0);
  const auto elites = std::min<std::size_t>(m, static_cast<std::size_t>(std::ceil(config.elite_fraction * static_cast<double>(m))));
  for (std::size_t gen = 1; gen <= config.max_generations && result.best.fitness < 1.0; ++gen) {
    std::vector<Individual> next;
    for (std::size_t i = 0; i < elites; ++i) next.push_back(population[ranked[i].index]);
    while (next.size() < m) {
      const Individual& a = population[roulette(population, rng)];
      const Individual& b = population[roulette(population, rng)];
      auto [c1, c2] = crossover(a.genotype, b.genotype, rng);
      for (Specification* child : {&c1, &c2}) {
        if (next.size() >= m) break;
        Individual ind;
        ind.generation = gen;
        ind.lineage = "crossover";
        if (rng.chance(config.mutation_probability)) {
          std::string tag;
          ind.genotype = mutate(*child, pool, rng, mutation, &tag);
          ind.lineage += "+" + tag;
        } else {
          ind.genotype = std::move(*child);
        }
        next.push_back(std::move(ind));
      }
    }
    population = std::move(next);
    ranked = record(gen);
  }
  result.planner_calls = evaluator.planner_calls();
  result.converged = result.best.fitness >= 1.0;
  return result;
}

std::string format_generation_log(const std::vector<GenerationRecord>& log) {
  std::string out;
  for (const auto& r : log) {
    nlohmann::ordered_json j{{"generation", r.generation},
                             {"genotype", r.genotype},
                             {"fitness", r.fitness},
                             {"plan_length", r.plan_length},
                             {"lineage", r.lineage}};
    out += j.dump() + "\n";
  }
  return out;
}

std::string format_history(const std::vector<GenerationStats>& history) {
  std::string out;
  for (const auto& s : history) {
    nlohmann::ordered_json j{{"generation", s.generation},
                             {"best_fitness", s.best_fitness},
                             {"mean_fitness", s.mean_fitness},
                             {"evaluations", s.evaluations},
                             {"best_genotype", s.best_genotype}};
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace plancritic
