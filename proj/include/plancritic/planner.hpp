#pragma once

#include <atomic>
#include <chrono>
#include <cstddef>
#include <filesystem>
#include <memory>
#include <mutex>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <vector>

#include "plancritic/pddl.hpp"

namespace plancritic {

struct PlannerResult {
  enum class Outcome { kSolved, kUnsolvable, kTimeout };

  Outcome outcome = Outcome::kUnsolvable;
  Plan plan;  // meaningful only when solved
  std::chrono::milliseconds wall_time{0};
  std::string planner_id;

  bool solved() const { return outcome == Outcome::kSolved; }
};

std::string_view outcome_name(PlannerResult::Outcome outcome);

// Infrastructure failure: the planner could not be run or its output could
// not be understood. Distinct from an unsolvable problem.
class PlannerError : public std::runtime_error {
 public:
  enum class Kind { kProcessFailure, kParseFailure, kUnsupported };

  PlannerError(Kind kind, const std::string& message) : std::runtime_error(message), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class Planner {
 public:
  virtual ~Planner() = default;
  // `spec` is conjoined with the problem's own base constraints.
  virtual PlannerResult solve(const DomainModel& domain, const ProblemModel& problem,
                              const Specification& spec) const = 0;
  virtual std::string id() const = 0;
};

// Breadth-first forward search over ground actions with unit step durations
// (step i starts at time i). Nodes are deduplicated on the world state plus
// the state of every constraint monitor, so the first accepting node is the
// shortest plan, ties broken by the canonical text of its actions.
class BuiltinPlanner final : public Planner {
 public:
  struct Options {
    std::size_t horizon = 10;
    std::chrono::milliseconds timeout{60'000};
    std::size_t max_nodes = 2'000'000;
  };

  BuiltinPlanner() = default;
  explicit BuiltinPlanner(Options options) : options_(options) {}

  PlannerResult solve(const DomainModel& domain, const ProblemModel& problem,
                      const Specification& spec) const override;
  std::string id() const override { return "builtin"; }

  const Options& options() const { return options_; }
  std::size_t calls() const { return calls_.load(); }

 private:
  Options options_;
  mutable std::atomic<std::size_t> calls_{0};
};

PlannerResult plan_builtin(const DomainModel& domain, const ProblemModel& problem, const Specification& spec,
                           std::size_t horizon, std::chrono::milliseconds timeout);

struct ExternalPlannerConfig {
  std::filesystem::path executable;
  // Arguments; must contain "{domain}" and "{problem}" exactly once each.
  std::vector<std::string> arguments{"{domain}", "{problem}"};
  std::chrono::milliseconds timeout{60'000};
  std::filesystem::path working_directory;  // empty: inherit
  std::size_t max_concurrent = 2;

  void check() const;
};

class ExternalPlanner final : public Planner {
 public:
  explicit ExternalPlanner(ExternalPlannerConfig config);

  PlannerResult solve(const DomainModel& domain, const ProblemModel& problem,
                      const Specification& spec) const override;
  std::string id() const override { return "external:" + config_.executable.filename().string(); }

 private:
  ExternalPlannerConfig config_;
  std::shared_ptr<std::counting_semaphore<64>> slots_;
};

PlannerResult plan_external(const ExternalPlannerConfig& config, const DomainModel& domain,
                            const ProblemModel& problem, const Specification& spec);

// Extracts the last plan block from planner output. Returns Unsolvable when
// a no-solution sentinel is present and no plan was printed.
PlannerResult interpret_planner_output(const std::string& output, const DomainModel& domain);

}  // namespace plancritic
