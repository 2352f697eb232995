#pragma once

// Adherence judgments of a plan against natural-language feedback.

#include <chrono>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plancritic/pddl.hpp"
#include "plancritic/trajectory.hpp"

namespace plancritic {

struct FeedbackStatement {
  std::string text;
  // Several constraints may be needed to pin one statement down.
  std::optional<Specification> ground_truth;
};

struct FeedbackSet {
  std::vector<FeedbackStatement> statements;
};

struct AdherenceJudgment {
  double score = 0.0;
  bool adheres = false;

  static AdherenceJudgment from_score(double score) { return {score, score > 0.5}; }
};

class OracleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AdherenceOracle {
 public:
  virtual ~AdherenceOracle() = default;
  virtual AdherenceJudgment assess(const Plan& plan, const FeedbackStatement& f) const = 0;
  virtual std::string id() const = 0;

  // Fraction of statements the plan adheres to. Throws on an empty set.
  double rate(const Plan& plan, const FeedbackSet& feedback) const;
  std::vector<AdherenceJudgment> assess_all(const Plan& plan, const FeedbackSet& feedback) const;
};

// Scores 1 exactly when every ground-truth constraint holds on the plan's
// trajectory.
class ExactOracle final : public AdherenceOracle {
 public:
  ExactOracle(DomainModel domain, ProblemModel problem, Semantics semantics = {});

  AdherenceJudgment assess(const Plan& plan, const FeedbackStatement& f) const override;
  std::string id() const override { return "exact"; }

 private:
  DomainModel domain_;
  ProblemModel problem_;
  Semantics semantics_;
};

struct NoiseProfile {
  double false_positive_rate = 0.0;
  double false_negative_rate = 0.0;
  std::uint64_t seed = 0;

  void check() const;
};

// Exact judgments flipped at the profile's rates. Each flip decision is a
// keyed hash of (plan text, feedback text, seed), so repeated and concurrent
// calls agree.
class NoisyOracle final : public AdherenceOracle {
 public:
  NoisyOracle(DomainModel domain, ProblemModel problem, NoiseProfile profile, Semantics semantics = {});

  AdherenceJudgment assess(const Plan& plan, const FeedbackStatement& f) const override;
  std::string id() const override { return "noisy"; }

  // The flip rule by itself, exposed for measurement.
  static bool flips(const std::string& plan_text, const std::string& feedback_text, bool exact_adheres,
                    const NoiseProfile& profile);

 private:
  ExactOracle exact_;
  NoiseProfile profile_;
};

struct RemoteOracleConfig {
  std::string url;  // e.g. http://127.0.0.1:8090/assess
  std::chrono::milliseconds timeout{10'000};
  int attempts = 2;
};

// POSTs {"plan_steps": [...], "feedback": "..."} and reads {"score": x}.
class RemoteOracle final : public AdherenceOracle {
 public:
  using StepDescriber = std::function<std::vector<std::string>(const Plan&)>;

  RemoteOracle(RemoteOracleConfig config, StepDescriber describe);

  AdherenceJudgment assess(const Plan& plan, const FeedbackStatement& f) const override;
  std::string id() const override { return "remote"; }

 private:
  RemoteOracleConfig config_;
  StepDescriber describe_;
};

// Splits "http://host:port/path" into ("http://host:port", "/path").
std::pair<std::string, std::string> split_url(const std::string& url);

}  // namespace plancritic
