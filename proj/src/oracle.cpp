#include "plancritic/oracle.hpp"

#include <httplib.h>

#include <json.hpp>

#include "plancritic/render.hpp"
#include "plancritic/rng.hpp"

namespace plancritic {

double AdherenceOracle::rate(const Plan& plan, const FeedbackSet& feedback) const {
  if (feedback.statements.empty()) throw std::invalid_argument("adherence rate over an empty feedback set");
  std::size_t adhered = 0;
  for (const auto& f : feedback.statements)
    if (assess(plan, f).adheres) ++adhered;
  return static_cast<double>(adhered) / static_cast<double>(feedback.statements.size());
}

std::vector<AdherenceJudgment> AdherenceOracle::assess_all(const Plan& plan, const FeedbackSet& feedback) const {
  std::vector<AdherenceJudgment> out;
  for (const auto& f : feedback.statements) out.push_back(assess(plan, f));
  return out;
}

ExactOracle::ExactOracle(DomainModel domain, ProblemModel problem, Semantics semantics)
    : domain_(std::move(domain)), problem_(std::move(problem)), semantics_(semantics) {}

AdherenceJudgment ExactOracle::assess(const Plan& plan, const FeedbackStatement& f) const {
  if (!f.ground_truth) throw OracleError("exact oracle needs a ground truth for: " + f.text);
  StateTrajectory trajectory;
  try {
    trajectory = simulate(domain_, problem_, plan);
  } catch (const InapplicableAction&) {
    return AdherenceJudgment::from_score(0.0);
  }
  for (const auto& c : f.ground_truth->constraints)
    if (!check_constraint(c, trajectory, semantics_)) return AdherenceJudgment::from_score(0.0);
  return AdherenceJudgment::from_score(1.0);
}

void NoiseProfile::check() const {
  auto ok = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!ok(false_positive_rate) || !ok(false_negative_rate))
    throw std::invalid_argument("noise rates must lie in [0, 1]");
}

NoisyOracle::NoisyOracle(DomainModel domain, ProblemModel problem, NoiseProfile profile, Semantics semantics)
    : exact_(std::move(domain), std::move(problem), semantics), profile_(profile) {
  profile_.check();
}

bool NoisyOracle::flips(const std::string& plan_text, const std::string& feedback_text, bool exact_adheres,
                        const NoiseProfile& profile) {
  double u = keyed_unit(plan_text, feedback_text, profile.seed);
  return u < (exact_adheres ? profile.false_negative_rate : profile.false_positive_rate);
}

AdherenceJudgment NoisyOracle::assess(const Plan& plan, const FeedbackStatement& f) const {
  AdherenceJudgment exact = exact_.assess(plan, f);
  if (!flips(render_plan(plan), f.text, exact.adheres, profile_)) return exact;
  return AdherenceJudgment::from_score(1.0 - exact.score);
}

std::pair<std::string, std::string> split_url(const std::string& url) {
  auto scheme = url.find("://");
  std::size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  auto slash = url.find('/', host_start);
  if (slash == std::string::npos) return {url, "/"};
  return {url.substr(0, slash), url.substr(slash)};
}

RemoteOracle::RemoteOracle(RemoteOracleConfig config, StepDescriber describe)
    : config_(std::move(config)), describe_(std::move(describe)) {
  if (config_.url.empty()) throw std::invalid_argument("remote oracle url not set");
  if (config_.attempts < 1) config_.attempts = 1;
}

AdherenceJudgment RemoteOracle::assess(const Plan& plan, const FeedbackStatement& f) const {
  nlohmann::json body{{"plan_steps", describe_(plan)}, {"feedback", f.text}};
  auto [base, path] = split_url(config_.url);
  httplib::Client client(base);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  std::string last_error = "no attempt made";
  for (int attempt = 0; attempt < config_.attempts; ++attempt) {
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "status " + std::to_string(res->status);
      continue;
    }
    auto reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.is_object() || !reply.contains("score") || !reply["score"].is_number())
      throw OracleError("malformed oracle response: " + res->body.substr(0, 200));
    double score = reply["score"].get<double>();
    if (!(score >= 0.0 && score <= 1.0)) throw OracleError("oracle score outside [0, 1]");
    return AdherenceJudgment::from_score(score);
  }
  throw OracleError("remote oracle failed: " + last_error);
}

}  // namespace plancritic
