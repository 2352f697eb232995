#pragma once

// Natural-language feedback to trajectory constraints, and plan steps to
// natural language.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "plancritic/oracle.hpp"
#include "plancritic/pddl.hpp"
#include "plancritic/scenario.hpp"

namespace plancritic {

struct MidLevelConstraint {
  std::string text;
};

struct TranslationOutcome {
  MidLevelConstraint mid_level;
  std::optional<Specification> constraint;  // empty on failure
  std::string failure;
  bool injected_error = false;  // template translator only

  bool ok() const { return constraint.has_value(); }
};

class TranslationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class FeedbackTranslator {
 public:
  virtual ~FeedbackTranslator() = default;
  virtual TranslationOutcome translate(const FeedbackStatement& f, const DomainModel& domain,
                                       const ProblemModel& problem) const = 0;
  virtual std::string id() const = 0;
};

// Lowercase words separated by single spaces.
std::string normalize_statement(std::string_view text);

// Looks statements up among the rephrasings of known records and returns the
// record's ground truth. With a positive error rate, a keyed hash of the
// statement decides whether one mutation is applied to it.
class TemplateTranslator final : public FeedbackTranslator {
 public:
  TemplateTranslator(std::vector<ArchetypeRecord> records, double error_rate = 0.0, std::uint64_t seed = 0,
                     std::size_t horizon = 10);

  TranslationOutcome translate(const FeedbackStatement& f, const DomainModel& domain,
                               const ProblemModel& problem) const override;
  std::string id() const override { return "template"; }

  const ArchetypeRecord* match(const std::string& text) const;

 private:
  std::vector<ArchetypeRecord> records_;
  std::map<std::string, std::size_t> index_;
  double error_rate_;
  std::uint64_t seed_;
  std::size_t horizon_;
};

// Text completion backend. `key` identifies the statement being translated
// so that recorded responses can be replayed.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(const std::string& stage, const std::string& key, const std::string& prompt) const = 0;
};

struct ChatEndpointConfig {
  std::string url = "https://api.openai.com/v1/chat/completions";
  std::string model = "gpt-4";
  std::string token_env = "OPENAI_API_KEY";
  std::chrono::milliseconds timeout{60'000};
};

// Chat-completions style HTTP endpoint.
class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(ChatEndpointConfig config);
  std::string complete(const std::string& stage, const std::string& key, const std::string& prompt) const override;

 private:
  ChatEndpointConfig config_;
};

// Serves responses recorded in a JSON file: a list of {stage, feedback, response}.
class ReplayChatClient final : public ChatClient {
 public:
  explicit ReplayChatClient(const std::filesystem::path& fixture);
  std::string complete(const std::string& stage, const std::string& key, const std::string& prompt) const override;

 private:
  std::map<std::pair<std::string, std::string>, std::string> responses_;
};

struct PromptTemplates {
  std::string to_mid_level;   // placeholders: {{predicates}} {{objects}} {{feedback}}
  std::string to_constraint;  // adds {{mid_level}}
  std::string retry;          // {{error}} {{previous}}

  static PromptTemplates load(const std::filesystem::path& directory);
};

std::filesystem::path default_prompt_dir();

// Two prompts per statement; the constraint reply is parsed and retried once
// with the parse error appended.
class RemoteTranslator final : public FeedbackTranslator {
 public:
  RemoteTranslator(std::shared_ptr<const ChatClient> client, PromptTemplates prompts);

  TranslationOutcome translate(const FeedbackStatement& f, const DomainModel& domain,
                               const ProblemModel& problem) const override;
  std::string id() const override { return "remote"; }

 private:
  std::shared_ptr<const ChatClient> client_;
  PromptTemplates prompts_;
};

// Pulls constraint text out of a model reply (code fences and prose around
// the s-expressions are dropped).
std::string extract_constraint_text(const std::string& reply);

std::string fill_template(std::string text, const std::map<std::string, std::string>& values);

// One sentence per step from the phrase table; unknown actions fall back to
// "(unrecognized) (name args)".
std::vector<std::string> describe_plan(const Plan& plan, const PhraseTable& phrases, const DomainModel& domain,
                                       const ProblemModel& problem);

// English rendering of a constraint for training statements.
std::string verbalize(const TrajectoryConstraint& c, const PhraseTable& phrases);

}  // namespace plancritic
