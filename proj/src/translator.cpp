#include "plancritic/translator.hpp"

#include <httplib.h>

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "plancritic/genetic.hpp"
#include "plancritic/parser.hpp"
#include "plancritic/pool.hpp"
#include "plancritic/render.hpp"
#include "plancritic/rng.hpp"

#ifndef PLANCRITIC_PROMPT_DIR
#define PLANCRITIC_PROMPT_DIR "prompts"
#endif

namespace plancritic {

std::string normalize_statement(std::string_view text) {
  std::string out;
  bool gap = false;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      if (gap && !out.empty()) out += ' ';
      out += static_cast<char>(std::tolower(c));
      gap = false;
    } else if (c != '\'') {
      gap = true;
    }
  }
  return out;
}

TemplateTranslator::TemplateTranslator(std::vector<ArchetypeRecord> records, double error_rate, std::uint64_t seed,
                                       std::size_t horizon)
    : records_(std::move(records)), error_rate_(error_rate), seed_(seed), horizon_(horizon) {
  if (!(error_rate_ >= 0.0 && error_rate_ <= 1.0)) throw std::invalid_argument("error rate must lie in [0, 1]");
  for (std::size_t i = 0; i < records_.size(); ++i) {
    index_.emplace(normalize_statement(records_[i].nl_template), i);
    for (const auto& r : records_[i].rephrasings) index_.emplace(normalize_statement(r), i);
  }
}

const ArchetypeRecord* TemplateTranslator::match(const std::string& text) const {
  auto it = index_.find(normalize_statement(text));
  return it == index_.end() ? nullptr : &records_[it->second];
}

TranslationOutcome TemplateTranslator::translate(const FeedbackStatement& f, const DomainModel& domain,
                                                 const ProblemModel& problem) const {
  TranslationOutcome out;
  const ArchetypeRecord* record = match(f.text);
  if (!record) {
    out.failure = "no template matches the statement";
    return out;
  }
  out.mid_level.text = record->mid_level;
  Specification spec = record->ground_truth;
  try {
    typecheck_specification(spec, domain, problem);
  } catch (const SemanticError& e) {
    out.failure = std::string("template does not fit this problem: ") + e.what();
    return out;
  }
  if (error_rate_ > 0.0 && keyed_unit(normalize_statement(f.text), "inject", seed_) < error_rate_) {
    ConstraintPool pool(domain, problem, {horizon_, false});
    Rng rng(splitmix64(fnv1a(normalize_statement(f.text)) ^ seed_));
    spec = mutate(spec, pool, rng);
    out.injected_error = true;
  }
  out.constraint = std::move(spec);
  return out;
}

HttpChatClient::HttpChatClient(ChatEndpointConfig config) : config_(std::move(config)) {}

std::string HttpChatClient::complete(const std::string&, const std::string&, const std::string& prompt) const {
  auto [base, path] = split_url(config_.url);
  httplib::Client client(base);
  auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout).count();
  client.set_connection_timeout(secs);
  client.set_read_timeout(secs);
  httplib::Headers headers;
  if (const char* token = std::getenv(config_.token_env.c_str()); token && *token)
    headers.emplace("Authorization", std::string("Bearer ") + token);
  nlohmann::json body{{"model", config_.model},
                      {"temperature", 0},
                      {"messages", {{{"role", "user"}, {"content", prompt}}}}};
  auto res = client.Post(path, headers, body.dump(), "application/json");
  if (!res) throw TranslationError("chat endpoint unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200) throw TranslationError("chat endpoint returned status " + std::to_string(res->status));
  auto reply = nlohmann::json::parse(res->body, nullptr, false);
  try {
    return reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const std::exception&) {
    throw TranslationError("malformed chat response");
  }
}

ReplayChatClient::ReplayChatClient(const std::filesystem::path& fixture) {
  std::ifstream in(fixture);
  if (!in) throw TranslationError("cannot read replay fixture " + fixture.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_array()) throw TranslationError("replay fixture must be a JSON list");
  for (const auto& e : j)
    responses_[{e.at("stage").get<std::string>(), normalize_statement(e.at("feedback").get<std::string>())}] =
        e.at("response").get<std::string>();
}

std::string ReplayChatClient::complete(const std::string& stage, const std::string& key, const std::string&) const {
  auto it = responses_.find({stage, normalize_statement(key)});
  if (it == responses_.end()) throw TranslationError("no recorded " + stage + " response for: " + key);
  return it->second;
}

namespace {

std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw TranslationError("cannot read prompt template " + p.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

PromptTemplates PromptTemplates::load(const std::filesystem::path& directory) {
  return {read_text(directory / "feedback_to_mid_level.txt"), read_text(directory / "mid_level_to_constraint.txt"),
          read_text(directory / "constraint_retry.txt")};
}

std::filesystem::path default_prompt_dir() {
  if (const char* env = std::getenv("PLANCRITIC_PROMPTS"); env && *env) return env;
  return PLANCRITIC_PROMPT_DIR;
}

std::string fill_template(std::string text, const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    const std::string needle = "{{" + key + "}}";
    for (auto p = text.find(needle); p != std::string::npos; p = text.find(needle, p + value.size()))
      text.replace(p, needle.size(), value);
  }
  return text;
}

std::string extract_constraint_text(const std::string& reply) {
  std::string out;
  std::size_t i = 0;
  while (i < reply.size()) {
    if (reply[i] != '(') {
      ++i;
      continue;
    }
    int depth = 0;
    std::size_t j = i;
    for (; j < reply.size(); ++j) {
      if (reply[j] == '(') ++depth;
      if (reply[j] == ')' && --depth == 0) break;
    }
    if (j >= reply.size()) break;
    std::string expr = reply.substr(i, j - i + 1);
    std::size_t k = 1;
    while (k < expr.size() && std::isspace(static_cast<unsigned char>(expr[k]))) ++k;
    std::size_t end = k;
    while (end < expr.size() && !std::isspace(static_cast<unsigned char>(expr[end])) && expr[end] != '(' &&
           expr[end] != ')')
      ++end;
    std::string head = expr.substr(k, end - k);
    for (auto& c : head) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (head == "and" || head == ":constraints" || head == "at" || modality_from_keyword(head)) {
      if (!out.empty()) out += ' ';
      out += expr;
      i = j + 1;
    } else {
      ++i;
    }
  }
  return out;
}

RemoteTranslator::RemoteTranslator(std::shared_ptr<const ChatClient> client, PromptTemplates prompts)
    : client_(std::move(client)), prompts_(std::move(prompts)) {}

TranslationOutcome RemoteTranslator::translate(const FeedbackStatement& f, const DomainModel& domain,
                                               const ProblemModel& problem) const {
  std::string predicates, objects;
  for (const auto& p : domain.predicates) {
    predicates += "(" + p.name;
    for (const auto& a : p.parameters) predicates += " " + a.name + " - " + a.type;
    predicates += ")\n";
  }
  for (const auto& o : problem.objects) objects += o.name + " - " + o.type + "\n";
  std::map<std::string, std::string> values{{"predicates", predicates}, {"objects", objects}, {"feedback", f.text}};

  TranslationOutcome out;
  out.mid_level.text = client_->complete("mid_level", f.text, fill_template(prompts_.to_mid_level, values));
  values["mid_level"] = out.mid_level.text;
  std::string prompt = fill_template(prompts_.to_constraint, values);
  std::string reply = client_->complete("constraint", f.text, prompt);
  for (int attempt = 0; attempt < 2; ++attempt) {
    try {
      std::string text = extract_constraint_text(reply);
      if (text.empty()) throw ParseError("reply contains no constraint", 1, 1);
      Specification spec = parse_specification(text, domain, problem);
      if (spec.empty()) throw ParseError("reply contains no constraint", 1, 1);
      out.constraint = std::move(spec);
      return out;
    } catch (const std::exception& e) {
      out.failure = e.what();
      if (attempt == 1) break;
      values["error"] = e.what();
      values["previous"] = reply;
      reply = client_->complete("constraint_retry", f.text, prompt + fill_template(prompts_.retry, values));
    }
  }
  return out;
}

namespace {

std::string type_phrase(const std::string& object, const PhraseTable& phrases, const DomainModel& domain,
                        const ProblemModel& problem) {
  auto type = problem.object_type(object, domain);
  if (!type) return "object";
  auto it = phrases.types.find(*type);
  if (it != phrases.types.end()) return it->second;
  std::string t = *type;
  for (auto& c : t)
    if (c == '_') c = ' ';
  return t;
}

// Replaces {i} with args[i] and {typei} with the phrase for that object's type.
std::string fill_args(const std::string& pattern, const std::vector<std::string>& args,
                      const std::function<std::string(const std::string&)>& type_of) {
  std::string out;
  for (std::size_t i = 0; i < pattern.size(); ++i) {
    if (pattern[i] == '{') {
      auto close = pattern.find('}', i);
      if (close != std::string::npos) {
        std::string key = pattern.substr(i + 1, close - i - 1);
        bool typed = key.rfind("type", 0) == 0;
        std::string digits = typed ? key.substr(4) : key;
        if (!digits.empty() && std::all_of(digits.begin(), digits.end(), ::isdigit)) {
          std::size_t k = std::stoul(digits);
          if (k < args.size()) {
            out += typed ? type_of(args[k]) : args[k];
            i = close;
            continue;
          }
        }
      }
    }
    out += pattern[i];
  }
  return out;
}

std::string verbalize_condition(const Condition& c, const PhraseTable& phrases) {
  switch (c.kind) {
    case Condition::Kind::kAtom: {
      auto it = phrases.predicates.find(c.atom.predicate);
      if (it == phrases.predicates.end()) return render(c.atom);
      return fill_args(it->second, c.atom.args, [](const std::string& o) { return o; });
    }
    case Condition::Kind::kNot: return "it is not the case that " + verbalize_condition(c.operands[0], phrases);
    case Condition::Kind::kAnd:
    case Condition::Kind::kOr: {
      if (c.operands.empty()) return c.kind == Condition::Kind::kAnd ? "true" : "false";
      std::string joiner = c.kind == Condition::Kind::kAnd ? " and " : " or ";
      std::string out;
      for (std::size_t i = 0; i < c.operands.size(); ++i)
        out += (i ? joiner : "") + verbalize_condition(c.operands[i], phrases);
      return out;
    }
  }
  return render(c);
}

}  // namespace

std::vector<std::string> describe_plan(const Plan& plan, const PhraseTable& phrases, const DomainModel& domain,
                                       const ProblemModel& problem) {
  std::vector<std::string> out;
  auto type_of = [&](const std::string& o) { return type_phrase(o, phrases, domain, problem); };
  for (const auto& step : plan.steps) {
    auto it = phrases.actions.find(step.action);
    if (it == phrases.actions.end()) {
      out.push_back("(unrecognized) " + render(step));
    } else {
      out.push_back(fill_args(it->second, step.args, type_of));
    }
  }
  return out;
}

std::string verbalize(const TrajectoryConstraint& c, const PhraseTable& phrases) {
  auto cond = [&](std::size_t i) { return verbalize_condition(c.conditions.at(i), phrases); };
  auto dur = [&](std::size_t i) { return c.durations.at(i).str(); };
  switch (c.modality) {
    case Modality::kAlways: return "at all times, " + cond(0);
    case Modality::kSometime: return "at some point, " + cond(0);
    case Modality::kWithin: return "by time " + dur(0) + ", " + cond(0);
    case Modality::kAtMostOnce: return cond(0) + " during at most one stretch of the plan";
    case Modality::kSometimeAfter: return "whenever " + cond(0) + ", afterwards " + cond(1);
    case Modality::kSometimeBefore: return "whenever " + cond(0) + ", earlier " + cond(1);
    case Modality::kAlwaysWithin: return "from any point, within " + dur(0) + " time steps " + cond(0);
    case Modality::kHoldDuring: return "from time " + dur(0) + " until before time " + dur(1) + ", " + cond(0);
    case Modality::kHoldAfter: return "after time " + dur(0) + ", " + cond(0);
    case Modality::kAtEnd: return "at the end of the plan, " + cond(0);
  }
  return render(c);
}

}  // namespace plancritic
