#include "plancritic/parser.hpp"

#include <algorithm>
#include <cctype>
#include <set>

namespace plancritic {

namespace {

constexpr std::size_t kMaxDepth = 256;

struct SExpr {
  bool is_list = false;
  std::string atom;
  std::vector<SExpr> items;
  std::size_t line = 1;
  std::size_t column = 1;
};

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool is_keyword(const SExpr& e, std::string_view kw) { return !e.is_list && lower(e.atom) == kw; }

[[noreturn]] void fail(const SExpr& at, const std::string& message) { throw ParseError(message, at.line, at.column); }

// Reads every top-level expression. Iterative so hostile nesting cannot
// exhaust the stack; depth is still bounded for the recursive consumers.
std::vector<SExpr> read_all(std::string_view text) {
  std::vector<SExpr> stack(1);
  stack[0].is_list = true;
  std::size_t line = 1, column = 1;
  std::size_t i = 0;
  auto advance = [&](char c) {
    if (c == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ';') {
      while (i < text.size() && text[i] != '\n') {
        advance(text[i]);
        ++i;
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(c);
      ++i;
      continue;
    }
    if (c == '(') {
      if (stack.size() > kMaxDepth) throw ParseError("nesting too deep", line, column);
      SExpr list;
      list.is_list = true;
      list.line = line;
      list.column = column;
      stack.push_back(std::move(list));
      advance(c);
      ++i;
      continue;
    }
    if (c == ')') {
      if (stack.size() == 1) throw ParseError("unbalanced ')'", line, column);
      SExpr done = std::move(stack.back());
      stack.pop_back();
      stack.back().items.push_back(std::move(done));
      advance(c);
      ++i;
      continue;
    }
    SExpr tok;
    tok.line = line;
    tok.column = column;
    while (i < text.size()) {
      char d = text[i];
      if (d == '(' || d == ')' || d == ';' || std::isspace(static_cast<unsigned char>(d))) break;
      if (static_cast<unsigned char>(d) < 0x21 || static_cast<unsigned char>(d) > 0x7e)
        throw ParseError("unexpected character", line, column);
      tok.atom.push_back(d);
      advance(d);
      ++i;
    }
    stack.back().items.push_back(std::move(tok));
  }
  if (stack.size() != 1) throw ParseError("unterminated '('", stack.back().line, stack.back().column);
  return std::move(stack[0].items);
}

SExpr read_one(std::string_view text, const char* what) {
  auto all = read_all(text);
  if (all.empty()) throw ParseError(std::string("empty input, expected ") + what, 1, 1);
  if (all.size() > 1) fail(all[1], std::string("trailing input after ") + what);
  return std::move(all[0]);
}

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isalnum(c) || c == '_' || c == '-'; });
}

bool is_variable(std::string_view s) { return s.size() > 1 && s[0] == '?' && is_identifier(s.substr(1)); }

const std::string& expect_identifier(const SExpr& e, const char* what) {
  if (e.is_list || !is_identifier(e.atom)) fail(e, std::string("expected ") + what);
  return e.atom;
}

const SExpr& expect_list(const SExpr& e, const char* what) {
  if (!e.is_list) fail(e, std::string("expected ") + what);
  return e;
}

// `a b - t c` style lists; untyped names get the root type.
std::vector<TypedName> parse_typed_list(const std::vector<SExpr>& items, std::size_t from, bool variables) {
  std::vector<TypedName> out;
  std::vector<std::string> pending;
  for (std::size_t i = from; i < items.size(); ++i) {
    const SExpr& e = items[i];
    if (e.is_list) fail(e, "unexpected list in typed list");
    if (e.atom == "-") {
      if (pending.empty() || i + 1 >= items.size()) fail(e, "dangling '-' in typed list");
      const SExpr& type = items[++i];
      if (type.is_list) fail(type, "'either' types are not supported");
      std::string type_name = expect_identifier(type, "type name");
      for (auto& n : pending) out.push_back({std::move(n), type_name});
      pending.clear();
      continue;
    }
    if (variables ? !is_variable(e.atom) : !is_identifier(e.atom))
      fail(e, variables ? "expected variable" : "expected name");
    pending.push_back(e.atom);
  }
  for (auto& n : pending) out.push_back({std::move(n), std::string(kRootType)});
  return out;
}

Atom parse_atom(const SExpr& e, bool allow_variables) {
  if (!e.is_list || e.items.empty()) fail(e, "expected predicate");
  const SExpr& head = e.items[0];
  if (head.is_list) fail(head, "expected predicate name");
  Atom a;
  if (head.atom == kEqualityPredicate) {
    a.predicate = std::string(kEqualityPredicate);
  } else {
    a.predicate = expect_identifier(head, "predicate name");
  }
  for (std::size_t i = 1; i < e.items.size(); ++i) {
    const SExpr& arg = e.items[i];
    if (arg.is_list) fail(arg, "expected argument");
    if (is_variable(arg.atom)) {
      if (!allow_variables) fail(arg, "variable outside action schema");
    } else if (!is_identifier(arg.atom)) {
      fail(arg, "expected object name");
    }
    a.args.push_back(arg.atom);
  }
  return a;
}

bool is_reserved(const std::string& head) {
  static const std::set<std::string> reserved = {"and", "or", "not", "imply", "forall", "exists", "when",
                                                 "preference"};
  return reserved.count(head) > 0;
}

Condition parse_condition_expr(const SExpr& e, bool allow_variables, std::size_t depth) {
  if (depth > kMaxDepth) fail(e, "condition nested too deep");
  if (!e.is_list || e.items.empty()) fail(e, "expected condition");
  const SExpr& head = e.items[0];
  if (head.is_list) fail(head, "expected connective or predicate");
  std::string kw = lower(head.atom);
  if (kw == "not") {
    if (e.items.size() != 2) fail(e, "'not' takes exactly one operand");
    return Condition::make_not(parse_condition_expr(e.items[1], allow_variables, depth + 1));
  }
  if (kw == "and" || kw == "or") {
    std::vector<Condition> ops;
    for (std::size_t i = 1; i < e.items.size(); ++i)
      ops.push_back(parse_condition_expr(e.items[i], allow_variables, depth + 1));
    return kw == "and" ? Condition::make_and(std::move(ops)) : Condition::make_or(std::move(ops));
  }
  if (is_reserved(kw)) fail(head, "unsupported condition form '" + head.atom + "'");
  return Condition::make_atom(parse_atom(e, allow_variables));
}

Rational parse_number(const SExpr& e) {
  Rational r;
  if (e.is_list || !Rational::try_parse(e.atom, r)) fail(e, "expected number");
  if (r < Rational(0)) fail(e, "expected non-negative number");
  return r;
}

TrajectoryConstraint parse_constraint_expr(const SExpr& e) {
  if (!e.is_list || e.items.empty()) fail(e, "expected trajectory constraint");
  const SExpr& head = e.items[0];
  if (head.is_list) fail(head, "expected constraint keyword");
  std::string kw = lower(head.atom);
  std::size_t first = 1;
  if (kw == "at") {
    if (e.items.size() < 2 || !is_keyword(e.items[1], "end")) fail(e, "expected 'at end'");
    kw = "at end";
    first = 2;
  }
  if (kw == "preference") fail(head, "preferences are not supported");
  auto modality = modality_from_keyword(kw);
  if (!modality) fail(head, "unknown trajectory constraint '" + head.atom + "'");
  TrajectoryConstraint c;
  c.modality = *modality;
  std::size_t want_durations = duration_arity(c.modality);
  std::size_t want_conditions = condition_arity(c.modality);
  if (e.items.size() != first + want_durations + want_conditions)
    fail(e, "wrong operand count for '" + kw + "'");
  for (std::size_t i = 0; i < want_durations; ++i) c.durations.push_back(parse_number(e.items[first + i]));
  for (std::size_t i = 0; i < want_conditions; ++i)
    c.conditions.push_back(parse_condition_expr(e.items[first + want_durations + i], false, 0));
  if (c.modality == Modality::kHoldDuring && !(c.durations[0] < c.durations[1]))
    fail(e, "hold-during bounds must be increasing");
  return c;
}

Specification parse_specification_exprs(const std::vector<SExpr>& exprs) {
  Specification s;
  auto add_block = [&](const SExpr& block) {
    if (block.is_list && !block.items.empty() && is_keyword(block.items[0], "and")) {
      for (std::size_t i = 1; i < block.items.size(); ++i) s.constraints.push_back(parse_constraint_expr(block.items[i]));
    } else {
      s.constraints.push_back(parse_constraint_expr(block));
    }
  };
  for (const SExpr& e : exprs) {
    if (e.is_list && !e.items.empty() && is_keyword(e.items[0], ":constraints")) {
      for (std::size_t i = 1; i < e.items.size(); ++i) add_block(e.items[i]);
    } else {
      add_block(e);
    }
  }
  return s;
}

// Durative actions are folded into a single STRIPS step: every timed
// condition becomes a precondition and start effects precede end effects.
void collect_timed_conditions(const SExpr& e, std::vector<Condition>& out) {
  if (!e.is_list || e.items.empty()) fail(e, "expected timed condition");
  std::string kw = e.items[0].is_list ? "" : lower(e.items[0].atom);
  if (kw == "and") {
    for (std::size_t i = 1; i < e.items.size(); ++i) collect_timed_conditions(e.items[i], out);
    return;
  }
  if ((kw == "at" || kw == "over") && e.items.size() == 3) {
    const std::string spec = lower(e.items[1].is_list ? "" : e.items[1].atom);
    if ((kw == "at" && (spec == "start" || spec == "end")) || (kw == "over" && spec == "all")) {
      out.push_back(parse_condition_expr(e.items[2], true, 0));
      return;
    }
  }
  fail(e, "expected 'at start', 'over all' or 'at end' condition");
}

void add_effect_literal(std::vector<Literal>& effects, Literal lit) {
  // A later effect on the same atom overrides an earlier one.
  std::erase_if(effects, [&](const Literal& l) { return l.atom == lit.atom; });
  effects.push_back(std::move(lit));
}

void collect_effects(const SExpr& e, std::vector<Literal>& out) {
  if (!e.is_list || e.items.empty()) fail(e, "expected effect");
  std::string kw = e.items[0].is_list ? "" : lower(e.items[0].atom);
  if (kw == "and") {
    for (std::size_t i = 1; i < e.items.size(); ++i) collect_effects(e.items[i], out);
    return;
  }
  if (kw == "not") {
    if (e.items.size() != 2) fail(e, "'not' takes exactly one operand");
    out.push_back({parse_atom(e.items[1], true), false});
    return;
  }
  if (kw == "when" || kw == "forall" || kw == "increase" || kw == "decrease" || kw == "assign")
    fail(e, "unsupported effect '" + kw + "'");
  out.push_back({parse_atom(e, true), true});
}

void collect_timed_effects(const SExpr& e, std::vector<Literal>& start, std::vector<Literal>& end) {
  if (!e.is_list || e.items.empty()) fail(e, "expected timed effect");
  std::string kw = e.items[0].is_list ? "" : lower(e.items[0].atom);
  if (kw == "and") {
    for (std::size_t i = 1; i < e.items.size(); ++i) collect_timed_effects(e.items[i], start, end);
    return;
  }
  if (kw == "at" && e.items.size() == 3 && !e.items[1].is_list) {
    std::string when = lower(e.items[1].atom);
    if (when == "start" || when == "end") {
      collect_effects(e.items[2], when == "start" ? start : end);
      return;
    }
  }
  fail(e, "expected 'at start' or 'at end' effect");
}

ActionSchema parse_action(const SExpr& e, bool durative) {
  if (e.items.size() < 2) fail(e, "action without a name");
  ActionSchema a;
  a.name = expect_identifier(e.items[1], "action name");
  std::vector<Condition> timed_conditions;
  std::vector<Literal> start_effects, end_effects;
  bool have_condition = false;
  for (std::size_t i = 2; i < e.items.size(); i += 2) {
    const SExpr& key = e.items[i];
    if (key.is_list) fail(key, "expected action section keyword");
    if (i + 1 >= e.items.size()) fail(key, "missing value for " + key.atom);
    const SExpr& value = e.items[i + 1];
    std::string kw = lower(key.atom);
    if (kw == ":parameters") {
      a.parameters = parse_typed_list(expect_list(value, "parameter list").items, 0, true);
    } else if (kw == ":precondition" && !durative) {
      if (value.is_list && value.items.empty()) continue;
      a.precondition = parse_condition_expr(value, true, 0);
    } else if (kw == ":effect" && !durative) {
      if (value.is_list && value.items.empty()) continue;
      std::vector<Literal> raw;
      collect_effects(value, raw);
      for (auto& lit : raw) a.effects.push_back(std::move(lit));
    } else if (kw == ":duration" && durative) {
      if (!value.is_list || value.items.size() != 3 || !is_keyword(value.items[0], "=") ||
          !is_keyword(value.items[1], "?duration"))
        fail(value, "expected (= ?duration <number>)");
      a.duration = parse_number(value.items[2]);
    } else if (kw == ":condition" && durative) {
      have_condition = true;
      if (value.is_list && value.items.empty()) continue;
      collect_timed_conditions(value, timed_conditions);
    } else if (kw == ":effect" && durative) {
      collect_timed_effects(value, start_effects, end_effects);
    } else {
      fail(key, "unsupported action section " + key.atom);
    }
  }
  if (durative) {
    if (have_condition && !timed_conditions.empty())
      a.precondition = timed_conditions.size() == 1 ? std::move(timed_conditions[0])
                                                    : Condition::make_and(std::move(timed_conditions));
    for (auto& l : start_effects) add_effect_literal(a.effects, std::move(l));
    for (auto& l : end_effects) add_effect_literal(a.effects, std::move(l));
  }
  return a;
}

const SExpr& expect_define(const SExpr& root, const char* kind, std::string& name) {
  if (!root.is_list || root.items.size() < 2 || !is_keyword(root.items[0], "define"))
    fail(root, "expected (define ...)");
  const SExpr& header = root.items[1];
  if (!header.is_list || header.items.size() != 2 || !is_keyword(header.items[0], kind))
    fail(header, std::string("expected (") + kind + " <name>)");
  name = expect_identifier(header.items[1], "name");
  return root;
}

}  // namespace

DomainModel parse_domain(std::string_view text) {
  SExpr root = read_one(text, "domain definition");
  DomainModel d;
  expect_define(root, "domain", d.name);
  for (std::size_t i = 2; i < root.items.size(); ++i) {
    const SExpr& section = root.items[i];
    if (!section.is_list || section.items.empty() || section.items[0].is_list) fail(section, "expected domain section");
    std::string kw = lower(section.items[0].atom);
    if (kw == ":requirements") {
      for (std::size_t j = 1; j < section.items.size(); ++j) {
        if (section.items[j].is_list) fail(section.items[j], "expected requirement flag");
        d.requirements.push_back(lower(section.items[j].atom));
      }
    } else if (kw == ":types") {
      for (auto& t : parse_typed_list(section.items, 1, false)) d.types.push_back({t.name, t.type});
    } else if (kw == ":constants") {
      for (auto& c : parse_typed_list(section.items, 1, false)) d.constants.push_back(std::move(c));
    } else if (kw == ":predicates") {
      for (std::size_t j = 1; j < section.items.size(); ++j) {
        const SExpr& p = section.items[j];
        if (!p.is_list || p.items.empty()) fail(p, "expected predicate declaration");
        PredicateSignature sig;
        sig.name = expect_identifier(p.items[0], "predicate name");
        if (is_reserved(lower(sig.name))) fail(p.items[0], "reserved word used as predicate name");
        sig.parameters = parse_typed_list(p.items, 1, true);
        d.predicates.push_back(std::move(sig));
      }
    } else if (kw == ":action" || kw == ":durative-action") {
      d.actions.push_back(parse_action(section, kw == ":durative-action"));
    } else {
      fail(section.items[0], "unsupported domain section " + section.items[0].atom);
    }
  }
  d.validate();
  return d;
}

ProblemModel parse_problem(std::string_view text, const DomainModel& domain) {
  SExpr root = read_one(text, "problem definition");
  ProblemModel p;
  expect_define(root, "problem", p.name);
  bool have_domain = false;
  for (std::size_t i = 2; i < root.items.size(); ++i) {
    const SExpr& section = root.items[i];
    if (!section.is_list || section.items.empty() || section.items[0].is_list) fail(section, "expected problem section");
    std::string kw = lower(section.items[0].atom);
    if (kw == ":domain") {
      if (section.items.size() != 2) fail(section, "expected (:domain <name>)");
      p.domain_name = expect_identifier(section.items[1], "domain name");
      have_domain = true;
    } else if (kw == ":requirements" || kw == ":metric") {
      continue;
    } else if (kw == ":objects") {
      for (auto& o : parse_typed_list(section.items, 1, false)) p.objects.push_back(std::move(o));
    } else if (kw == ":init") {
      for (std::size_t j = 1; j < section.items.size(); ++j) {
        const SExpr& a = section.items[j];
        if (a.is_list && !a.items.empty() && is_keyword(a.items[0], "not")) continue;  // closed world
        p.init.push_back(parse_atom(a, false));
      }
    } else if (kw == ":goal") {
      if (section.items.size() != 2) fail(section, "expected one goal condition");
      p.goal = parse_condition_expr(section.items[1], false, 0);
    } else if (kw == ":constraints") {
      std::vector<SExpr> one{section};
      for (auto& c : parse_specification_exprs(one).constraints) p.base_constraints.constraints.push_back(std::move(c));
    } else {
      fail(section.items[0], "unsupported problem section " + section.items[0].atom);
    }
  }
  if (!have_domain) fail(root, "problem without (:domain ...)");
  std::sort(p.init.begin(), p.init.end());
  p.init.erase(std::unique(p.init.begin(), p.init.end()), p.init.end());
  p.validate(domain);
  return p;
}

TrajectoryConstraint parse_constraint_syntax(std::string_view text) {
  return parse_constraint_expr(read_one(text, "constraint"));
}

TrajectoryConstraint parse_constraint(std::string_view text, const DomainModel& domain, const ProblemModel& problem) {
  TrajectoryConstraint c = parse_constraint_syntax(text);
  typecheck_constraint(c, domain, problem);
  return c;
}

Specification parse_specification_syntax(std::string_view text) { return parse_specification_exprs(read_all(text)); }

Specification parse_specification(std::string_view text, const DomainModel& domain, const ProblemModel& problem) {
  Specification s = parse_specification_syntax(text);
  typecheck_specification(s, domain, problem);
  return s;
}

Condition parse_condition(std::string_view text, const DomainModel& domain, const ProblemModel& problem) {
  Condition c = parse_condition_expr(read_one(text, "condition"), false, 0);
  typecheck_condition(c, domain, &problem);
  return c;
}

Plan parse_plan(std::string_view text, const DomainModel& domain) {
  Plan plan;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (auto semi = line.find(';'); semi != std::string_view::npos) line = line.substr(0, semi);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
      if (eol == text.size()) break;
      continue;
    }
    line = line.substr(first);
    line = line.substr(0, line.find_last_not_of(" \t\r") + 1);

    auto bad = [&](const std::string& why) -> ParseError { return ParseError("malformed plan step: " + why, line_no, 1); };
    auto colon = line.find(':');
    if (colon == std::string_view::npos) throw bad("missing ':'");
    Rational start;
    if (!Rational::try_parse(line.substr(0, colon), start) || start < Rational(0)) throw bad("bad start time");
    auto open = line.find('(', colon);
    auto close = line.find(')', colon);
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) throw bad("missing action");
    if (line.substr(colon + 1, open - colon - 1).find_first_not_of(" \t") != std::string_view::npos)
      throw bad("unexpected text before action");
    PlanStep step;
    step.start = start;
    std::string_view inner = line.substr(open + 1, close - open - 1);
    std::vector<std::string> tokens;
    std::size_t k = 0;
    while (k < inner.size()) {
      while (k < inner.size() && std::isspace(static_cast<unsigned char>(inner[k]))) ++k;
      std::size_t s = k;
      while (k < inner.size() && !std::isspace(static_cast<unsigned char>(inner[k]))) ++k;
      if (k > s) tokens.emplace_back(inner.substr(s, k - s));
    }
    if (tokens.empty()) throw bad("empty action");
    for (const auto& t : tokens)
      if (!is_identifier(t)) throw bad("bad token '" + t + "'");
    step.action = tokens[0];
    step.args.assign(tokens.begin() + 1, tokens.end());
    std::string_view rest = line.substr(close + 1);
    auto rs = rest.find_first_not_of(" \t");
    if (rs != std::string_view::npos) {
      rest = rest.substr(rs);
      if (rest.front() != '[' || rest.back() != ']') throw bad("expected [duration]");
      if (!Rational::try_parse(rest.substr(1, rest.size() - 2), step.duration) || step.duration < Rational(0))
        throw bad("bad duration");
    }
    const ActionSchema* schema = domain.find_action(step.action);
    if (schema == nullptr) throw SemanticError("unknown action at plan line " + std::to_string(line_no), step.action);
    if (schema->parameters.size() != step.args.size())
      throw SemanticError("wrong argument count at plan line " + std::to_string(line_no), step.action);
    plan.steps.push_back(std::move(step));
    if (eol == text.size()) break;
  }
  std::stable_sort(plan.steps.begin(), plan.steps.end(),
                   [](const PlanStep& a, const PlanStep& b) { return a.start < b.start; });
  return plan;
}

}  // namespace plancritic
