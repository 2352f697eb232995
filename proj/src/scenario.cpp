#include "plancritic/scenario.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <queue>
#include <set>
#include <sstream>

#include <json.hpp>

#include "plancritic/parser.hpp"
#include "plancritic/pool.hpp"
#include "plancritic/render.hpp"
#include "plancritic/rng.hpp"
#include "plancritic/trajectory.hpp"

#ifndef PLANCRITIC_PACK_DIR
#define PLANCRITIC_PACK_DIR "packs"
#endif

namespace plancritic {

namespace {

const char kShip[] = "shp_0";

}  // namespace

const std::string& naval_domain_text() {
  static const std::string text = R"pddl(; Naval disaster response: clear debris from waterways so a salvage asset
; can tow a derelict ship from its dock to a target waypoint. Ships are
; never towed into a debris station.
(define (domain naval)
  (:requirements :strips :typing :negative-preconditions)
  (:types
    locatable waypoint - object
    debris asset ship - locatable
    normal_debris underwater_debris - debris
    debris_asset scout_asset salvage_asset - asset)
  (:predicates
    (at ?x - locatable ?w - waypoint)
    (connected ?from - waypoint ?to - waypoint)
    (blocked ?from - waypoint ?to - waypoint)
    (blocks ?d - debris ?from - waypoint ?to - waypoint)
    (discovered ?d - underwater_debris)
    (carrying ?a - debris_asset ?d - debris)
    (debris_station ?w - waypoint))
  (:action move
    :parameters (?a - asset ?from - waypoint ?to - waypoint)
    :precondition (and (at ?a ?from) (connected ?from ?to) (not (blocked ?from ?to)))
    :effect (and (not (at ?a ?from)) (at ?a ?to)))
  (:action tow
    :parameters (?s - salvage_asset ?sh - ship ?from - waypoint ?to - waypoint)
    :precondition (and (at ?s ?from) (at ?sh ?from) (connected ?from ?to) (not (blocked ?from ?to))
                       (not (debris_station ?to)))
    :effect (and (not (at ?s ?from)) (not (at ?sh ?from)) (at ?s ?to) (at ?sh ?to)))
  (:action survey
    :parameters (?sc - scout_asset ?d - underwater_debris ?w - waypoint)
    :precondition (and (at ?sc ?w) (at ?d ?w))
    :effect (discovered ?d))
  (:action collect
    :parameters (?a - debris_asset ?d - normal_debris ?w - waypoint ?to - waypoint)
    :precondition (and (at ?a ?w) (at ?d ?w) (blocks ?d ?w ?to))
    :effect (and (not (at ?d ?w)) (not (blocked ?w ?to)) (carrying ?a ?d)))
  (:action collect_underwater
    :parameters (?a - debris_asset ?d - underwater_debris ?w - waypoint ?to - waypoint)
    :precondition (and (at ?a ?w) (at ?d ?w) (blocks ?d ?w ?to) (discovered ?d))
    :effect (and (not (at ?d ?w)) (not (blocked ?w ?to)) (carrying ?a ?d)))
  (:action deposit
    :parameters (?a - debris_asset ?d - debris ?w - waypoint)
    :precondition (and (carrying ?a ?d) (at ?a ?w) (debris_station ?w))
    :effect (and (not (carrying ?a ?d)) (at ?d ?w))))
)pddl";
  return text;
}

DomainModel naval_domain() {
  static const DomainModel domain = parse_domain(naval_domain_text());
  return domain;
}

void NavalScenarioConfig::check() const {
  std::set<std::string> wps(waypoints.begin(), waypoints.end());
  if (wps.size() != waypoints.size()) throw std::invalid_argument("duplicate waypoint");
  if (!wps.count(dock)) throw std::invalid_argument("dock is not a waypoint: " + dock);
  if (!wps.count(target)) throw std::invalid_argument("target is not a waypoint: " + target);
  if (dock == target) throw std::invalid_argument("dock and target must differ");

  std::map<std::string, std::set<std::string>> adjacent;
  for (const auto& [a, b] : edges) {
    if (!wps.count(a) || !wps.count(b)) throw std::invalid_argument("edge endpoint is not a waypoint: " + a + "-" + b);
    if (a == b) throw std::invalid_argument("self loop at " + a);
    adjacent[a].insert(b);
    adjacent[b].insert(a);
  }
  std::set<std::string> reached{waypoints.front()};
  std::queue<std::string> frontier;
  frontier.push(waypoints.front());
  while (!frontier.empty()) {
    std::string w = frontier.front();
    frontier.pop();
    for (const auto& n : adjacent[w])
      if (reached.insert(n).second) frontier.push(n);
  }
  if (reached.size() != wps.size()) throw std::invalid_argument("waypoint graph is not connected");

  std::set<std::string> names(wps);
  names.insert(kShip);
  for (const auto& d : debris) {
    if (!names.insert(d.name).second) throw std::invalid_argument("duplicate object name: " + d.name);
    if (!adjacent[d.from].count(d.to)) throw std::invalid_argument("debris " + d.name + " blocks a missing edge");
  }
  bool has_debris_asset = false, has_salvage = false;
  for (const auto& a : assets) {
    if (!names.insert(a.name).second) throw std::invalid_argument("duplicate object name: " + a.name);
    if (!wps.count(a.waypoint)) throw std::invalid_argument("asset " + a.name + " starts off the map");
    if (a.type == "debris_asset") has_debris_asset = true;
    else if (a.type == "salvage_asset") has_salvage = true;
    else if (a.type != "scout_asset") throw std::invalid_argument("unknown asset type: " + a.type);
  }
  if (!has_debris_asset) throw std::invalid_argument("at least one debris asset is required");
  if (!has_salvage) throw std::invalid_argument("at least one salvage asset is required");
  for (const auto& s : debris_stations)
    if (!wps.count(s)) throw std::invalid_argument("debris station is not a waypoint: " + s);
}

std::pair<DomainModel, ProblemModel> generate_naval(const NavalScenarioConfig& config) {
  config.check();
  DomainModel domain = naval_domain();
  ProblemModel p;
  p.name = "naval-" + config.name;
  p.domain_name = domain.name;
  for (const auto& w : config.waypoints) p.objects.push_back({w, "waypoint"});
  p.objects.push_back({kShip, "ship"});
  for (const auto& d : config.debris) p.objects.push_back({d.name, d.underwater ? "underwater_debris" : "normal_debris"});
  for (const auto& a : config.assets) p.objects.push_back({a.name, a.type});

  std::set<Atom> init;
  for (const auto& [a, b] : config.edges) {
    init.insert({"connected", {a, b}});
    init.insert({"connected", {b, a}});
  }
  for (const auto& s : config.debris_stations) init.insert({"debris_station", {s}});
  init.insert({"at", {kShip, config.dock}});
  for (const auto& a : config.assets) init.insert({"at", {a.name, a.waypoint}});
  for (const auto& d : config.debris) {
    init.insert({"at", {d.name, d.from}});
    init.insert({"blocks", {d.name, d.from, d.to}});
    init.insert({"blocked", {d.from, d.to}});
  }
  p.init.assign(init.begin(), init.end());
  p.goal = Condition::make_atom("at", {kShip, config.target});
  p.validate(domain);
  return {std::move(domain), std::move(p)};
}

namespace {

NavalScenarioConfig two_waterways(std::string name) {
  NavalScenarioConfig c;
  c.name = std::move(name);
  c.waypoints = {"wpt_ini", "deb_stn_0", "wpt_a_0", "wpt_b_0", "wpt_end"};
  c.edges = {{"deb_stn_0", "wpt_a_0"}, {"deb_stn_0", "wpt_b_0"}, {"wpt_ini", "wpt_a_0"}, {"wpt_ini", "wpt_b_0"},
             {"wpt_a_0", "wpt_end"},   {"wpt_b_0", "wpt_end"},   {"deb_stn_0", "wpt_end"}};
  c.assets = {{"deb_ast_0", "debris_asset", "deb_stn_0"},
              {"sct_ast_0", "scout_asset", "deb_stn_0"},
              {"slv_ast_0", "salvage_asset", "wpt_ini"}};
  c.debris_stations = {"deb_stn_0"};
  c.dock = "wpt_ini";
  c.target = "wpt_end";
  return c;
}

}  // namespace

NavalScenarioConfig mini_config() {
  NavalScenarioConfig c;
  c.name = "mini";
  c.waypoints = {"wpt_ini", "wpt_mid", "wpt_end"};
  c.edges = {{"wpt_ini", "wpt_mid"}, {"wpt_mid", "wpt_end"}};
  c.debris = {{"n_deb_0", false, "wpt_mid", "wpt_end"}};
  c.assets = {{"deb_ast_0", "debris_asset", "wpt_ini"},
              {"sct_ast_0", "scout_asset", "wpt_ini"},
              {"slv_ast_0", "salvage_asset", "wpt_ini"}};
  c.debris_stations = {"wpt_ini"};
  c.dock = "wpt_ini";
  c.target = "wpt_end";
  return c;
}

NavalScenarioConfig harbor_config() {
  NavalScenarioConfig c = two_waterways("harbor");
  c.debris = {{"n_deb_a_0_end", false, "wpt_a_0", "wpt_end"}, {"u_deb_b_0_end", true, "wpt_b_0", "wpt_end"}};
  return c;
}

NavalScenarioConfig fig5_config() {
  NavalScenarioConfig c = two_waterways("fig5");
  c.debris = {{"n_deb_a_0_end", false, "wpt_a_0", "wpt_end"},
              {"n_deb_stn_end", false, "deb_stn_0", "wpt_end"},
              {"u_deb_ini_b_0", true, "wpt_ini", "wpt_b_0"},
              {"u_deb_b_0_end", true, "wpt_b_0", "wpt_end"}};
  return c;
}

NavalScenarioConfig naval_variation(std::uint64_t seed) {
  NavalScenarioConfig c = two_waterways("var" + std::to_string(seed));
  c.seed = seed;
  Rng rng(seed);
  auto place = [&](const std::string& from, const std::string& to) {
    bool underwater = rng.chance(0.5);
    std::string stem = from.substr(from.find('_') + 1) + "_" + to.substr(to.find('_') + 1);
    c.debris.push_back({(underwater ? "u_deb_" : "n_deb_") + stem, underwater, from, to});
  };
  place("wpt_a_0", "wpt_end");
  place("wpt_b_0", "wpt_end");
  if (rng.chance(0.5)) place("wpt_ini", rng.chance(0.5) ? "wpt_a_0" : "wpt_b_0");
  if (rng.chance(0.5)) place("deb_stn_0", "wpt_end");
  std::stable_sort(c.debris.begin(), c.debris.end(),
                   [](const DebrisPlacement& a, const DebrisPlacement& b) { return a.underwater < b.underwater; });
  return c;
}

const ProblemModel& ScenarioPack::problem(const std::string& id) const {
  for (const auto& [name, p] : problems)
    if (name == id) return p;
  throw PackError("pack " + name + " has no problem " + id);
}

std::filesystem::path default_pack_root() {
  if (const char* env = std::getenv("PLANCRITIC_PACKS"); env && *env) return env;
  return PLANCRITIC_PACK_DIR;
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PackError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
  std::vector<std::string> out;
  if (!j.contains(key)) return out;
  for (const auto& v : j.at(key)) out.push_back(v.get<std::string>());
  return out;
}

ArchetypeRecord read_record(const nlohmann::json& j, const ScenarioPack& pack) {
  ArchetypeRecord r;
  r.id = j.at("id").get<std::string>();
  r.nl_template = j.value("template", "");
  r.problem_id = j.at("problem").get<std::string>();
  r.ground_truth_text = string_list(j, "ground_truth");
  r.mid_level = j.value("mid_level", "");
  r.rephrasings = string_list(j, "rephrasings");
  if (j.contains("bindings"))
    for (const auto& [k, v] : j.at("bindings").items()) r.bindings[k] = v.get<std::string>();
  const ProblemModel& problem = pack.problem(r.problem_id);
  for (const auto& text : r.ground_truth_text) r.ground_truth.constraints.push_back(parse_constraint(text, pack.domain, problem));
  if (r.ground_truth.empty()) throw PackError("record " + r.id + " has no ground truth");
  return r;
}

}  // namespace

ScenarioPack load_pack(const std::string& name, const std::filesystem::path& root) {
  bool plain = !name.empty() && std::all_of(name.begin(), name.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  });
  std::filesystem::path dir = root / name;
  if (!plain || !std::filesystem::is_directory(dir)) throw PackError("unknown pack: " + name);

  ScenarioPack pack;
  pack.name = name;
  pack.directory = dir;
  try {
    pack.domain = parse_domain(read_file(dir / "domain.pddl"));
    std::vector<std::filesystem::path> files;
    if (std::filesystem::is_directory(dir / "problems"))
      for (const auto& e : std::filesystem::directory_iterator(dir / "problems"))
        if (e.path().extension() == ".pddl") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) pack.problems.emplace_back(f.stem().string(), parse_problem(read_file(f), pack.domain));
    if (pack.problems.empty()) throw PackError("pack " + name + " has no problems");

    if (std::filesystem::exists(dir / "phrases.json")) {
      auto j = nlohmann::json::parse(read_file(dir / "phrases.json"));
      for (const char* section : {"actions", "predicates", "types"}) {
        if (!j.contains(section)) continue;
        auto& table = section[0] == 'a' ? pack.phrases.actions : section[0] == 'p' ? pack.phrases.predicates
                                                                                  : pack.phrases.types;
        for (const auto& [k, v] : j.at(section).items()) table[k] = v.get<std::string>();
      }
    }
    if (std::filesystem::exists(dir / "archetypes.json")) {
      auto j = nlohmann::json::parse(read_file(dir / "archetypes.json"));
      pack.note = j.value("note", "");
      if (j.contains("archetypes"))
        for (const auto& r : j.at("archetypes")) pack.archetypes.push_back(read_record(r, pack));
      if (j.contains("examples"))
        for (const auto& r : j.at("examples")) pack.examples.push_back(read_record(r, pack));
    }
  } catch (const PackError&) {
    throw;
  } catch (const std::exception& e) {
    throw PackError("corrupt pack " + name + ": " + e.what());
  }
  return pack;
}

TrainingResult generate_training_instances(const DomainModel& domain,
                                           const std::vector<std::pair<std::string, ProblemModel>>& problems,
                                           const Planner& planner, const TrainingOptions& options,
                                           const Verbalizer& verbalize) {
  if (options.min_size < 1 || options.min_size > options.max_size)
    throw std::invalid_argument("training spec sizes must satisfy 1 <= min <= max");
  TrainingResult result;
  for (const auto& [id, problem] : problems) {
    ConstraintPool pool(domain, problem, {options.horizon, false});
    Rng rng(splitmix64(options.seed) ^ fnv1a(id));
    std::size_t made = 0;
    auto statement = [&](const TrajectoryConstraint& c) { return verbalize ? verbalize(c) : render(c); };
    while (made < options.per_problem) {
      bool done = false;
      for (std::size_t attempt = 0; attempt < options.attempts_per_instance && !done; ++attempt) {
        std::size_t k = options.min_size + rng.index(options.max_size - options.min_size + 1);
        Specification positive;
        std::set<std::string> seen;
        while (positive.size() < k) {
          TrajectoryConstraint c = pool.sample(rng);
          if (seen.insert(render(c)).second) positive.constraints.push_back(std::move(c));
        }
        PlannerResult r = planner.solve(domain, problem, positive);
        if (!r.solved()) continue;
        StateTrajectory traj = simulate(domain, problem, r.plan);
        std::vector<TrajectoryConstraint> negative;
        for (std::size_t tries = 0; tries < k * 100 && negative.size() < k; ++tries) {
          TrajectoryConstraint c = pool.sample(rng);
          if (check_constraint(c, traj) || !seen.insert(render(c)).second) continue;
          negative.push_back(std::move(c));
        }
        if (negative.size() < k) continue;
        for (const auto& c : positive.constraints)
          result.examples.push_back({id, made, r.plan, c, statement(c), true});
        for (const auto& c : negative) result.examples.push_back({id, made, r.plan, c, statement(c), false});
        ++made;
        done = true;
      }
      if (!done) {
        result.exhausted[id] = "no solvable specification with a violating counterpart after " +
                               std::to_string(options.attempts_per_instance) + " attempts";
        break;
      }
    }
    result.produced[id] = made;
  }
  return result;
}

std::string format_training_instances(const std::vector<TrainingInstance>& examples) {
  std::string out;
  for (const auto& e : examples) {
    nlohmann::ordered_json steps = nlohmann::ordered_json::array();
    for (const auto& s : e.plan.steps) steps.push_back(render(s));
    nlohmann::ordered_json j{{"problem_id", e.problem_id},     {"instance", e.instance},
                             {"plan_steps", steps},            {"statement", e.statement},
                             {"constraint", render(e.constraint)}, {"label", e.positive ? "positive" : "negative"}};
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace plancritic
