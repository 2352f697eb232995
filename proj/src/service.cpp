#include "plancritic/service.hpp"

#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include <httplib.h>

#include "plancritic/render.hpp"

namespace plancritic {

namespace {

using nlohmann::json;

json history_json(const std::vector<GenerationStats>& history) {
  json out = json::array();
  for (const auto& g : history)
    out.push_back({{"generation", g.generation},
                   {"best_fitness", g.best_fitness},
                   {"mean_fitness", g.mean_fitness},
                   {"evaluations", g.evaluations}});
  return out;
}

json plan_json(const Session& s, const PhraseTable& phrases) {
  json steps = json::array();
  for (const auto& st : s.plan.steps) steps.push_back(render(st));
  return {{"plan_steps", steps}, {"nl_steps", describe_plan(s.plan, phrases, s.domain, s.problem)}};
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void error(httplib::Response& res, int status, const std::string& message) {
  reply(res, status, {{"error", message}});
}

}  // namespace

json session_view(const Session& s, const PhraseTable& phrases) {
  json view = plan_json(s, phrases);
  view["session_id"] = s.id;
  view["pack"] = s.pack;
  view["problem_id"] = s.problem_id;
  view["status"] = status_name(s.status);
  view["failure"] = s.failure;
  json feedback = json::array();
  for (std::size_t i = 0; i < s.statements.size(); ++i) {
    const auto& r = s.statements[i];
    json item = {{"text", r.text},
                 {"mid_level", r.mid_level},
                 {"constraint", r.constraint},
                 {"failure", r.failure},
                 {"seeded_from_pool", r.seeded_from_pool}};
    if (i < s.judgments.size())
      item["judgment"] = {{"score", s.judgments[i].score}, {"adheres", s.judgments[i].adheres}};
    else
      item["judgment"] = nullptr;
    feedback.push_back(std::move(item));
  }
  view["feedback"] = std::move(feedback);
  view["best"] = {{"genotype", render_specification(s.best.genotype)}, {"fitness", s.best.fitness}};
  json runs = json::array();
  for (const auto& r : s.runs)
    runs.push_back({{"history", history_json(r.history)},
                    {"initial_genotype", r.initial_genotype},
                    {"best_genotype", r.best_genotype},
                    {"plan_before", r.plan_before},
                    {"plan_after", r.plan_after},
                    {"converged", r.converged},
                    {"planner_calls", r.planner_calls}});
  view["runs"] = std::move(runs);
  return view;
}

struct SessionService::Impl {
  struct Entry {
    std::mutex mutex;
    std::condition_variable wake;
    Session session;  // last committed state
    std::shared_ptr<const ScenarioPack> pack;
    std::deque<std::vector<std::string>> queue;
    SessionStatus status = SessionStatus::kIdle;
    GenerationStats progress;
    bool closing = false;
    std::thread worker;
  };

  ServiceConfig config;
  httplib::Server server;
  std::thread listener;
  std::mutex mutex;  // guards sessions, retired, packs, counter
  std::map<std::string, std::shared_ptr<Entry>> sessions;
  std::vector<std::shared_ptr<Entry>> retired;
  std::map<std::string, std::shared_ptr<const ScenarioPack>> packs;
  std::uint64_t counter = 0;
  std::mt19937_64 ids{std::random_device{}()};

  explicit Impl(ServiceConfig c) : config(std::move(c)) { routes(); }

  std::shared_ptr<const ScenarioPack> pack(const std::string& name) {
    std::lock_guard lock(mutex);
    auto it = packs.find(name);
    if (it != packs.end()) return it->second;
    auto p = std::make_shared<const ScenarioPack>(load_pack(name, config.pack_root));
    packs.emplace(name, p);
    return p;
  }

  std::shared_ptr<Entry> find(const std::string& id) {
    std::lock_guard lock(mutex);
    auto it = sessions.find(id);
    return it == sessions.end() ? nullptr : it->second;
  }

  static void work(Entry* e, EngineConfig engine) {
    for (;;) {
      std::vector<std::string> batch;
      Session copy;
      {
        std::unique_lock lock(e->mutex);
        e->wake.wait(lock, [&] { return e->closing || !e->queue.empty(); });
        if (e->closing) return;
        batch = std::move(e->queue.front());
        e->queue.pop_front();
        copy = e->session;
        e->progress = {};
      }
      RefineHooks hooks;
      hooks.status = [e](SessionStatus st) {
        // Terminal states are published with the committed session below.
        if (st == SessionStatus::kDone || st == SessionStatus::kFailed) return;
        std::lock_guard lock(e->mutex);
        e->status = st;
      };
      hooks.progress = [e](const GenerationStats& g) {
        std::lock_guard lock(e->mutex);
        e->progress = g;
      };
      try {
        refine(copy, batch, *e->pack, engine, hooks);
      } catch (const std::exception& ex) {
        copy.status = SessionStatus::kFailed;
        if (copy.failure.empty()) copy.failure = ex.what();
      }
      std::lock_guard lock(e->mutex);
      e->session = std::move(copy);
      e->status = e->queue.empty() ? e->session.status : SessionStatus::kIdle;
    }
  }

  void routes() {
    server.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
      res.set_header("Access-Control-Allow-Origin", "*");
      res.set_header("Access-Control-Allow-Headers", "Content-Type");
      res.set_header("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
    });
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });

    server.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
      json body = json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object()) return error(res, 400, "body must be a JSON object");
      if (!body.contains("pack") || !body["pack"].is_string() || !body.contains("problem_id") ||
          !body["problem_id"].is_string())
        return error(res, 400, "pack and problem_id are required strings");
      std::shared_ptr<const ScenarioPack> p;
      try {
        p = pack(body["pack"].get<std::string>());
      } catch (const std::exception& e) {
        return error(res, 404, e.what());
      }
      const auto problem_id = body["problem_id"].get<std::string>();
      auto entry = std::make_shared<Entry>();
      entry->pack = p;
      std::string id;
      {
        std::lock_guard lock(mutex);
        char buf[40];
        std::snprintf(buf, sizeof buf, "s%llu-%08llx", static_cast<unsigned long long>(++counter),
                      static_cast<unsigned long long>(ids() & 0xffffffffULL));
        id = buf;
      }
      try {
        entry->session = open_session(*p, problem_id, config.engine, id);
      } catch (const PackError& e) {
        return error(res, 404, e.what());
      } catch (const std::exception& e) {
        return error(res, 422, e.what());
      }
      entry->worker = std::thread(work, entry.get(), config.engine);
      json out = plan_json(entry->session, p->phrases);
      out["session_id"] = id;
      {
        std::lock_guard lock(mutex);
        sessions.emplace(id, entry);
      }
      reply(res, 201, out);
    });

    server.Get(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto e = find(req.matches[1]);
      if (!e) return error(res, 404, "no such session");
      std::lock_guard lock(e->mutex);
      json view = session_view(e->session, e->pack->phrases);
      view["status"] = status_name(e->status);
      view["queued"] = e->queue.size();
      reply(res, 200, view);
    });

    server.Post(R"(/sessions/([^/]+)/feedback)", [this](const httplib::Request& req, httplib::Response& res) {
      auto e = find(req.matches[1]);
      if (!e) return error(res, 404, "no such session");
      json body = json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object() || !body.contains("statements") ||
          !body["statements"].is_array())
        return error(res, 400, "statements must be a list of strings");
      std::vector<std::string> statements;
      for (const auto& s : body["statements"]) {
        if (!s.is_string()) return error(res, 400, "statements must be a list of strings");
        if (normalize_statement(s.get<std::string>()).empty()) return error(res, 400, "blank statement");
        statements.push_back(s.get<std::string>());
      }
      if (statements.empty()) return error(res, 400, "statements must not be empty");
      std::size_t position;
      {
        std::lock_guard lock(e->mutex);
        e->queue.push_back(std::move(statements));
        position = e->queue.size();
        if (e->status == SessionStatus::kDone || e->status == SessionStatus::kFailed)
          e->status = SessionStatus::kIdle;
      }
      e->wake.notify_one();
      reply(res, 202, {{"session_id", req.matches[1]}, {"queued", position}});
    });

    server.Get(R"(/sessions/([^/]+)/progress)", [this](const httplib::Request& req, httplib::Response& res) {
      auto e = find(req.matches[1]);
      if (!e) return error(res, 404, "no such session");
      std::lock_guard lock(e->mutex);
      reply(res, 200,
            {{"generation", e->progress.generation},
             {"best_fitness", e->progress.best_fitness},
             {"evaluations", e->progress.evaluations},
             {"status", status_name(e->status)},
             {"failure", e->session.failure},
             {"queued", e->queue.size()}});
    });

    server.Get(R"(/sessions/([^/]+)/plan)", [this](const httplib::Request& req, httplib::Response& res) {
      auto e = find(req.matches[1]);
      if (!e) return error(res, 404, "no such session");
      std::lock_guard lock(e->mutex);
      const Session& s = e->session;
      json out = plan_json(s, e->pack->phrases);
      json judgments = json::array();
      for (std::size_t i = 0; i < s.feedback.statements.size(); ++i) {
        json j = {{"feedback", s.feedback.statements[i].text}};
        if (i < s.judgments.size()) {
          j["score"] = s.judgments[i].score;
          j["adheres"] = s.judgments[i].adheres;
        }
        judgments.push_back(std::move(j));
      }
      out["judgments"] = std::move(judgments);
      out["status"] = status_name(e->status);
      reply(res, 200, out);
    });

    server.Delete(R"(/sessions/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::shared_ptr<Entry> e;
      {
        std::lock_guard lock(mutex);
        auto it = sessions.find(req.matches[1]);
        if (it == sessions.end()) return error(res, 404, "no such session");
        e = it->second;
        sessions.erase(it);
        retired.push_back(e);
      }
      {
        std::lock_guard lock(e->mutex);
        e->closing = true;
        e->queue.clear();
      }
      e->wake.notify_one();
      reply(res, 200, {{"session_id", req.matches[1]}, {"deleted", true}});
    });

    server.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
      std::string what = "internal error";
      try {
        std::rethrow_exception(ep);
      } catch (const std::exception& e) {
        what = e.what();
      } catch (...) {
      }
      error(res, 500, what);
    });
  }

  int bind() {
    int port = config.port;
    if (port == 0) {
      port = server.bind_to_any_port(config.host);
      if (port < 0) throw std::runtime_error("cannot bind " + config.host);
    } else if (!server.bind_to_port(config.host, port)) {
      throw std::runtime_error("cannot bind " + config.host + ":" + std::to_string(port));
    }
    return port;
  }

  void shutdown() {
    server.stop();
    if (listener.joinable()) listener.join();
    std::vector<std::shared_ptr<Entry>> all;
    {
      std::lock_guard lock(mutex);
      for (auto& [id, e] : sessions) all.push_back(e);
      all.insert(all.end(), retired.begin(), retired.end());
      sessions.clear();
      retired.clear();
    }
    for (auto& e : all) {
      {
        std::lock_guard lock(e->mutex);
        e->closing = true;
      }
      e->wake.notify_one();
      if (e->worker.joinable()) e->worker.join();
    }
  }
};

SessionService::SessionService(ServiceConfig config) : impl_(std::make_unique<Impl>(std::move(config))) {}

SessionService::~SessionService() { stop(); }

int SessionService::start() {
  int port = impl_->bind();
  impl_->listener = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return port;
}

void SessionService::run() {
  impl_->bind();
  impl_->server.listen_after_bind();
}

void SessionService::stop() { impl_->shutdown(); }

}  // namespace plancritic
