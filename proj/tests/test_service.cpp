#include <gtest/gtest.h>
#include <httplib.h>

#include <json.hpp>
#include <thread>

#include "plancritic/service.hpp"
#include "testing.hpp"

namespace plancritic {
namespace {

using json = nlohmann::json;
using namespace std::chrono_literals;

const char* kScoutOnce = "Make sure the scout asset only visits the endpoint once";
const char* kKeepUnderwater = "Don't remove any underwater debris";

class Service : public ::testing::Test {
 protected:
  void SetUp() override {
    ServiceConfig c;
    c.port = 0;
    c.engine.ga.seed = 7;
    service_ = std::make_unique<SessionService>(c);
    port_ = service_->start();
    client_ = std::make_unique<httplib::Client>("127.0.0.1", port_);
    client_->set_read_timeout(30, 0);
  }
  void TearDown() override { service_->stop(); }

  std::pair<int, json> post(const std::string& path, const json& body) {
    auto r = client_->Post(path, body.dump(), "application/json");
    if (!r) return {0, {}};
    return {r->status, json::parse(r->body, nullptr, false)};
  }
  std::pair<int, json> get(const std::string& path) {
    auto r = client_->Get(path);
    if (!r) return {0, {}};
    return {r->status, json::parse(r->body, nullptr, false)};
  }
  std::string create(const std::string& problem) {
    auto [code, body] = post("/sessions", {{"pack", "naval"}, {"problem_id", problem}});
    EXPECT_EQ(code, 201) << body.dump();
    return body.value("session_id", "");
  }
  // Polls progress until the session settles, recording each status seen.
  std::vector<std::string> wait_settled(const std::string& id) {
    std::vector<std::string> seen;
    for (int i = 0; i < 3000; ++i) {
      auto [code, p] = get("/sessions/" + id + "/progress");
      EXPECT_EQ(code, 200);
      std::string st = p.value("status", "?");
      if (seen.empty() || seen.back() != st) seen.push_back(st);
      if ((st == "done" || st == "failed") && p.value("queued", 1) == 0) break;
      std::this_thread::sleep_for(5ms);
    }
    return seen;
  }

  std::unique_ptr<SessionService> service_;
  std::unique_ptr<httplib::Client> client_;
  int port_ = 0;
};

TEST_F(Service, CreateReturnsBaselinePlan) {
  auto [code, body] = post("/sessions", {{"pack", "naval"}, {"problem_id", "mini"}});
  ASSERT_EQ(code, 201);
  EXPECT_FALSE(body["session_id"].get<std::string>().empty());
  EXPECT_EQ(body["plan_steps"].size(), 4u);
  EXPECT_EQ(body["nl_steps"].size(), 4u);
  auto [c2, view] = get("/sessions/" + body["session_id"].get<std::string>());
  EXPECT_EQ(c2, 200);
  EXPECT_EQ(view["status"], "idle");
  EXPECT_EQ(view["problem_id"], "mini");
}

TEST_F(Service, FeedbackRunsToDoneWithJudgments) {
  auto id = create("fig5");
  auto [code, ack] = post("/sessions/" + id + "/feedback", {{"statements", {kScoutOnce}}});
  ASSERT_EQ(code, 202);
  EXPECT_EQ(ack["queued"], 1);
  auto seen = wait_settled(id);
  ASSERT_FALSE(seen.empty());
  EXPECT_EQ(seen.back(), "done");
  // Statuses only move forward.
  const std::vector<std::string> order{"idle", "translating", "evolving", "done"};
  std::size_t at = 0;
  for (const auto& st : seen) {
    auto it = std::find(order.begin() + at, order.end(), st);
    ASSERT_NE(it, order.end()) << st;
    at = it - order.begin();
  }

  auto [c2, plan] = get("/sessions/" + id + "/plan");
  ASSERT_EQ(c2, 200);
  EXPECT_EQ(plan["status"], "done");
  ASSERT_EQ(plan["judgments"].size(), 1u);
  EXPECT_EQ(plan["judgments"][0]["feedback"], kScoutOnce);
  EXPECT_TRUE(plan["judgments"][0]["adheres"].get<bool>());
  EXPECT_EQ(plan["plan_steps"].size(), plan["nl_steps"].size());

  auto [c3, view] = get("/sessions/" + id);
  EXPECT_EQ(view["feedback"][0]["constraint"], "(:constraints (at-most-once (at sct_ast_0 wpt_end)))");
  EXPECT_EQ(view["runs"].size(), 1u);
}

TEST_F(Service, BadRequests) {
  EXPECT_EQ(post("/sessions", json::array()).first, 400);
  EXPECT_EQ(post("/sessions", {{"pack", "naval"}}).first, 400);
  EXPECT_EQ(post("/sessions", {{"pack", "atlantis"}, {"problem_id", "mini"}}).first, 404);
  EXPECT_EQ(post("/sessions", {{"pack", "naval"}, {"problem_id", "nowhere"}}).first, 404);
  EXPECT_EQ(get("/sessions/nope").first, 404);
  EXPECT_EQ(get("/sessions/nope/plan").first, 404);
  EXPECT_EQ(post("/sessions/nope/feedback", {{"statements", {"x"}}}).first, 404);

  auto id = create("mini");
  EXPECT_EQ(post("/sessions/" + id + "/feedback", {{"statements", json::array()}}).first, 400);
  EXPECT_EQ(post("/sessions/" + id + "/feedback", {{"statements", {"  "}}}).first, 400);
  EXPECT_EQ(post("/sessions/" + id + "/feedback", {{"statements", {1, 2}}}).first, 400);
  EXPECT_EQ(post("/sessions/" + id + "/feedback", {{"text", "x"}}).first, 400);
  auto r = client_->Post("/sessions/" + id + "/feedback", "{not json", "application/json");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 400);
  EXPECT_EQ(get("/sessions/" + id).second["status"], "idle");
}

TEST_F(Service, UnknownStatementFailsTheSession) {
  auto id = create("fig5");
  post("/sessions/" + id + "/feedback", {{"statements", {"paint the ship green"}}});
  auto seen = wait_settled(id);
  EXPECT_EQ(seen.back(), "failed");
  EXPECT_NE(get("/sessions/" + id + "/progress").second["failure"].get<std::string>(), "");
}

TEST_F(Service, ConcurrentSessionsStaySeparate) {
  auto a = create("fig5");
  auto b = create("fig5");
  ASSERT_NE(a, b);
  post("/sessions/" + a + "/feedback", {{"statements", {kScoutOnce}}});
  post("/sessions/" + b + "/feedback", {{"statements", {kKeepUnderwater}}});
  EXPECT_EQ(wait_settled(a).back(), "done");
  EXPECT_EQ(wait_settled(b).back(), "done");
  auto pa = get("/sessions/" + a + "/plan").second;
  auto pb = get("/sessions/" + b + "/plan").second;
  ASSERT_EQ(pa["judgments"].size(), 1u);
  ASSERT_EQ(pb["judgments"].size(), 1u);
  EXPECT_EQ(pa["judgments"][0]["feedback"], kScoutOnce);
  EXPECT_EQ(pb["judgments"][0]["feedback"], kKeepUnderwater);
}

TEST_F(Service, QueuedRoundsAccumulate) {
  auto id = create("fig5");
  post("/sessions/" + id + "/feedback", {{"statements", {kScoutOnce}}});
  post("/sessions/" + id + "/feedback", {{"statements", {kKeepUnderwater}}});
  EXPECT_EQ(wait_settled(id).back(), "done");
  auto plan = get("/sessions/" + id + "/plan").second;
  ASSERT_EQ(plan["judgments"].size(), 2u);
  EXPECT_TRUE(plan["judgments"][0]["adheres"].get<bool>());
  EXPECT_TRUE(plan["judgments"][1]["adheres"].get<bool>());
}

TEST_F(Service, DeleteRemovesTheSession) {
  auto id = create("mini");
  auto r = client_->Delete("/sessions/" + id);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_EQ(get("/sessions/" + id).first, 404);
  r = client_->Delete("/sessions/" + id);
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 404);
}

TEST_F(Service, CorsPreflight) {
  auto r = client_->Options("/sessions");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 204);
  EXPECT_EQ(r->get_header_value("Access-Control-Allow-Origin"), "*");
}

}  // namespace
}  // namespace plancritic
