/*
 * Copyright (c) 2026, The chemflow authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <chrono>
#include <thread>

#include <gtest/gtest.h>
#include <httplib.h>

#include "chemflow/service.hpp"
#include "chemflow/text.hpp"
#include "support/test_util.hpp"

using namespace chemflow;
using json = nlohmann::json;

namespace {

struct ServiceHarness {
  testutil::TempDir root;
  session::SessionManager sessions{root.str(), session::Config::load(testutil::data_path("data/reference/config.json").string())};
  service::Server server{sessions};
  int port = server.start();
  httplib::Client client{"127.0.0.1", port};

  ServiceHarness() { client.set_read_timeout(30, 0); }

  json post(const std::string& path, const json& body, int expect) {
    auto r = client.Post(path, body.dump(), "application/json");
    EXPECT_TRUE(r) << path;
    if (!r) return {};
    EXPECT_EQ(r->status, expect) << path << " " << r->body;
    return json::parse(r->body);
  }

  json get(const std::string& path, int expect = 200) {
    auto r = client.Get(path);
    EXPECT_TRUE(r) << path;
    if (!r) return {};
    EXPECT_EQ(r->status, expect) << path << " " << r->body;
    return json::parse(r->body);
  }

  // Long-polls the event stream until the session leaves the running states.
  json wait_done(const std::string& id) {
    std::uint64_t after = 0;
    for (int i = 0; i < 200; ++i) {
      auto ev = get("/sessions/" + id + "/events?wait_ms=500&after=" + std::to_string(after));
      after = ev["last_seq"].get<std::uint64_t>();
      auto st = ev["state"].get<std::string>();
      if (st != "running" && st != "paused") return ev;
    }
    ADD_FAILURE() << "session did not finish";
    return {};
  }

  std::string wait_state(const std::string& id, const std::string& want) {
    std::string st;
    for (int i = 0; i < 2000; ++i) {
      st = get("/sessions/" + id)["state"].get<std::string>();
      if (st == want) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return st;
  }
};

}  // namespace

TEST(ServiceStatus, ErrorCodesMapToHttp) {
  EXPECT_EQ(service::http_status(Errc::invalid_argument), 400);
  EXPECT_EQ(service::http_status(Errc::config), 400);
  EXPECT_EQ(service::http_status(Errc::not_found), 404);
  EXPECT_EQ(service::http_status(Errc::conflict), 409);
  EXPECT_EQ(service::http_status(Errc::unavailable), 503);
  EXPECT_EQ(service::http_status(Errc::io), 500);
}

TEST(Service, HealthAndEmptyList) {
  ServiceHarness h;
  EXPECT_EQ(h.get("/healthz")["status"], "ok");
  EXPECT_TRUE(h.get("/sessions").empty());
}

TEST(Service, SessionRunsToCompletion) {
  ServiceHarness h;
  auto created = h.post("/sessions", {{"task", ""}}, 201);
  auto id = created["id"].get<std::string>();
  EXPECT_EQ(id, "session-0001");
  auto last = h.wait_done(id);
  EXPECT_EQ(last["state"], "done");

  auto info = h.get("/sessions/" + id);
  EXPECT_EQ(info["result"]["status"], "done");
  EXPECT_EQ(info["result"]["counters"]["commanding"], info["result"]["counters"]["reporting"]);
  EXPECT_EQ(h.get("/sessions").size(), 1u);

  auto all = h.get("/sessions/" + id + "/events");
  EXPECT_EQ(all["events"].size(), h.sessions.get(id)->trace().events().size());
  auto acting = h.get("/sessions/" + id + "/events?kind=acting&agent=submit_slurm_job");
  ASSERT_EQ(acting["events"].size(), 2u);
  EXPECT_EQ(acting["events"][0]["target"], "submit_slurm_jobs");
  auto tail = h.get("/sessions/" + id + "/events?after=" + std::to_string(all["last_seq"].get<int>() - 3));
  EXPECT_EQ(tail["events"].size(), 3u);
}

TEST(Service, LongPollReturnsEmptyAfterTimeout) {
  ServiceHarness h;
  auto id = h.post("/sessions", {{"task", ""}}, 201)["id"].get<std::string>();
  auto done = h.wait_done(id);
  auto t0 = std::chrono::steady_clock::now();
  auto ev = h.get("/sessions/" + id + "/events?wait_ms=150&after=" + std::to_string(done["last_seq"].get<int>()));
  auto waited = std::chrono::steady_clock::now() - t0;
  EXPECT_TRUE(ev["events"].empty());
  EXPECT_GE(waited, std::chrono::milliseconds(100));
}

TEST(Service, ErrorsUseStatusCodes) {
  ServiceHarness h;
  h.get("/sessions/session-0099", 404);
  h.get("/sessions/session-0099/events", 404);
  auto bad = h.client.Post("/sessions", "{nope", "application/json");
  ASSERT_TRUE(bad);
  EXPECT_EQ(bad->status, 400);
  auto cfg = json::parse(text::read_file(testutil::data_path("data/reference/config.json").string()));
  cfg["agents"][0]["callable"].push_back("ghost");
  EXPECT_EQ(h.post("/sessions", {{"task", "t"}, {"config", cfg}}, 400)["code"], "config");

  auto id = h.post("/sessions", {{"task", ""}}, 201)["id"].get<std::string>();
  h.wait_done(id);
  h.get("/sessions/" + id + "/events?kind=bogus", 400);
  h.get("/sessions/" + id + "/events?after=-1", 400);
  EXPECT_EQ(h.post("/sessions/" + id + "/message", {{"agent", "ghost"}, {"text", "hi"}}, 404)["code"], "not_found");
  EXPECT_EQ(h.post("/sessions/" + id + "/message", {{"agent", "run_orca"}, {"text", "hi"}}, 409)["code"], "conflict");
  h.post("/sessions/" + id + "/message", {{"agent", "run_orca"}}, 400);
  h.post("/sessions/" + id + "/pause", json::object(), 409);
  h.post("/sessions/" + id + "/resume", json::object(), 409);
  h.post("/sessions/" + id + "/breakpoints", {{"agent", "ghost"}}, 404);
  h.post("/sessions/" + id + "/breakpoints", {{"agent", "run_orca"}, {"kind", "sideways"}}, 400);
}

TEST(Service, BreakpointsPauseAndResume) {
  ServiceHarness h;
  json bps = json::array({{{"agent", "post_analysis"}, {"kind", "acting"}}});
  auto id = h.post("/sessions", {{"task", ""}, {"breakpoints", bps}}, 201)["id"].get<std::string>();
  ASSERT_EQ(h.wait_state(id, "paused"), "paused");
  auto listed = h.get("/sessions/" + id + "/breakpoints");
  ASSERT_EQ(listed.size(), 1u);
  EXPECT_EQ(listed[0]["agent"], "post_analysis");

  auto graph = h.get("/sessions/" + id + "/graph");
  EXPECT_EQ(graph["state"], "paused");
  for (const auto& n : graph["nodes"])
    if (n["id"] == "post_analysis" || n["id"] == "computational_chemist") EXPECT_EQ(n["status"], "active");

  EXPECT_EQ(h.post("/sessions/" + id + "/message", {{"agent", "post_analysis"}, {"text", "two decimals please"}}, 202)["queued"],
            true);
  auto r = h.client.Delete("/sessions/" + id + "/breakpoints?agent=post_analysis&kind=acting");
  ASSERT_TRUE(r);
  EXPECT_EQ(r->status, 200);
  EXPECT_TRUE(json::parse(r->body).empty());
  h.post("/sessions/" + id + "/resume", json::object(), 200);
  EXPECT_EQ(h.wait_done(id)["state"], "done");
  auto user = h.get("/sessions/" + id + "/events?kind=user&agent=user");
  bool delivered = false;
  for (const auto& e : user["events"])
    if (e["target"] == "post_analysis") delivered = true;
  EXPECT_TRUE(delivered);
}

TEST(Service, PauseRequestStopsAtNextStep) {
  ServiceHarness h;
  json bps = json::array({{{"agent", "computational_chemist"}, {"kind", "commanding"}}});
  auto id = h.post("/sessions", {{"task", ""}, {"breakpoints", bps}}, 201)["id"].get<std::string>();
  ASSERT_EQ(h.wait_state(id, "paused"), "paused");
  auto r = h.client.Delete("/sessions/" + id + "/breakpoints?agent=computational_chemist&kind=commanding");
  ASSERT_TRUE(r);
  h.post("/sessions/" + id + "/resume", json::object(), 200);
  auto st = h.get("/sessions/" + id)["state"].get<std::string>();
  if (st == "running") {
    h.post("/sessions/" + id + "/pause", json::object(), 202);
    auto now = h.wait_state(id, "paused");
    if (now == "paused") {
      auto seq = h.get("/sessions/" + id + "/events")["last_seq"];
      std::this_thread::sleep_for(std::chrono::milliseconds(30));
      EXPECT_EQ(h.get("/sessions/" + id + "/events")["last_seq"], seq);
      h.post("/sessions/" + id + "/resume", json::object(), 200);
    }
  }
  EXPECT_EQ(h.wait_done(id)["state"], "done");
}

TEST(Service, GraphFilesAndExports) {
  ServiceHarness h;
  auto id = h.post("/sessions", {{"task", ""}}, 201)["id"].get<std::string>();
  h.wait_done(id);
  auto s = h.sessions.get(id);

  auto graph = h.get("/sessions/" + id + "/graph");
  EXPECT_EQ(graph["root"], "computational_chemist");
  EXPECT_EQ(graph["edges"].size(), s->hierarchy().edges().size());
  for (const auto& n : graph["nodes"]) EXPECT_EQ(n["status"], "idle");

  auto files = h.get("/sessions/" + id + "/files");
  EXPECT_EQ(files["entries"], s->list_files("")["entries"]);
  h.get("/sessions/" + id + "/files?path=../trace", 400);
  h.get("/sessions/" + id + "/files?path=absent", 404);

  auto xyz = h.client.Get("/sessions/" + id + "/file?path=cn9_YICLED_0_nunpairedes_0_charge_0_xtb.xyz");
  ASSERT_TRUE(xyz);
  EXPECT_EQ(xyz->status, 200);
  EXPECT_EQ(xyz->body,
            text::read_file(testutil::data_path("data/reference/seed/cn9_YICLED_0_nunpairedes_0_charge_0_xtb.xyz").string()));
  h.get("/sessions/" + id + "/file?path=../session.json", 400);
  h.get("/sessions/" + id + "/file", 400);

  auto nb = h.client.Get("/sessions/" + id + "/export/notebook");
  ASSERT_TRUE(nb);
  EXPECT_EQ(nb->status, 200);
  EXPECT_TRUE(text::contains(nb->get_header_value("Content-Disposition"), "attachment"));
  EXPECT_EQ(json::parse(nb->body), s->notebook());

  auto log = h.client.Get("/sessions/" + id + "/export/log");
  ASSERT_TRUE(log);
  EXPECT_EQ(log->status, 200);
  EXPECT_EQ(log->body, trace::export_log(s->trace().events()));
}

TEST(Service, RootActingBreakpointResumesToTheSameTrace) {
  ServiceHarness h;
  auto plain_id = h.post("/sessions", {{"task", ""}}, 201)["id"].get<std::string>();
  h.wait_done(plain_id);

  json bps = json::array({{{"agent", "computational_chemist"}, {"kind", "acting"}}});
  auto id = h.post("/sessions", {{"task", ""}, {"breakpoints", bps}}, 201)["id"].get<std::string>();
  ASSERT_EQ(h.wait_state(id, "paused"), "paused");
  auto seen = h.get("/sessions/" + id + "/events");
  std::uint64_t prev = 0;
  for (const auto& e : seen["events"]) {
    EXPECT_GT(e["seq"].get<std::uint64_t>(), prev);
    prev = e["seq"].get<std::uint64_t>();
  }
  auto r = h.client.Delete("/sessions/" + id + "/breakpoints?agent=computational_chemist&kind=acting");
  ASSERT_TRUE(r);
  h.post("/sessions/" + id + "/resume", json::object(), 200);
  EXPECT_EQ(h.wait_done(id)["state"], "done");

  auto a = h.sessions.get(plain_id)->trace().events();
  auto b = h.sessions.get(id)->trace().events();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i].stable_json(), b[i].stable_json()) << i;

  auto xyz = h.client.Get("/sessions/" + id + "/file?path=cn9_YICLED_OPT_FREQ_removed2.xyz");
  ASSERT_TRUE(xyz);
  ASSERT_EQ(xyz->status, 200);
  EXPECT_EQ(text::lines(xyz->body).front(), "22");
}
