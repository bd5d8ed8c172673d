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
#include <filesystem>
#include <thread>

#include <gtest/gtest.h>

#include "chemflow/error.hpp"
#include "chemflow/session.hpp"
#include "chemflow/text.hpp"
#include "support/test_util.hpp"

using namespace chemflow;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string reference_config() { return testutil::data_path("data/reference/config.json").string(); }

session::Config load_reference() { return session::Config::load(reference_config()); }

json reference_json() { return json::parse(text::read_file(reference_config())); }

// Runs the reference workflow to completion in `dir`.
std::unique_ptr<session::Session> run_reference(const std::string& dir, const session::Config& cfg) {
  auto s = std::make_unique<session::Session>("session-0001", dir, cfg, cfg.task);
  s->run();
  return s;
}

std::vector<json> stable(const std::vector<trace::ActionEvent>& events) {
  std::vector<json> out;
  for (const auto& e : events) out.push_back(e.stable_json());
  return out;
}

bool wait_until(const std::function<bool()>& pred, std::chrono::milliseconds limit = std::chrono::seconds(20)) {
  auto end = std::chrono::steady_clock::now() + limit;
  while (std::chrono::steady_clock::now() < end) {
    if (pred()) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  return pred();
}

}  // namespace

TEST(SessionConfig, ReferenceConfigLoads) {
  auto cfg = load_reference();
  EXPECT_EQ(cfg.root, "computational_chemist");
  EXPECT_EQ(cfg.agents.size(), 9u);
  EXPECT_FALSE(cfg.task.empty());
  EXPECT_TRUE(fs::path(cfg.reasoning.rules).is_absolute());
  ASSERT_TRUE(cfg.inject_batch_failure_after);
  EXPECT_EQ(*cfg.inject_batch_failure_after, 2u);
}

TEST(SessionConfig, InvalidHierarchyIsRejected) {
  auto base = testutil::data_path("data/reference").string();
  auto j = reference_json();
  j["agents"][1]["callable"].push_back("computational_chemist");
  try {
    session::Config::from_json(j, base);
    FAIL() << "cycle accepted";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::config);
    EXPECT_TRUE(text::contains(e.what(), "cycle")) << e.what();
  }

  j = reference_json();
  j["agents"][0]["callable"].push_back("no_such_module");
  EXPECT_THROW(session::Config::from_json(j, base), Error);

  j = reference_json();
  j["agents"][2]["model"] = "unbound";
  EXPECT_THROW(session::Config::from_json(j, base), Error);

  j = reference_json();
  j["limits"]["max_depth"] = 7;
  EXPECT_THROW(session::Config::from_json(j, base), Error);
}

TEST(SessionConfig, MissingFilesAreConfigErrors) {
  testutil::TempDir dir;
  try {
    session::Config::load((dir.path() / "absent.json").string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::config);
  }
  text::write_file((dir.path() / "bad.json").string(), "{not json");
  EXPECT_THROW(session::Config::load((dir.path() / "bad.json").string()), Error);

  auto j = reference_json();
  j["agents"][0]["context_file"] = "contexts/absent.md";
  EXPECT_THROW(session::Config::from_json(j, testutil::data_path("data/reference").string()), Error);
}

TEST(SessionRun, ReferenceWorkflowCompletes) {
  testutil::TempDir dir;
  auto cfg = load_reference();
  auto s = run_reference(dir.str(), cfg);
  auto r = *s->result();
  ASSERT_EQ(r.status, agent::SessionStatus::done) << r.error;
  EXPECT_TRUE(text::starts_with(r.final_response, "Workflow complete.")) << r.final_response;
  EXPECT_TRUE(text::contains(r.final_response, "cn9_YICLED")) << r.final_response;

  EXPECT_EQ(r.counters.commanding, r.counters.reporting);
  EXPECT_EQ(r.counters.commanding, 12u);
  EXPECT_EQ(r.counters.acting, 10u);
  EXPECT_LE(r.max_depth_reached, 6);
  EXPECT_GE(r.max_depth_reached, 5);
  EXPECT_LE(r.root_context_share(cfg.root), 0.15);

  auto events = s->trace().events();
  bool fallback = false, displaced = false, repaired = false;
  for (const auto& e : events) {
    if (e.title == "batch fallback") fallback = true;
    if (e.kind == trace::Kind::acting && e.target == "displace_and_resubmit") {
      displaced = text::contains(e.summary, "-131.99 -> -85.19 -> 21.47");
    }
    if (e.kind == trace::Kind::acting && e.target == "submit_slurm_jobs" &&
        text::contains(e.summary, "cn9_YICLED_OPT_FREQ: recovered after 2 input repair(s)"))
      repaired = true;
  }
  EXPECT_TRUE(fallback);
  EXPECT_TRUE(displaced);
  EXPECT_TRUE(repaired);

  auto work = s->layout().workdir;
  for (const auto& f : {"cn9_YICLED_OPT_FREQ.out", "cn9_YICLED_OPT_FREQ_removed2.out", "cn9_YICLED_SP.out",
                        "capped_square_antiprismatic_1_SP.out"})
    EXPECT_TRUE(fs::exists(fs::path(work) / f)) << f;
  EXPECT_TRUE(fs::exists(fs::path(dir.str()) / "session.json"));
}

TEST(SessionRun, TracesAreDeterministicAndRelocatable) {
  testutil::TempDir a, b;
  auto cfg = load_reference();
  auto s1 = run_reference(a.str(), cfg);
  auto s2 = run_reference(b.str(), cfg);
  auto e1 = s1->trace().events(), e2 = s2->trace().events();
  EXPECT_EQ(stable(e1), stable(e2));
  for (const auto& e : e1) {
    auto dump = e.to_json().dump();
    EXPECT_FALSE(text::contains(dump, a.str())) << dump;
    if (e.payload_ref.empty()) continue;
    auto payload = text::read_file(s1->trace().payload_path(e));
    EXPECT_FALSE(text::contains(payload, a.str())) << e.seq;
    EXPECT_EQ(payload, text::read_file(s2->trace().payload_path(e2[e.seq - e1.front().seq])));
  }
}

TEST(SessionRun, SessionsHaveIsolatedWorkdirs) {
  testutil::TempDir root;
  session::SessionManager mgr(root.str(), load_reference());
  auto s1 = mgr.create("first", std::nullopt, false);
  auto s2 = mgr.create("second", std::nullopt, false);
  EXPECT_EQ(s1->id(), "session-0001");
  EXPECT_EQ(s2->id(), "session-0002");
  EXPECT_NE(s1->layout().workdir, s2->layout().workdir);
  text::write_file((fs::path(s1->layout().workdir) / "only_here.txt").string(), "x");
  EXPECT_FALSE(fs::exists(fs::path(s2->layout().workdir) / "only_here.txt"));
  EXPECT_EQ(mgr.list().size(), 2u);
  EXPECT_EQ(mgr.get("session-0002"), s2);
  EXPECT_THROW(mgr.get("session-0099"), Error);
}

TEST(SessionRun, ManagerContinuesNumberingAfterRestart) {
  testutil::TempDir root;
  {
    session::SessionManager mgr(root.str(), load_reference());
    mgr.create("first", std::nullopt, false);
  }
  session::SessionManager again(root.str(), load_reference());
  EXPECT_EQ(again.create("next", std::nullopt, false)->id(), "session-0002");
}

TEST(SessionRun, EmptyTaskFallsBackToConfigTask) {
  testutil::TempDir root;
  session::SessionManager mgr(root.str(), load_reference());
  EXPECT_EQ(mgr.create("", std::nullopt, false)->task(), load_reference().task);
  auto j = reference_json();
  j.erase("task");
  EXPECT_THROW(mgr.create("", j, false), Error);
}

TEST(SessionControl, MessagesAndPauseAreValidated) {
  testutil::TempDir dir;
  auto s = run_reference(dir.str(), load_reference());
  try {
    s->post_message("ghost", "hello");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::not_found);
  }
  try {
    s->post_message("run_orca", "hello");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::conflict);
  }
  try {
    s->pause();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::conflict);
  }
  EXPECT_THROW(s->resume(), Error);
  EXPECT_THROW(s->run(), Error);
  EXPECT_THROW(s->add_breakpoint({"ghost", trace::Kind::acting}), Error);
}

TEST(SessionControl, BreakpointPauseAndResumeKeepTheTrace) {
  testutil::TempDir a, b;
  auto cfg = load_reference();
  auto plain = run_reference(a.str(), cfg);

  session::Session s("session-0001", b.str(), cfg, cfg.task);
  s.add_breakpoint({"run_orca", trace::Kind::commanding});
  s.start();
  ASSERT_TRUE(wait_until([&] { return s.state() == agent::SessionStatus::paused; }));
  auto last = s.trace().events().back();
  EXPECT_EQ(last.agent, "run_orca");
  EXPECT_EQ(last.title, "decision");
  auto seen = s.trace().last_seq();
  std::this_thread::sleep_for(std::chrono::milliseconds(50));
  EXPECT_EQ(s.trace().last_seq(), seen);
  auto g = s.graph();
  EXPECT_EQ(g["state"], "paused");

  s.remove_breakpoint({"run_orca", trace::Kind::commanding});
  s.resume();
  s.join();
  ASSERT_EQ(s.state(), agent::SessionStatus::done);
  EXPECT_EQ(stable(s.trace().events()), stable(plain->trace().events()));
}

TEST(SessionControl, PostedMessageReachesTheAgent) {
  testutil::TempDir dir;
  auto cfg = load_reference();
  session::Session s("session-0001", dir.str(), cfg, cfg.task);
  s.add_breakpoint({"post_analysis", trace::Kind::acting});
  s.start();
  ASSERT_TRUE(wait_until([&] { return s.state() == agent::SessionStatus::paused; }));
  s.post_message("post_analysis", "Use kcal/mol and two decimals.");
  s.remove_breakpoint({"post_analysis", trace::Kind::acting});
  s.resume();
  s.join();
  ASSERT_EQ(s.state(), agent::SessionStatus::done);
  trace::EventFilter f;
  f.agent = "user";
  auto user = s.trace().events_after(0, f);
  bool delivered = false;
  for (const auto& e : user)
    if (e.target == "post_analysis" && text::contains(e.summary, "two decimals")) delivered = true;
  EXPECT_TRUE(delivered);
  bool in_context = false;
  for (const auto& m : s.runtime().conversation("post_analysis"))
    if (m.kind == agent::MessageKind::user && m.body == "Use kcal/mol and two decimals.") in_context = true;
  EXPECT_TRUE(in_context);
}

TEST(SessionViews, EventsFilterAndCursor) {
  testutil::TempDir dir;
  auto s = run_reference(dir.str(), load_reference());
  auto all = s->events_json(0, {});
  ASSERT_EQ(all["state"], "done");
  auto n = all["events"].size();
  ASSERT_GT(n, 20u);
  EXPECT_EQ(all["last_seq"], all["events"].back()["seq"]);

  auto cursor = all["events"][9]["seq"].get<std::uint64_t>();
  auto rest = s->events_json(cursor, {});
  EXPECT_EQ(rest["events"].size(), n - 10);
  EXPECT_EQ(rest["events"][0]["seq"].get<std::uint64_t>(), cursor + 1);

  trace::EventFilter f;
  f.agent = "run_orca";
  f.kind = trace::Kind::commanding;
  auto only = s->events_json(0, f);
  ASSERT_EQ(only["events"].size(), 2u);
  for (const auto& e : only["events"]) {
    EXPECT_EQ(e["agent"], "run_orca");
    EXPECT_EQ(e["kind"], "commanding");
  }
  for (const auto& e : all["events"]) EXPECT_FALSE(e.contains("raw"));
}

TEST(SessionViews, RawReasoningOnlyWhenExposed) {
  testutil::TempDir dir;
  auto j = reference_json();
  j["reasoning"]["expose_raw"] = true;
  auto cfg = session::Config::from_json(j, testutil::data_path("data/reference").string());
  auto s = run_reference(dir.str(), cfg);
  trace::EventFilter f;
  f.kind = trace::Kind::system;
  auto ev = s->events_json(0, f);
  std::size_t with_raw = 0;
  for (const auto& e : ev["events"])
    if (e.contains("raw")) {
      ++with_raw;
      EXPECT_TRUE(text::contains(e["raw"].get<std::string>(), "=>") || !e["raw"].get<std::string>().empty());
    }
  EXPECT_GT(with_raw, 0u);
}

TEST(SessionViews, GraphMatchesCallableModules) {
  testutil::TempDir dir;
  auto cfg = load_reference();
  session::Session s("session-0001", dir.str(), cfg, cfg.task);
  auto g = s.graph();
  std::set<std::pair<std::string, std::string>> edges, expected;
  for (const auto& e : g["edges"]) edges.insert({e["from"].get<std::string>(), e["to"].get<std::string>()});
  for (const auto& a : cfg.agents)
    for (const auto& c : a.callable_modules) expected.insert({a.id, c});
  EXPECT_EQ(edges, expected);
  for (const auto& n : g["nodes"]) EXPECT_EQ(n["status"], "idle") << n.dump();

  s.add_breakpoint({"submit_slurm_job", trace::Kind::acting});
  s.start();
  ASSERT_TRUE(wait_until([&] { return s.state() == agent::SessionStatus::paused; }));
  g = s.graph();
  std::map<std::string, std::string> status;
  for (const auto& n : g["nodes"]) status[n["id"].get<std::string>()] = n["status"].get<std::string>();
  EXPECT_EQ(status["submit_slurm_job"], "active");
  EXPECT_EQ(status["run_orca"], "active");
  EXPECT_EQ(status["computational_chemist"], "active");
  EXPECT_EQ(status["post_analysis"], "idle");
  EXPECT_EQ(status["remove_imaginary_frequency"], "idle");
  s.remove_breakpoint({"submit_slurm_job", trace::Kind::acting});
  s.resume();
  s.join();
  g = s.graph();
  for (const auto& n : g["nodes"]) EXPECT_EQ(n["status"], "idle") << n.dump();
}

TEST(SessionViews, FilesMatchTheWorkingDirectory) {
  testutil::TempDir dir;
  auto s = run_reference(dir.str(), load_reference());
  auto listing = s->list_files("");
  std::set<std::string> listed, on_disk;
  for (const auto& e : listing["entries"]) listed.insert(e["name"]);
  for (const auto& e : fs::directory_iterator(s->layout().workdir)) on_disk.insert(e.path().filename().string());
  EXPECT_EQ(listed, on_disk);

  auto xyz = "cn9_YICLED_0_nunpairedes_0_charge_0_xtb.xyz";
  EXPECT_EQ(s->read_file(xyz), text::read_file(testutil::data_path(std::string("data/reference/seed/") + xyz).string()));
  auto info = s->list_files(xyz);
  EXPECT_EQ(info["type"], "file");

  for (const auto& bad : {"../session.json", "/etc/passwd", "work/../../x"}) {
    try {
      s->read_file(bad);
      FAIL() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::invalid_argument) << bad;
    }
  }
  EXPECT_THROW(s->read_file("absent.txt"), Error);
}

TEST(SessionViews, NotebookHasOneCodeCellPerActingEvent) {
  testutil::TempDir dir;
  auto s = run_reference(dir.str(), load_reference());
  auto nb = s->notebook();
  std::size_t code = 0;
  for (const auto& c : nb["cells"])
    if (c["cell_type"] == "code") ++code;
  EXPECT_EQ(code, s->result()->counters.acting);
  EXPECT_EQ(nb["nbformat"], 4);
}

TEST(SessionViews, LoadEventsFromDisk) {
  testutil::TempDir root;
  session::SessionManager mgr(root.str(), load_reference());
  auto s = mgr.create("", std::nullopt, false);
  s->run();
  auto events = session::load_session_events(root.str(), s->id());
  EXPECT_EQ(stable(events), stable(s->trace().events()));
  EXPECT_THROW(session::load_session_events(root.str(), "session-0042"), Error);
  EXPECT_THROW(session::load_session_events(root.str(), "../x"), Error);
}
