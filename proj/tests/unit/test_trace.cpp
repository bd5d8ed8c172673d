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

#include <gtest/gtest.h>

#include <filesystem>
#include <thread>

#include "chemflow/error.hpp"
#include "chemflow/text.hpp"
#include "chemflow/trace.hpp"
#include "support/json_schema.hpp"
#include "support/test_util.hpp"

namespace fs = std::filesystem;
using namespace chemflow;
using namespace chemflow::trace;

namespace {

testutil::JsonSchema notebook_schema() {
  auto path = testutil::data_path("tests/data/nbformat.v4.4.schema.json").string();
  return testutil::JsonSchema(nlohmann::json::parse(text::read_file(path)));
}

ActionEvent ev(Kind k, const std::string& agent, const std::string& target, nlohmann::json args = nlohmann::json::object()) {
  ActionEvent e;
  e.kind = k;
  e.agent = agent;
  e.target = target;
  e.title = std::string(to_string(k)) + " " + target;
  e.summary = "summary of " + target;
  e.args = std::move(args);
  return e;
}

}  // namespace

TEST(Trace, FirstEventHasSeqOne) {
  testutil::TempDir dir;
  Trace t(dir.str());
  EXPECT_EQ(t.record(ev(Kind::user, "user", "root")).seq, 1u);
  EXPECT_EQ(t.last_seq(), 1u);
}

TEST(Trace, HundredEventsStrictlyOrdered) {
  testutil::TempDir dir;
  Trace t(dir.str());
  for (int i = 0; i < 100; ++i) t.record(ev(Kind::system, "root", "x"));
  auto all = t.events();
  ASSERT_EQ(all.size(), 100u);
  for (std::size_t i = 1; i < all.size(); ++i) EXPECT_GT(all[i].seq, all[i - 1].seq);
}

TEST(Trace, ConcurrentAppendsGetUniqueSeq) {
  testutil::TempDir dir;
  Trace t(dir.str());
  std::vector<std::thread> threads;
  for (int k = 0; k < 4; ++k) {
    threads.emplace_back([&] {
      for (int i = 0; i < 25; ++i) t.record(ev(Kind::acting, "a", "tool"), std::string("p"));
    });
  }
  for (auto& th : threads) th.join();
  auto all = t.events();
  ASSERT_EQ(all.size(), 100u);
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i].seq, i + 1);
  Trace reloaded(dir.str());
  EXPECT_EQ(reloaded.events().size(), 100u);
}

TEST(Trace, PayloadFilesExistForActing) {
  testutil::TempDir dir;
  Trace t(dir.str());
  auto e = t.record(ev(Kind::acting, "dft", "parse_xyz", {{"path", "a.xyz"}}), std::string("full payload"));
  ASSERT_FALSE(e.payload_ref.empty());
  EXPECT_EQ(text::read_file(t.payload_path(e)), "full payload");
}

TEST(Trace, ReloadPreservesEvents) {
  testutil::TempDir dir;
  {
    Trace t(dir.str());
    t.record(ev(Kind::commanding, "root", "child"));
    t.record(ev(Kind::reporting, "child", "root"));
  }
  Trace t(dir.str());
  auto all = t.events();
  ASSERT_EQ(all.size(), 2u);
  EXPECT_EQ(all[1].kind, Kind::reporting);
  EXPECT_EQ(t.record(ev(Kind::system, "root", "x")).seq, 3u);
}

TEST(Trace, FilterAndCursor) {
  testutil::TempDir dir;
  Trace t(dir.str());
  t.record(ev(Kind::commanding, "root", "a"));
  t.record(ev(Kind::acting, "a", "tool"), std::string("x"));
  t.record(ev(Kind::reporting, "a", "root"));
  EXPECT_EQ(t.events_after(0).size(), 3u);
  EXPECT_EQ(t.events_after(0, {std::string("a"), std::nullopt}).size(), 2u);
  EXPECT_EQ(t.events_after(0, {std::nullopt, Kind::acting}).size(), 1u);
  auto rest = t.events_after(2);
  ASSERT_EQ(rest.size(), 1u);
  EXPECT_EQ(rest[0].seq, 3u);
}

TEST(Trace, WaitForEventsWakesOnRecord) {
  testutil::TempDir dir;
  Trace t(dir.str());
  EXPECT_FALSE(t.wait_for_events(0, std::chrono::milliseconds(5)));
  std::thread writer([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    t.record(ev(Kind::system, "root", "x"));
  });
  EXPECT_TRUE(t.wait_for_events(0, std::chrono::milliseconds(2000)));
  writer.join();
}

TEST(Trace, StorageFailureDegrades) {
  testutil::TempDir dir;
  auto file = dir.path() / "blocker";
  text::write_file(file.string(), "");
  Trace t((file / "sub").string());
  EXPECT_THROW(t.record(ev(Kind::system, "r", "x")), Error);
  EXPECT_TRUE(t.degraded());
}

TEST(Counters, ExactCountsByKind) {
  EXPECT_EQ(count({}).total(), 0u);
  std::vector<ActionEvent> events = {ev(Kind::user, "user", "root"), ev(Kind::commanding, "root", "a"),
                                     ev(Kind::acting, "a", "t"), ev(Kind::acting, "a", "t"),
                                     ev(Kind::reporting, "a", "root"), ev(Kind::system, "root", "")};
  auto c = count(events);
  EXPECT_EQ(c, (Counters{1, 1, 2}));
  EXPECT_EQ(c.total(), 4u);
}

TEST(CallExpression, SortedKeysAndJsonLiterals) {
  EXPECT_EQ(call_expression("pka", {{"delta_g", 30.09}, {"acid", "x\"y"}}), "pka(acid=\"x\\\"y\", delta_g=30.09)");
  EXPECT_EQ(call_expression("noargs", nlohmann::json::object()), "noargs()");
}

TEST(Notebook, CellCountsMatchEventOracle) {
  std::vector<ActionEvent> events = {ev(Kind::acting, "a", "parse_xyz", {{"path", "m.xyz"}}),
                                     ev(Kind::commanding, "root", "a"),
                                     ev(Kind::acting, "a", "pka", {{"delta_g", 30.09}})};
  for (std::size_t i = 0; i < events.size(); ++i) events[i].seq = i + 1;
  auto nb = export_notebook(events);
  ASSERT_EQ(nb["cells"].size(), 1u + 3u);
  EXPECT_EQ(nb["cells"][0]["cell_type"], "markdown");
  int code = 0, md = 0;
  for (std::size_t i = 1; i < nb["cells"].size(); ++i) {
    if (nb["cells"][i]["cell_type"] == "code") ++code;
    else ++md;
  }
  EXPECT_EQ(code, 2);
  EXPECT_EQ(md, 1);
  EXPECT_EQ(nb["cells"][1]["source"], "parse_xyz(path=\"m.xyz\")");
  EXPECT_EQ(nb["cells"][3]["source"], "pka(delta_g=30.09)");
}

TEST(Notebook, EmptySessionIsAnError) { EXPECT_THROW(export_notebook({}), Error); }

TEST(Notebook, ValidatesAgainstSchema) {
  std::vector<ActionEvent> events = {ev(Kind::user, "user", "root"), ev(Kind::commanding, "root", "a"),
                                     ev(Kind::acting, "a", "tool", {{"x", 1}, {"y", {1, 2}}}),
                                     ev(Kind::reporting, "a", "root"), ev(Kind::system, "root", "")};
  for (std::size_t i = 0; i < events.size(); ++i) events[i].seq = i + 1;
  auto nb = export_notebook(events);
  auto errors = notebook_schema().validate(nb);
  EXPECT_TRUE(errors.empty()) << text::join(errors, "\n");
}

TEST(Notebook, SchemaValidatorRejectsBrokenDocuments) {
  auto schema = notebook_schema();
  auto nb = export_notebook({ev(Kind::acting, "a", "tool")});
  auto no_outputs = nb;
  no_outputs["cells"][1].erase("outputs");
  EXPECT_FALSE(schema.validate(no_outputs).empty());
  auto bad_version = nb;
  bad_version["nbformat"] = 3;
  EXPECT_FALSE(schema.validate(bad_version).empty());
  auto extra = nb;
  extra["cells"][0]["bogus"] = 1;
  EXPECT_FALSE(schema.validate(extra).empty());
}

TEST(Notebook, ExportIsPureFunctionOfEvents) {
  std::vector<ActionEvent> events = {ev(Kind::commanding, "root", "a"), ev(Kind::acting, "a", "t")};
  EXPECT_EQ(export_notebook(events).dump(), export_notebook(events).dump());
}

TEST(LogExport, OneLinePerEventInGlobalMemoryFormat) {
  testutil::TempDir dir;
  Trace t(dir.str());
  t.record(ev(Kind::user, "user", "root"));
  t.record(ev(Kind::acting, "a", "t"), std::string("x"));
  auto log = export_log(t.events());
  auto lines = text::lines(log);
  lines.erase(std::remove(lines.begin(), lines.end(), std::string{}), lines.end());
  ASSERT_EQ(lines.size(), 2u);
  auto j = nlohmann::json::parse(lines[1]);
  EXPECT_EQ(j["seq"], 2);
  EXPECT_EQ(j["author"], "a");
  EXPECT_TRUE(j.contains("ts"));
  EXPECT_TRUE(text::starts_with(j["text"].get<std::string>(), "[acting]"));
}
