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

#include "chemflow/analysis.hpp"
#include "chemflow/builtin_tools.hpp"
#include "chemflow/error.hpp"
#include "chemflow/exec.hpp"
#include "chemflow/memory.hpp"
#include "chemflow/orca_input.hpp"
#include "chemflow/recovery.hpp"
#include "chemflow/text.hpp"
#include "chemflow/trace.hpp"
#include "support/test_util.hpp"

namespace fs = std::filesystem;
using namespace chemflow;
using nlohmann::json;

namespace {

const std::vector<std::string> kConformers = {"cn9_YICLED", "tri_tri_mer_capped", "tricapped_trigonal_prismatic",
                                              "capped_square_antiprismatic_0", "capped_square_antiprismatic_1"};
const std::vector<std::string> kConformerXyz = {
    "cn9_YICLED_OPT_FREQ_removed2.xyz", "tri_tri_mer_capped_OPT_FREQ.xyz", "tricapped_trigonal_prismatic_OPT_FREQ.xyz",
    "capped_square_antiprismatic_0_OPT_FREQ.xyz", "capped_square_antiprismatic_1_OPT_FREQ_removed.xyz"};

json load_spec_json(const std::string& name) {
  return json::parse(text::read_file(testutil::data_path("data/reference/specs/" + name + ".json").string()));
}

struct ToolHarness {
  testutil::TempDir dir;
  std::string workdir = (dir.path() / "work").string();
  tools::Registry registry;
  exec::MockEngine engine;
  recovery::Options options;
  orca::KeywordCatalog catalog = orca::KeywordCatalog::defaults();
  std::unique_ptr<trace::Trace> trace;
  std::unique_ptr<memory::GlobalMemory> global;
  tools::ToolContext ctx;

  ToolHarness() {
    fs::create_directories(workdir);
    for (const auto& e : fs::directory_iterator(testutil::data_path("data/reference/seed")))
      fs::copy_file(e.path(), fs::path(workdir) / e.path().filename());
    for (const auto& t : {"ce_conformers.tsv", "pka_reference.csv", "ring_strain.tsv"})
      fs::copy_file(testutil::data_path(std::string("data/tables/") + t), fs::path(workdir) / t);
    tools::register_builtin_tools(registry);
    engine.load_fixture_map(testutil::data_path("data/reference/fixtures.map").string());
    options.replacements = {{"block(scf)", {{"TIGHTSCF", "ConvCriteria Tight"}}}};
    options.catalog = catalog;
    trace = std::make_unique<trace::Trace>((dir.path() / "trace").string());
    global = std::make_unique<memory::GlobalMemory>("t", (dir.path() / "global.jsonl").string());
    ctx.workdir = workdir;
    ctx.agent = "tester";
    ctx.backend = &engine;
    ctx.trace = trace.get();
    ctx.global_memory = global.get();
    ctx.catalog = &catalog;
    ctx.recovery = &options;
  }

  tools::ToolResult call(const std::string& name, const json& args) { return registry.invoke(ctx, name, args); }
  std::string file(const std::string& rel) const { return text::read_file((fs::path(workdir) / rel).string()); }

  // Writes the five single-point inputs, with VV10 on the keyword line when asked.
  void write_sp_inputs(bool vv10) {
    auto spec = load_spec_json("ce_sp");
    if (vv10) spec["extra_keywords"] = {"VV10"};
    json jobs = json::array();
    for (std::size_t i = 0; i < kConformers.size(); ++i)
      jobs.push_back({{"name", kConformers[i] + "_SP"}, {"xyz_file", kConformerXyz[i]}});
    auto r = call("write_input", {{"spec", spec}, {"jobs", jobs}, {"strict", false}});
    ASSERT_TRUE(r.ok) << r.summary;
  }
};

json sp_job_names() {
  json names = json::array();
  for (const auto& c : kConformers) names.push_back(c + "_SP");
  return names;
}

}  // namespace

// ---------------------------------------------------------------- paths

TEST(ResolvePath, KeepsPathsInsideTheRoot) {
  testutil::TempDir d;
  fs::create_directories(d.path() / "a" / "b");
  EXPECT_EQ(tools::resolve_path(d.str(), "a/b/../b/x.txt"), fs::weakly_canonical(d.path() / "a/b/x.txt"));
  EXPECT_EQ(tools::resolve_path(d.str(), "."), fs::weakly_canonical(d.path()));
  EXPECT_THROW(tools::resolve_path(d.str(), "../escape"), Error);
  EXPECT_THROW(tools::resolve_path(d.str(), "a/../../escape"), Error);
  EXPECT_THROW(tools::resolve_path(d.str(), "/etc/passwd"), Error);
}

TEST(ResolvePath, RejectsSymlinkEscape) {
  testutil::TempDir d, outside;
  fs::create_directory_symlink(outside.path(), d.path() / "link");
  EXPECT_THROW(tools::resolve_path(d.str(), "link/file"), Error);
}

TEST(ResolvePath, RejectsSiblingWithSharedPrefix) {
  testutil::TempDir d;
  auto root = d.path() / "work";
  fs::create_directories(root);
  fs::create_directories(d.path() / "work2");
  EXPECT_THROW(tools::resolve_path(root.string(), "../work2/x"), Error);
}

// ---------------------------------------------------------------- analysis reports

TEST(AnalysisReport, PkaTable) {
  auto r = analysis::pka(30.09);
  EXPECT_EQ(r.table, "delta_g_kcal\tpKa\n30.09\t22.05\n");
  auto t = analysis::pka_table(text::read_file(testutil::data_path("data/tables/pka_single.csv").string()));
  EXPECT_NEAR(t.data["rows"][0]["pka"].get<double>(), 22.05, 0.01);
  EXPECT_THROW(analysis::pka_table("label,G_acid,G_anion\n"), Error);
}

TEST(AnalysisReport, CalibrationTable) {
  auto r = analysis::calibrate_pka(text::read_file(testutil::data_path("data/tables/pka_reference.csv").string()));
  EXPECT_NEAR(r.data["mean_correction_kcal"].get<double>(), 402.40040286, 1e-6);
  EXPECT_TRUE(text::contains(r.table, "mean\t-\t402.40\n"));
  EXPECT_TRUE(text::contains(r.table, "target chlorofluoroacetic"));
  EXPECT_NEAR(r.data["targets"][0]["mean"].get<double>(), -2.40377487, 1e-6);
}

TEST(AnalysisReport, RingStrainAndReactions) {
  auto text_ = text::read_file(testutil::data_path("data/tables/ring_strain.tsv").string());
  auto r = analysis::ring_strain(text_);
  EXPECT_EQ(r.table,
            "n\tdelta_kcal\tstrain_kcal\n3\t-\t13.86\n4\t0.23\t13.63\n5\t15.83\t-2.20\n6\t-2.20\t0.00\n"
            "7\t-8.13\t8.13\n8\t-2.72\t10.85\n");
  auto rx = analysis::reaction(text_, {"cyclobutane -> methylcyclopropane"}, thermo::Property::H);
  EXPECT_NEAR(rx.data["rows"][0]["delta_kcal"].get<double>(), 0.23, 0.01);
  EXPECT_THROW(analysis::reaction(text_, {}, thermo::Property::H), Error);
}

TEST(AnalysisReport, RelativeSortedMostStableFirst) {
  auto r = analysis::relative_table(text::read_file(testutil::data_path("data/tables/ce_conformers.tsv").string()));
  EXPECT_EQ(r.data["most_stable"], "capped_square_antiprismatic_0");
  const double expected[] = {0.0, 0.098270, 0.284204, 1.100405, 2.590699};
  for (int i = 0; i < 5; ++i) EXPECT_NEAR(r.data["rows"][i]["relative_kcal"].get<double>(), expected[i], 1e-5);
  EXPECT_TRUE(text::starts_with(r.table, "label\trelative_kcal\ncapped_square_antiprismatic_0\t0.00\n"));
}

// ---------------------------------------------------------------- tools

TEST(BuiltinTools, AllRegistered) {
  tools::Registry reg;
  tools::register_builtin_tools(reg);
  EXPECT_EQ(reg.names().size(), 15u);
  EXPECT_TRUE(reg.contains("displace_and_resubmit"));
  EXPECT_TRUE(reg.contains("submit_slurm_jobs"));
}

TEST(BuiltinTools, ReadFileContentTailAndTraversal) {
  ToolHarness h;
  auto r = h.call("read_file_content", {{"path", "acetic_acid.xyz"}, {"tail", 2}});
  ASSERT_TRUE(r.ok);
  EXPECT_EQ(std::count(r.summary.begin(), r.summary.end(), '\n'), 2);
  auto bad = h.call("read_file_content", {{"path", "../outside"}});
  EXPECT_FALSE(bad.ok);
  EXPECT_EQ(bad.error, "handler");
}

TEST(BuiltinTools, ParseXyzAndRecommendCores) {
  ToolHarness h;
  auto r = h.call("parse_xyz", {{"path", "cn9_YICLED_0_nunpairedes_0_charge_0_xtb.xyz"}});
  ASSERT_TRUE(r.ok);
  EXPECT_EQ(r.payload["atoms"], 22);
  EXPECT_EQ(r.payload["composition"]["Ce"], 1);
  auto c = h.call("recommend_cores", {{"xyz_file", "cn9_YICLED_0_nunpairedes_0_charge_0_xtb.xyz"}, {"solvation", "implicit"}});
  ASSERT_TRUE(c.ok);
  EXPECT_EQ(c.payload["cores"], exec::allocate_cores(22, exec::Solvation::implicit, 24));
  EXPECT_FALSE(h.call("recommend_cores", json::object()).ok);
}

TEST(BuiltinTools, WriteInputStrictRefusesCatalogViolations) {
  ToolHarness h;
  auto spec = load_spec_json("ce_opt_freq");
  spec["scf_block"].push_back({"TightSCF", "true"});
  auto strict = h.call("write_input", {{"name", "cn9_YICLED_OPT_FREQ"}, {"spec", spec}});
  EXPECT_FALSE(strict.ok);
  EXPECT_TRUE(text::contains(strict.summary, "TIGHTSCF @ block(scf)"));
  EXPECT_FALSE(fs::exists(fs::path(h.workdir) / "cn9_YICLED_OPT_FREQ.inp"));

  auto loose = h.call("write_input", {{"name", "cn9_YICLED_OPT_FREQ"}, {"spec", spec}, {"strict", false}});
  ASSERT_TRUE(loose.ok) << loose.summary;
  EXPECT_TRUE(text::contains(loose.summary, "despite catalog violations: TIGHTSCF @ block(scf)"));
  auto fixture = text::read_file(
      testutil::data_path("data/reference/fixtures/cn9_YICLED_OPT_FREQ/cn9_YICLED_OPT_FREQ.tightscf.inp").string());
  EXPECT_EQ(h.file("cn9_YICLED_OPT_FREQ.inp"), fixture);

  auto v = h.call("validate_input", {{"input_file", "cn9_YICLED_OPT_FREQ.inp"}});
  ASSERT_TRUE(v.ok);
  EXPECT_EQ(v.payload["valid"], false);
  EXPECT_EQ(v.payload["violations"].size(), 1u);
}

TEST(BuiltinTools, WriteInputJobsMatchFixtureInputs) {
  ToolHarness h;
  h.write_sp_inputs(true);
  for (const auto& c : kConformers) {
    auto fixture = text::read_file(
        testutil::data_path("data/reference/fixtures/" + c + "_SP/" + c + "_SP.vv10.inp").string());
    EXPECT_EQ(h.file(c + "_SP.inp"), fixture) << c;
  }
}

TEST(BuiltinTools, SubmitWithDebugRecoversTwoStageChain) {
  ToolHarness h;
  auto spec = load_spec_json("ce_opt_freq");
  spec["scf_block"].push_back({"TightSCF", "true"});
  ASSERT_TRUE(h.call("write_input", {{"name", "cn9_YICLED_OPT_FREQ"}, {"spec", spec}, {"strict", false}}).ok);

  auto plain = h.call("submit_slurm_jobs", {{"jobs", {"cn9_YICLED_OPT_FREQ"}}});
  EXPECT_FALSE(plain.ok);
  EXPECT_TRUE(text::contains(plain.summary, "solver error"));

  auto r = h.call("submit_slurm_jobs", {{"jobs", {"cn9_YICLED_OPT_FREQ"}}, {"debug", true}});
  ASSERT_TRUE(r.ok) << r.summary;
  EXPECT_TRUE(text::contains(r.summary, "recovered after 2 input repair(s)"));
  EXPECT_TRUE(text::contains(r.summary, "TIGHTSCF replaced by 'ConvCriteria Tight' @ block(scf)"));
  EXPECT_TRUE(text::contains(r.summary, "CONVCRITERIA removed @ block(scf)"));
  EXPECT_EQ(r.artifacts, std::vector<std::string>{"cn9_YICLED_OPT_FREQ.out"});
  EXPECT_TRUE(fs::exists(fs::path(h.workdir) / "cn9_YICLED_OPT_FREQ.xyz"));
}

TEST(BuiltinTools, BatchFallbackIsRecorded) {
  ToolHarness h;
  h.write_sp_inputs(true);
  h.engine.fail_batch_after(2);
  auto r = h.call("submit_slurm_jobs", {{"jobs", sp_job_names()}, {"debug", true}});
  ASSERT_TRUE(r.ok) << r.summary;
  EXPECT_EQ(r.payload["fallback"], true);
  EXPECT_EQ(r.payload["serial_submissions"], 3);
  EXPECT_TRUE(text::contains(r.summary, "one-at-a-time submission strategy for 3 job(s)"));
  for (const auto& j : r.payload["jobs"]) {
    EXPECT_EQ(j["terminated_normally"], true);
    EXPECT_EQ(j["recovery"]["attempts"], 1);
  }
  auto events = h.trace->events();
  ASSERT_EQ(events.size(), 3u);  // write_input, the fallback note, then the submission itself
  EXPECT_EQ(events[1].title, "batch fallback");
  EXPECT_EQ(events[1].kind, trace::Kind::system);
  EXPECT_EQ(events[2].kind, trace::Kind::acting);
  EXPECT_EQ(events[2].title, "submit_slurm_jobs");
}

TEST(BuiltinTools, ImaginaryCheckAndDisplacement) {
  ToolHarness h;
  auto spec = load_spec_json("ce_opt_freq");
  ASSERT_TRUE(h.call("write_input", {{"name", "cn9_YICLED_OPT_FREQ"}, {"spec", spec}}).ok);
  ASSERT_TRUE(h.call("submit_slurm_jobs", {{"jobs", {"cn9_YICLED_OPT_FREQ"}}}).ok);

  auto chk = h.call("check_imaginary_frequency", {{"output_file", "cn9_YICLED_OPT_FREQ.out"}});
  ASSERT_TRUE(chk.ok);
  ASSERT_EQ(chk.payload["imaginary"].size(), 1u);
  EXPECT_NEAR(chk.payload["imaginary"][0]["frequency"].get<double>(), -131.99, 1e-9);

  auto d = h.call("displace_and_resubmit", {{"output_file", "cn9_YICLED_OPT_FREQ.out"}});
  ASSERT_TRUE(d.ok) << d.summary;
  EXPECT_TRUE(text::contains(d.summary, "-131.99 -> -85.19 -> 21.47"));
  EXPECT_EQ(d.payload["final_job"], "cn9_YICLED_OPT_FREQ_removed2");
  EXPECT_TRUE(fs::exists(fs::path(h.workdir) / "cn9_YICLED_OPT_FREQ_removed2.xyz"));

  auto after = h.call("check_imaginary_frequency", {{"output_file", "cn9_YICLED_OPT_FREQ_removed2.out"}});
  EXPECT_TRUE(after.payload["imaginary"].empty());
}

TEST(BuiltinTools, RelativeEnergiesFromOutputsMatchTable) {
  ToolHarness h;
  h.write_sp_inputs(false);
  auto sub = h.call("submit_slurm_jobs", {{"jobs", sp_job_names()}});
  ASSERT_TRUE(sub.ok) << sub.summary;
  json outs = json::array();
  for (const auto& c : kConformers) outs.push_back(c + "_SP.out");
  auto from_outputs = h.call("relative_energies", {{"output_files", outs}});
  auto from_table = h.call("relative_energies", {{"table", "ce_conformers.tsv"}});
  ASSERT_TRUE(from_outputs.ok && from_table.ok);
  ASSERT_EQ(from_outputs.payload["rows"].size(), 5u);
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(from_outputs.payload["rows"][i]["label"].get<std::string>(),
              from_table.payload["rows"][i]["label"].get<std::string>() + "_SP");
    EXPECT_NEAR(from_outputs.payload["rows"][i]["relative_kcal"].get<double>(),
                from_table.payload["rows"][i]["relative_kcal"].get<double>(), 1e-9);
  }
}

TEST(BuiltinTools, ThermoToolsAndMemory) {
  ToolHarness h;
  auto p = h.call("pka", {{"delta_g", 30.09}});
  ASSERT_TRUE(p.ok);
  EXPECT_NEAR(p.payload["pka"].get<double>(), 22.05215231, 1e-7);
  EXPECT_FALSE(h.call("pka", json::object()).ok);
  auto cal = h.call("calibrate_pka", {{"table", "pka_reference.csv"}});
  ASSERT_TRUE(cal.ok);
  auto rs = h.call("ring_strain", {{"table", "ring_strain.tsv"}, {"property", "G"}});
  ASSERT_TRUE(rs.ok);
  auto rx = h.call("reaction_energy", {{"table", "ring_strain.tsv"}, {"reactions", {"cyclobutane -> methylcyclopropane"}},
                                       {"property", "H"}});
  ASSERT_TRUE(rx.ok);
  auto m = h.call("update_global_memory", {{"text", "conformer ranking done"}});
  ASSERT_TRUE(m.ok);
  ASSERT_EQ(h.global->size(), 1u);
  EXPECT_EQ(h.global->read()[0].author, "tester");
}

TEST(BuiltinTools, ExtractProperties) {
  ToolHarness h;
  fs::copy_file(testutil::data_path("data/reference/fixtures/cn9_YICLED_SP/cn9_YICLED_SP.out"),
                fs::path(h.workdir) / "cn9_YICLED_SP.out");
  auto r = h.call("extract_properties_from_orca_outputfile",
                  {{"output_file", "cn9_YICLED_SP.out"}, {"keys", {"TOTAL SCF ENERGY", "frequencies"}}});
  ASSERT_TRUE(r.ok);
  EXPECT_FALSE(r.payload["properties"]["TOTAL SCF ENERGY"].is_null());
  EXPECT_TRUE(r.payload["properties"]["frequencies"].is_null());
  EXPECT_TRUE(text::contains(r.summary, "frequencies = not present"));
}
