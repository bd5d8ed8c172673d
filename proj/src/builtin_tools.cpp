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

#include "chemflow/builtin_tools.hpp"

#include <algorithm>
#include <sstream>

#include "chemflow/analysis.hpp"
#include "chemflow/error.hpp"
#include "chemflow/exec.hpp"
#include "chemflow/geometry.hpp"
#include "chemflow/memory.hpp"
#include "chemflow/orca_input.hpp"
#include "chemflow/orca_output.hpp"
#include "chemflow/recovery.hpp"
#include "chemflow/text.hpp"
#include "chemflow/trace.hpp"

namespace chemflow::tools {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path resolve_path(const std::string& root, const std::string& rel) {
  fs::path r(rel);
  if (r.is_absolute()) throw Error(Errc::invalid_argument, "absolute paths are not allowed: " + rel);
  auto base = fs::weakly_canonical(fs::path(root));
  auto full = fs::weakly_canonical(base / r);
  auto b = base.begin();
  auto f = full.begin();
  for (; b != base.end(); ++b, ++f) {
    if (f == full.end() || *f != *b) throw Error(Errc::invalid_argument, "path escapes the working directory: " + rel);
  }
  return full;
}

namespace {

ToolResult success(json payload, std::string summary, std::vector<std::string> artifacts = {}) {
  ToolResult r;
  r.ok = true;
  r.payload = std::move(payload);
  r.summary = std::move(summary);
  r.artifacts = std::move(artifacts);
  return r;
}

ToolResult failure(json payload, std::string summary) {
  ToolResult r;
  r.ok = false;
  r.payload = std::move(payload);
  r.summary = std::move(summary);
  return r;
}

std::string read_in(const ToolContext& ctx, const std::string& rel) {
  auto p = resolve_path(ctx.workdir, rel);
  if (!fs::is_regular_file(p)) throw Error(Errc::not_found, "no such file: " + rel);
  return text::read_file(p.string());
}

exec::Backend& backend_of(const ToolContext& ctx) {
  if (!ctx.backend) throw Error(Errc::config, "no execution backend configured");
  return *ctx.backend;
}

recovery::Options options_of(const ToolContext& ctx) {
  recovery::Options o = ctx.recovery ? *ctx.recovery : recovery::Options{};
  if (ctx.catalog) o.catalog = *ctx.catalog;
  return o;
}

const orca::KeywordCatalog& catalog_of(const ToolContext& ctx, const orca::KeywordCatalog& fallback) {
  return ctx.catalog ? *ctx.catalog : fallback;
}

std::string stem_of(const std::string& rel) { return fs::path(rel).stem().string(); }

std::string violations_text(const std::vector<orca::Violation>& v) {
  std::vector<std::string> parts;
  for (const auto& x : v) parts.push_back(x.str());
  return text::join(parts, ", ");
}

thermo::Property property_arg(const json& a, const char* key) {
  return thermo::parse_property(a[key].get<std::string>());
}

ToolResult report_result(const analysis::Report& r, const std::string& heading) {
  return success(r.data, heading + "\n" + r.table);
}

std::string fmt_freq(double f) { return text::fixed(f, 2); }

// ---------------------------------------------------------------- files

ToolSpec read_file_content() {
  ToolSpec s;
  s.name = "read_file_content";
  s.description = "Reads a text file from the working directory, optionally only its last lines.";
  s.params = {{"path", ParamType::string, true, "path relative to the working directory", {}},
              {"tail", ParamType::integer, false, "number of trailing lines, 0 for all", 0},
              {"max_bytes", ParamType::integer, false, "largest number of bytes returned", 20000}};
  s.handler = [](const ToolContext& ctx, const json& a) {
    auto path = a["path"].get<std::string>();
    auto content = read_in(ctx, path);
    auto tail = a["tail"].get<long long>();
    if (tail > 0) {
      auto ls = text::lines(content);
      auto from = ls.size() > static_cast<std::size_t>(tail) ? ls.size() - tail : 0;
      std::vector<std::string> kept(ls.begin() + from, ls.end());
      content = text::join(kept, "\n") + "\n";
    }
    auto max = static_cast<std::size_t>(std::max<long long>(1, a["max_bytes"].get<long long>()));
    auto shown = text::cap(content, max);
    return success({{"path", path}, {"bytes", content.size()}, {"text", shown}}, shown);
  };
  return s;
}

ToolSpec parse_xyz_tool() {
  ToolSpec s;
  s.name = "parse_xyz";
  s.description = "Parses an XYZ file and reports atom count, composition and centroid.";
  s.params = {{"path", ParamType::string, true, "xyz file relative to the working directory", {}}};
  s.handler = [](const ToolContext& ctx, const json& a) {
    auto path = a["path"].get<std::string>();
    auto mol = parse_xyz(read_in(ctx, path));
    std::map<std::string, int> counts;
    for (const auto& at : mol.atoms) ++counts[at.element];
    std::vector<std::string> comp;
    for (const auto& [el, n] : counts) comp.push_back(el + " " + std::to_string(n));
    auto c = centroid(mol);
    json payload = {{"path", path}, {"atoms", mol.atoms.size()}, {"composition", counts}, {"centroid", c}};
    return success(payload, path + ": " + std::to_string(mol.atoms.size()) + " atoms (" + text::join(comp, ", ") + ")");
  };
  return s;
}

// ---------------------------------------------------------------- inputs

ToolSpec write_input() {
  ToolSpec s;
  s.name = "write_input";
  s.description =
      "Renders a calculation spec to <name>.inp after checking it against the keyword catalog. With jobs, "
      "writes one input per {name, xyz_file} using the same settings.";
  s.params = {{"name", ParamType::string, false, "job name for a single input", {}},
              {"spec", ParamType::object, true, "calculation spec", {}},
              {"strict", ParamType::boolean, false, "refuse to write when the catalog rejects a token", true},
              {"jobs", ParamType::array, false, "[{name, xyz_file, charge?, multiplicity?}]", json::array()}};
  s.reentrant = false;
  s.handler = [](const ToolContext& ctx, const json& a) {
    auto base = orca::spec_from_json(a["spec"]);
    std::vector<std::pair<std::string, orca::CalcSpec>> targets;
    if (a["jobs"].empty()) {
      if (!a.contains("name")) throw Error(Errc::invalid_argument, "name or jobs is required");
      targets.emplace_back(a["name"].get<std::string>(), base);
    } else {
      for (const auto& j : a["jobs"]) {
        auto spec = base;
        spec.geometry.xyz_file = j.at("xyz_file").get<std::string>();
        if (j.contains("charge")) spec.geometry.charge = j["charge"].get<int>();
        if (j.contains("multiplicity")) spec.geometry.multiplicity = j["multiplicity"].get<int>();
        targets.emplace_back(j.at("name").get<std::string>(), spec);
      }
    }
    static const auto fallback = orca::KeywordCatalog::defaults();
    const auto& catalog = catalog_of(ctx, fallback);
    auto structural = orca::structural_errors(base);
    if (!structural.empty())
      return failure({{"structural_errors", structural}}, "spec is not renderable: " + text::join(structural, "; "));
    auto violations = orca::validate_spec(base, catalog);
    json jv = json::array();
    for (const auto& v : violations) jv.push_back({{"token", v.token}, {"location", v.location}});
    bool strict = a["strict"].get<bool>();
    if (strict && !violations.empty())
      return failure({{"violations", jv}}, "not written; catalog rejects " + violations_text(violations));

    std::vector<std::string> files;
    for (const auto& [name, spec] : targets) {
      auto rel = name + ".inp";
      text::write_file(resolve_path(ctx.workdir, rel).string(), orca::render_input(spec));
      files.push_back(rel);
    }
    auto summary = "wrote " + std::to_string(files.size()) + " input file(s): " + text::join(files, ", ");
    if (!violations.empty()) summary += "; written despite catalog violations: " + violations_text(violations);
    return success({{"files", files}, {"violations", jv}}, summary, files);
  };
  return s;
}

ToolSpec validate_input() {
  ToolSpec s;
  s.name = "validate_input";
  s.description = "Checks an input file's keyword line and block identifiers against the keyword catalog.";
  s.params = {{"input_file", ParamType::string, true, "input file relative to the working directory", {}}};
  s.handler = [](const ToolContext& ctx, const json& a) {
    auto path = a["input_file"].get<std::string>();
    auto spec = orca::parse_input(read_in(ctx, path));
    static const auto fallback = orca::KeywordCatalog::defaults();
    auto violations = orca::validate_spec(spec, catalog_of(ctx, fallback));
    json jv = json::array();
    for (const auto& v : violations) jv.push_back({{"token", v.token}, {"location", v.location}});
    auto summary = violations.empty() ? path + ": valid"
                                      : path + ": " + std::to_string(violations.size()) +
                                            " violation(s): " + violations_text(violations);
    return success({{"input_file", path}, {"valid", violations.empty()}, {"violations", jv}}, summary);
  };
  return s;
}

// ---------------------------------------------------------------- jobs

std::string outcome_line(const std::string& name, const recovery::RecoveryOutcome& o) {
  std::vector<std::string> notes;
  for (const auto& e : o.log)
    if (e.detail != "terminated normally") notes.push_back(e.detail);
  switch (o.status) {
    case recovery::Status::recovered:
      return name + ": recovered after " + std::to_string(o.attempts) + " input repair(s): " + text::join(notes, "; ");
    case recovery::Status::accepted_as_is:
      return name + ": normal termination";
    case recovery::Status::exhausted:
      return name + ": recovery exhausted: " + text::join(notes, "; ");
  }
  return name;
}

ToolSpec submit_slurm_jobs() {
  ToolSpec s;
  s.name = "submit_slurm_jobs";
  s.description =
      "Submits existing <name>.inp files as one batch, falling back to one-at-a-time submission when the batch "
      "fails, and waits for the results. With debug, input errors are repaired and the job resubmitted.";
  s.params = {{"jobs", ParamType::array, true, "job names, or {name, cores} objects", {}},
              {"debug", ParamType::boolean, false, "repair and resubmit inputs the solver rejects", false}};
  s.reentrant = false;
  s.handler = [](const ToolContext& ctx, const json& a) {
    auto& backend = backend_of(ctx);
    auto opts = options_of(ctx);
    if (a["jobs"].empty()) throw Error(Errc::invalid_argument, "jobs is empty");

    std::vector<exec::JobRequest> reqs;
    std::vector<orca::CalcSpec> specs;
    for (const auto& j : a["jobs"]) {
      exec::JobRequest r;
      r.name = j.is_string() ? j.get<std::string>() : j.at("name").get<std::string>();
      r.workdir = ctx.workdir;
      r.input = read_in(ctx, r.name + ".inp");
      auto spec = orca::parse_input(r.input);
      r.cores = j.is_object() && j.contains("cores") ? j["cores"].get<int>() : spec.nprocs;
      r.expected_outputs = {r.name + ".out"};
      reqs.push_back(std::move(r));
      specs.push_back(std::move(spec));
    }

    auto rep = exec::submit_with_fallback(backend, reqs);
    std::vector<std::string> lines;
    json payload = {{"fallback", rep.fallback}, {"serial_submissions", rep.serial_submissions}, {"jobs", json::array()}};
    if (rep.fallback) {
      auto batch = reqs.size() - rep.serial_submissions;
      auto note = "batch submission failed after " + std::to_string(batch) + " of " + std::to_string(reqs.size()) +
                  " job(s) (" + rep.fallback_reason + "); switched to one-at-a-time submission strategy for " +
                  std::to_string(rep.serial_submissions) + " job(s)";
      payload["fallback_reason"] = rep.fallback_reason;
      lines.push_back(note);
      if (ctx.trace) {
        trace::ActionEvent e;
        e.agent = ctx.agent;
        e.kind = trace::Kind::system;
        e.title = "batch fallback";
        e.target = "submit_slurm_jobs";
        e.summary = note;
        ctx.trace->record(std::move(e));
      }
    }

    bool all_ok = true;
    std::vector<std::string> artifacts;
    for (std::size_t i = 0; i < reqs.size(); ++i) {
      const auto& h = rep.handles[i];
      const auto& name = reqs[i].name;
      json entry = {{"name", name}};
      if (!h.submit_error.empty()) {
        entry["state"] = "rejected";
        entry["error"] = h.submit_error;
        lines.push_back(name + ": submission rejected: " + h.submit_error);
        all_ok = false;
        payload["jobs"].push_back(entry);
        continue;
      }
      auto st = exec::wait_for(backend, h, opts.max_polls, opts.poll_sleep_ms);
      if (st.state != exec::JobState::done) {
        entry["state"] = exec::to_string(st.state);
        entry["error"] = st.diagnostic;
        lines.push_back(name + ": job " + exec::to_string(st.state) + ": " + st.diagnostic);
        all_ok = false;
        payload["jobs"].push_back(entry);
        continue;
      }
      auto out_text = backend.collect(h);
      auto parsed = orca::parse_output(out_text);
      std::string final_name = name;
      if (!parsed.terminated_normally && a["debug"].get<bool>()) {
        try {
          auto outcome = recovery::input_debug_loop(backend, {name, ctx.workdir, specs[i], reqs[i].cores}, opts, out_text);
          entry["recovery"] = outcome.to_json();
          lines.push_back(outcome_line(name, outcome));
          parsed = orca::parse_output(outcome.final_output_text);
          final_name = outcome.final_job;
        } catch (const recovery::ExecFailure& e) {
          entry["recovery"] = e.partial().to_json();
          lines.push_back(name + ": recovery exhausted: " + e.what());
          parsed = orca::ParsedOutput{};
        }
      } else if (parsed.terminated_normally) {
        lines.push_back(name + ": normal termination");
      } else {
        auto msg = parsed.error ? parsed.error->raw_message : std::string("no normal termination");
        lines.push_back(name + ": solver error: " + msg);
      }
      entry["state"] = "done";
      entry["terminated_normally"] = parsed.terminated_normally;
      entry["output_file"] = final_name + ".out";
      if (parsed.scf_energy) entry["final_energy_eh"] = parsed.scf_energy->value;
      if (parsed.terminated_normally && fs::exists(resolve_path(ctx.workdir, final_name + ".out")))
        artifacts.push_back(final_name + ".out");
      all_ok = all_ok && parsed.terminated_normally;
      payload["jobs"].push_back(entry);
    }
    auto head = "submitted " + std::to_string(reqs.size()) + " job(s)";
    auto summary = head + "\n" + text::join(lines, "\n");
    ToolResult r = all_ok ? success(payload, summary, artifacts) : failure(payload, summary);
    return r;
  };
  return s;
}

ToolSpec extract_properties() {
  ToolSpec s;
  s.name = "extract_properties_from_orca_outputfile";
  s.description = "Extracts documented properties from a solver output file.";
  s.params = {{"output_file", ParamType::string, true, "output file relative to the working directory", {}},
              {"keys", ParamType::array, false, "property keys; all when empty", json::array()}};
  s.handler = [](const ToolContext& ctx, const json& a) {
    auto path = a["output_file"].get<std::string>();
    auto parsed = orca::parse_output(read_in(ctx, path));
    std::vector<std::string> keys;
    for (const auto& k : a["keys"]) keys.push_back(k.get<std::string>());
    if (keys.empty()) keys = orca::property_keys();
    json props = json::object();
    std::vector<std::string> lines{path + ":"};
    for (const auto& k : keys) {
      auto v = orca::extract_property(parsed, k);
      props[k] = v ? *v : json();
      lines.push_back(k + " = " + text::cap(v ? v->dump() : "not present", 240));
    }
    return success({{"output_file", path}, {"properties", props}}, text::join(lines, "\n"));
  };
  return s;
}

ToolSpec check_imaginary_frequency() {
  ToolSpec s;
  s.name = "check_imaginary_frequency";
  s.description = "Lists imaginary vibrational modes whose magnitude exceeds the threshold.";
  s.params = {{"output_file", ParamType::string, true, "frequency output relative to the working directory", {}},
              {"threshold", ParamType::number, false, "magnitude threshold in cm-1", {}}};
  s.handler = [](const ToolContext& ctx, const json& a) {
    auto path = a["output_file"].get<std::string>();
    auto opts = options_of(ctx);
    double threshold = a.contains("threshold") ? a["threshold"].get<double>() : opts.threshold;
    auto parsed = orca::parse_output(read_in(ctx, path));
    if (!parsed.frequencies) return failure({{"output_file", path}}, path + " has no frequencies");
    auto idx = recovery::check_imaginary(parsed, threshold);
    json modes = json::array();
    std::vector<std::string> parts;
    for (auto i : idx) {
      double f = (*parsed.frequencies)[i];
      modes.push_back({{"mode", i}, {"frequency", f}});
      parts.push_back("mode " + std::to_string(i) + " at " + fmt_freq(f) + " cm-1");
    }
    auto thr = fmt_freq(threshold);
    auto summary = idx.empty() ? path + ": no imaginary frequencies beyond " + thr + " cm-1"
                               : path + ": " + std::to_string(idx.size()) + " imaginary mode(s) beyond " + thr +
                                     " cm-1: " + text::join(parts, ", ");
    return success({{"output_file", path}, {"threshold", threshold}, {"imaginary", modes}}, summary);
  };
  return s;
}

ToolSpec displace_and_resubmit() {
  ToolSpec s;
  s.name = "displace_and_resubmit";
  s.description =
      "Displaces the geometry along the most negative imaginary mode and re-runs the optimization until no mode "
      "exceeds the threshold or the round limit is reached.";
  s.params = {{"output_file", ParamType::string, true, "frequency output relative to the working directory", {}},
              {"input_file", ParamType::string, false, "input that produced the output; <stem>.inp by default", {}},
              {"amplitude", ParamType::number, false, "largest atomic shift in Angstrom", {}},
              {"max_rounds", ParamType::integer, false, "resubmission limit", {}},
              {"threshold", ParamType::number, false, "magnitude threshold in cm-1", {}}};
  s.reentrant = false;
  s.handler = [](const ToolContext& ctx, const json& a) {
    auto& backend = backend_of(ctx);
    auto opts = options_of(ctx);
    if (a.contains("amplitude")) opts.amplitude = a["amplitude"].get<double>();
    if (a.contains("max_rounds")) opts.max_retries = a["max_rounds"].get<int>();
    if (a.contains("threshold")) opts.threshold = a["threshold"].get<double>();
    auto out_path = a["output_file"].get<std::string>();
    auto name = stem_of(out_path);
    auto in_path = a.contains("input_file") ? a["input_file"].get<std::string>() : name + ".inp";
    auto spec = orca::parse_input(read_in(ctx, in_path));
    auto output = read_in(ctx, out_path);

    recovery::RecoveryOutcome o;
    try {
      o = recovery::imaginary_frequency_loop(backend, {name, ctx.workdir, spec, spec.nprocs}, opts, output);
    } catch (const recovery::ExecFailure& e) {
      return failure(e.partial().to_json(), name + ": recovery exhausted: " + e.what());
    }
    std::vector<std::string> hist;
    for (double f : o.imaginary_history) hist.push_back(fmt_freq(f));
    auto chain = text::join(hist, " -> ");
    auto thr = fmt_freq(opts.threshold);
    switch (o.status) {
      case recovery::Status::accepted_as_is:
        return success(o.to_json(), name + ": no imaginary frequency beyond " + thr + " cm-1 (lowest " + chain +
                                        " cm-1); nothing resubmitted");
      case recovery::Status::recovered:
        return success(o.to_json(),
                       name + ": recovered after " + std::to_string(o.attempts) +
                           " displacement round(s); lowest frequency " + chain + " cm-1; final job " + o.final_job,
                       {o.final_job + ".out"});
      case recovery::Status::exhausted:
        break;
    }
    return failure(o.to_json(), name + ": recovery exhausted after " + std::to_string(o.attempts) +
                                    " displacement round(s); lowest frequency " + chain + " cm-1" +
                                    (o.raw_message.empty() ? "" : "; " + o.raw_message));
  };
  return s;
}

// ---------------------------------------------------------------- analysis

ToolSpec relative_energies() {
  ToolSpec s;
  s.name = "relative_energies";
  s.description = "Ranks conformers by energy relative to the most stable one, from a table or output files.";
  s.params = {{"table", ParamType::string, false, "energy table relative to the working directory", {}},
              {"output_files", ParamType::array, false, "single-point outputs; labels are file stems", {}},
              {"property", ParamType::string, false, "E, H or G column of the table", "E"}};
  s.handler = [](const ToolContext& ctx, const json& a) {
    analysis::Report rep;
    if (a.contains("output_files")) {
      std::vector<std::pair<std::string, double>> energies;
      for (const auto& f : a["output_files"]) {
        auto path = f.get<std::string>();
        auto parsed = orca::parse_output(read_in(ctx, path));
        if (!parsed.scf_energy) return failure({{"output_file", path}}, path + " has no final energy");
        energies.emplace_back(stem_of(path), parsed.scf_energy->value);
      }
      rep = analysis::relative(energies);
    } else if (a.contains("table")) {
      rep = analysis::relative_table(read_in(ctx, a["table"].get<std::string>()), property_arg(a, "property"));
    } else {
      throw Error(Errc::invalid_argument, "table or output_files is required");
    }
    return report_result(rep, "relative energies (kcal/mol); most stable: " +
                                   rep.data["most_stable"].get<std::string>());
  };
  return s;
}

ToolSpec pka_tool() {
  ToolSpec s;
  s.name = "pka";
  s.description = "pKa from a deprotonation free energy in kcal/mol, or per row of an acid table.";
  s.params = {{"delta_g", ParamType::number, false, "deprotonation free energy, kcal/mol", {}},
              {"table", ParamType::string, false, "acid table with label, G_acid, G_anion", {}},
              {"g_proton", ParamType::number, false, "proton free energy in Eh", thermo::kProtonGibbsAqueous}};
  s.handler = [](const ToolContext& ctx, const json& a) {
    if (a.contains("delta_g")) return report_result(analysis::pka(a["delta_g"].get<double>()), "pKa");
    if (a.contains("table"))
      return report_result(
          analysis::pka_table(read_in(ctx, a["table"].get<std::string>()), a["g_proton"].get<double>()), "pKa");
    throw Error(Errc::invalid_argument, "delta_g or table is required");
  };
  return s;
}

ToolSpec calibrate_pka_tool() {
  ToolSpec s;
  s.name = "calibrate_pka";
  s.description = "Calibrates proton corrections on reference acids and predicts pKa for the others.";
  s.params = {{"table", ParamType::string, true, "acid table with label, G_acid, G_anion, pKa", {}},
              {"g_proton", ParamType::number, false, "proton free energy in Eh", thermo::kProtonGibbsCalibration}};
  s.handler = [](const ToolContext& ctx, const json& a) {
    return report_result(
        analysis::calibrate_pka(read_in(ctx, a["table"].get<std::string>()), a["g_proton"].get<double>()),
        "pKa calibration");
  };
  return s;
}

ToolSpec ring_strain_tool() {
  ToolSpec s;
  s.name = "ring_strain";
  s.description = "Ring strain of cycloalkanes from isodesmic methyl-insertion reactions.";
  s.params = {{"table", ParamType::string, true, "energy table with cycloalkanes and methylcycloalkanes", {}},
              {"reference", ParamType::integer, false, "zero-strain ring size", 6},
              {"property", ParamType::string, false, "E, H or G", "H"}};
  s.handler = [](const ToolContext& ctx, const json& a) {
    return report_result(analysis::ring_strain(read_in(ctx, a["table"].get<std::string>()),
                                               a["reference"].get<int>(), property_arg(a, "property")),
                         "ring strain (kcal/mol)");
  };
  return s;
}

ToolSpec reaction_energy() {
  ToolSpec s;
  s.name = "reaction_energy";
  s.description = "Reaction energies such as \"A + 2 B -> C\" from an energy table.";
  s.params = {{"table", ParamType::string, true, "energy table", {}},
              {"reactions", ParamType::array, true, "reaction strings", {}},
              {"property", ParamType::string, false, "E, H or G", "G"}};
  s.handler = [](const ToolContext& ctx, const json& a) {
    std::vector<std::string> rx;
    for (const auto& r : a["reactions"]) rx.push_back(r.get<std::string>());
    return report_result(
        analysis::reaction(read_in(ctx, a["table"].get<std::string>()), rx, property_arg(a, "property")),
        "reaction energies (kcal/mol)");
  };
  return s;
}

// ---------------------------------------------------------------- session

ToolSpec update_global_memory() {
  ToolSpec s;
  s.name = "update_global_memory";
  s.description = "Appends a note to the session-wide shared memory.";
  s.params = {{"text", ParamType::string, true, "note", {}}};
  s.reentrant = false;
  s.handler = [](const ToolContext& ctx, const json& a) {
    if (!ctx.global_memory) throw Error(Errc::config, "no global memory in this session");
    auto e = ctx.global_memory->append(ctx.agent, a["text"].get<std::string>());
    return success({{"seq", e.seq}}, "global memory entry " + std::to_string(e.seq) + " recorded");
  };
  return s;
}

ToolSpec recommend_cores() {
  ToolSpec s;
  s.name = "recommend_cores";
  s.description = "Suggests a core count from system size and solvation model.";
  s.params = {{"xyz_file", ParamType::string, false, "structure relative to the working directory", {}},
              {"atom_count", ParamType::integer, false, "atom count when no file is given", {}},
              {"solvation", ParamType::string, false, "gas, implicit or explicit", "gas"},
              {"node_cores", ParamType::integer, false, "cores per node", {}}};
  s.handler = [](const ToolContext& ctx, const json& a) {
    int atoms = 0;
    if (a.contains("xyz_file")) atoms = static_cast<int>(parse_xyz(read_in(ctx, a["xyz_file"].get<std::string>())).atoms.size());
    else if (a.contains("atom_count")) atoms = a["atom_count"].get<int>();
    else throw Error(Errc::invalid_argument, "xyz_file or atom_count is required");
    int node = a.contains("node_cores") ? a["node_cores"].get<int>() : ctx.settings.value("node_cores", 24);
    auto solv = a["solvation"].get<std::string>();
    int cores = exec::allocate_cores(atoms, exec::parse_solvation(solv), node);
    return success({{"cores", cores}, {"atoms", atoms}, {"solvation", solv}, {"node_cores", node}},
                   "use " + std::to_string(cores) + " cores for " + std::to_string(atoms) + " atoms (" + solv + ")");
  };
  return s;
}

}  // namespace

void register_builtin_tools(Registry& registry) {
  for (auto&& spec : {read_file_content(), parse_xyz_tool(), write_input(), validate_input(), submit_slurm_jobs(),
                      extract_properties(), check_imaginary_frequency(), displace_and_resubmit(), relative_energies(),
                      pka_tool(), calibrate_pka_tool(), ring_strain_tool(), reaction_energy(), update_global_memory(),
                      recommend_cores()})
    registry.register_tool(spec);
}

}  // namespace chemflow::tools
