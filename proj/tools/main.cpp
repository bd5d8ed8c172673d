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

// chemflow command-line interface: run, analyze, export-trace, serve, hash-input, tools.

#include <atomic>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "chemflow/analysis.hpp"
#include "chemflow/builtin_tools.hpp"
#include "chemflow/error.hpp"
#include "chemflow/exec.hpp"
#include "chemflow/service.hpp"
#include "chemflow/session.hpp"
#include "chemflow/text.hpp"
#include "chemflow/thermo.hpp"
#include "chemflow/tools.hpp"
#include "chemflow/trace.hpp"

using namespace chemflow;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum Exit : int { kOk = 0, kFailed = 1, kConfig = 2, kBudget = 3, kRecoveryExhausted = 4 };

constexpr const char* kDefaultConfig = "data/reference/config.json";

struct RunArgs {
  std::string task;
  std::string task_file;
  std::string config = kDefaultConfig;
  std::string backend;
  std::string workdir;
  std::string sessions_dir = "sessions";
  std::string export_trace;
  std::optional<std::size_t> max_steps;
  bool quiet = false;
};

struct AnalyzeArgs {
  std::string input;
  std::optional<double> delta_g;
  std::optional<double> g_proton;
  int reference = 6;
  std::string property;
  std::vector<std::string> reactions;
  bool as_json = false;
};

struct ExportArgs {
  std::string id;
  std::string format = "notebook";
  std::string sessions_dir = "sessions";
  std::string output;
};

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string config = kDefaultConfig;
  std::string sessions_dir = "sessions";
};

bool recovery_exhausted(const std::vector<trace::ActionEvent>& events) {
  for (const auto& e : events)
    if (e.kind == trace::Kind::acting && text::contains(e.summary, "recovery exhausted")) return true;
  return false;
}

int run_command(const RunArgs& a) {
  auto cfg = session::Config::load(a.config);
  if (!a.backend.empty()) {
    auto b = text::lower(a.backend);
    if (b != "scripted" && b != "live") throw Error(Errc::config, "unknown backend '" + a.backend + "'");
    cfg.reasoning.backend = b;
  }
  if (a.max_steps) cfg.limits.max_steps = *a.max_steps;

  std::string task = a.task;
  if (!a.task_file.empty()) {
    if (!fs::is_regular_file(a.task_file)) throw Error(Errc::config, "task file not found: " + a.task_file);
    task = std::string(text::trim(text::read_file(a.task_file)));
  }
  if (task.empty()) task = cfg.task;
  if (task.empty()) throw Error(Errc::invalid_argument, "no task given and the config has no default task");

  std::shared_ptr<session::Session> s;
  std::unique_ptr<session::SessionManager> manager;
  if (!a.workdir.empty()) {
    auto id = fs::absolute(a.workdir).lexically_normal().filename().string();
    s = std::make_shared<session::Session>(id.empty() ? "session" : id, a.workdir, cfg, task);
  } else {
    manager = std::make_unique<session::SessionManager>(a.sessions_dir, cfg);
    s = manager->create(task, std::nullopt, false);
  }
  auto r = s->run();

  if (!a.export_trace.empty()) text::write_file(a.export_trace, s->notebook().dump(1) + "\n");

  json out = r.to_json();
  out["session"] = s->id();
  out["session_dir"] = s->layout().dir;
  if (!a.quiet) std::cout << out.dump(2) << "\n";

  switch (r.status) {
    case agent::SessionStatus::done: return kOk;
    case agent::SessionStatus::budget_exceeded: return kBudget;
    default: return recovery_exhausted(s->trace().events()) ? kRecoveryExhausted : kFailed;
  }
}

thermo::Property property_or(const std::string& s, thermo::Property fallback) {
  return s.empty() ? fallback : thermo::parse_property(s);
}

std::string read_input(const std::string& path) {
  if (path.empty()) throw Error(Errc::invalid_argument, "--input is required");
  if (!fs::is_regular_file(path)) throw Error(Errc::not_found, "input file not found: " + path);
  auto t = text::read_file(path);
  if (text::trim(t).empty()) throw Error(Errc::invalid_argument, "input file is empty: " + path);
  return t;
}

int print_report(const analysis::Report& r, bool as_json) {
  if (as_json)
    std::cout << r.data.dump(2) << "\n";
  else
    std::cout << r.table << (!r.table.empty() && r.table.back() == '\n' ? "" : "\n");
  return kOk;
}

int analyze_command(const std::string& which, const AnalyzeArgs& a) {
  if (which == "pka") {
    if (a.delta_g) return print_report(analysis::pka(*a.delta_g), a.as_json);
    return print_report(analysis::pka_table(read_input(a.input), a.g_proton.value_or(thermo::kProtonGibbsAqueous)),
                        a.as_json);
  }
  if (which == "calibrate-pka")
    return print_report(
        analysis::calibrate_pka(read_input(a.input), a.g_proton.value_or(thermo::kProtonGibbsCalibration)), a.as_json);
  if (which == "ring-strain")
    return print_report(
        analysis::ring_strain(read_input(a.input), a.reference, property_or(a.property, thermo::Property::H)),
        a.as_json);
  if (which == "reaction") {
    if (a.reactions.empty()) throw Error(Errc::invalid_argument, "at least one --reaction is required");
    return print_report(analysis::reaction(read_input(a.input), a.reactions, property_or(a.property, thermo::Property::G)),
                        a.as_json);
  }
  return print_report(analysis::relative_table(read_input(a.input), property_or(a.property, thermo::Property::E)),
                      a.as_json);
}

int export_command(const ExportArgs& a) {
  auto events = session::load_session_events(a.sessions_dir, a.id);
  auto fmt = text::lower(a.format);
  std::string content, ext;
  if (fmt == "notebook") {
    content = trace::export_notebook(events, a.id).dump(1) + "\n";
    ext = ".ipynb";
  } else if (fmt == "log") {
    content = trace::export_log(events);
    ext = ".jsonl";
  } else {
    throw Error(Errc::invalid_argument, "unknown format '" + a.format + "' (notebook or log)");
  }
  auto out = a.output.empty() ? a.id + ext : a.output;
  if (out == "-")
    std::cout << content;
  else
    text::write_file(out, content);
  return kOk;
}

std::atomic<service::Server*> g_server{nullptr};

void on_signal(int) {
  if (auto* s = g_server.load()) s->stop();
}

int serve_command(const ServeArgs& a) {
  session::SessionManager sessions(a.sessions_dir, session::Config::load(a.config));
  service::Server server(sessions);
  int port = server.bind(a.host, a.port);
  std::cout << "listening on http://" << a.host << ":" << port << std::endl;
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  server.listen();
  g_server = nullptr;
  return kOk;
}

int hash_command(const std::string& path) {
  if (!fs::is_regular_file(path)) throw Error(Errc::not_found, "input file not found: " + path);
  std::cout << exec::input_hash(text::read_file(path)) << "\n";
  return kOk;
}

int tools_command() {
  tools::Registry r;
  tools::register_builtin_tools(r);
  std::cout << r.catalog().dump(2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chemflow: hierarchical agents for computational chemistry workflows"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run one task through the agent hierarchy and print the session result");
  run_cmd->add_option("task", run.task, "Task text (defaults to the config's task)");
  run_cmd->add_option("--task-file", run.task_file, "Read the task text from a file");
  run_cmd->add_option("-c,--config", run.config, "Session config JSON")->capture_default_str();
  run_cmd->add_option("--backend", run.backend, "Reasoning backend: scripted or live");
  run_cmd->add_option("--workdir,--session-dir", run.workdir, "Session directory (work/ and trace/ are created inside)");
  run_cmd->add_option("--sessions-dir", run.sessions_dir, "Root for numbered session directories")->capture_default_str();
  run_cmd->add_option("--export-trace", run.export_trace, "Write the session notebook to this path");
  run_cmd->add_option("--max-steps", run.max_steps, "Override the reasoning step budget");
  run_cmd->add_flag("-q,--quiet", run.quiet, "Print nothing; report through the exit code only");

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Post-analysis on energy tables");
  analyze->require_subcommand(1);
  auto add_common = [&](CLI::App* c) {
    c->add_option("-i,--input", an.input, "Energy table (TSV or CSV with a header row)");
    c->add_flag("--json", an.as_json, "Print structured JSON instead of a table");
  };
  auto* pka = analyze->add_subcommand("pka", "pKa from a free-energy change or an acid table");
  add_common(pka);
  pka->add_option("--delta-g", an.delta_g, "Deprotonation free energy in kcal/mol");
  pka->add_option("--g-proton", an.g_proton, "Proton free energy in Eh");
  auto* cal = analyze->add_subcommand("calibrate-pka", "Reference-calibrated pKa predictions");
  add_common(cal);
  cal->add_option("--g-proton", an.g_proton, "Proton free energy in Eh");
  auto* ring = analyze->add_subcommand("ring-strain", "Cumulative ring strain from isodesmic insertions");
  add_common(ring);
  ring->add_option("--reference", an.reference, "Zero-strain reference ring size")->capture_default_str();
  ring->add_option("--property", an.property, "E, H or G (default H)");
  auto* rx = analyze->add_subcommand("reaction", "Reaction energies from a species table");
  add_common(rx);
  rx->add_option("-r,--reaction", an.reactions, "Reaction such as \"A + B -> C\" (repeatable)");
  rx->add_option("--property", an.property, "E, H or G (default G)");
  auto* rel = analyze->add_subcommand("relative", "Relative energies ranked from most stable");
  add_common(rel);
  rel->add_option("--property", an.property, "E, H or G (default E)");

  ExportArgs ex;
  auto* exp = app.add_subcommand("export-trace", "Export a session trace as a notebook or a log");
  exp->add_option("id", ex.id, "Session id")->required();
  exp->add_option("--format", ex.format, "notebook or log")->capture_default_str();
  exp->add_option("--sessions-dir", ex.sessions_dir, "Root for session directories")->capture_default_str();
  exp->add_option("-o,--output", ex.output, "Output path; '-' for stdout (default <id>.ipynb or <id>.jsonl)");

  ServeArgs sv;
  auto* serve = app.add_subcommand("serve", "Serve the session HTTP API");
  serve->add_option("--host", sv.host, "Bind address")->capture_default_str();
  serve->add_option("-p,--port", sv.port, "Port; 0 picks a free one")->capture_default_str();
  serve->add_option("-c,--config", sv.config, "Default session config JSON")->capture_default_str();
  serve->add_option("--sessions-dir", sv.sessions_dir, "Root for session directories")->capture_default_str();

  std::string hash_path;
  auto* hash = app.add_subcommand("hash-input", "Print the fixture hash of a solver input file");
  hash->add_option("file", hash_path, "Input file")->required();

  auto* list_tools = app.add_subcommand("tools", "List the built-in tools and their parameters as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run_cmd->parsed()) return run_command(run);
    if (analyze->parsed()) {
      for (auto* c : {pka, cal, ring, rx, rel})
        if (c->parsed()) return analyze_command(c->get_name(), an);
    }
    if (exp->parsed()) return export_command(ex);
    if (serve->parsed()) return serve_command(sv);
    if (hash->parsed()) return hash_command(hash_path);
    if (list_tools->parsed()) return tools_command();
  } catch (const Error& e) {
    std::cerr << "chemflow: " << e.what() << "\n";
    return e.code() == Errc::config ? kConfig : kFailed;
  } catch (const std::exception& e) {
    std::cerr << "chemflow: " << e.what() << "\n";
    return kFailed;
  }
  return kFailed;
}
