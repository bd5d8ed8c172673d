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

#pragma once

#include <atomic>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "chemflow/agent.hpp"
#include "chemflow/exec.hpp"
#include "chemflow/memory.hpp"
#include "chemflow/orca_input.hpp"
#include "chemflow/reasoning.hpp"
#include "chemflow/recovery.hpp"
#include "chemflow/tools.hpp"
#include "chemflow/trace.hpp"

namespace chemflow::session {

struct ReasoningConfig {
  std::string backend = "scripted";  // scripted or live
  std::string rules;                 // absolute path for scripted
  std::string url;                   // live endpoint; CHEMFLOW_LLM_URL takes precedence
};

// Session configuration. Relative paths resolve against the config file's directory.
struct Config {
  std::string base_dir;
  std::string root;
  std::vector<agent::AgentSpec> agents;
  ReasoningConfig reasoning;
  std::map<std::string, ReasoningConfig> bindings;  // model_binding -> backend, "default" excluded
  bool expose_raw_reasoning = false;
  agent::Limits limits;
  nlohmann::json exec = nlohmann::json::object();  // handed to exec::make_backend
  std::optional<std::size_t> inject_batch_failure_after;
  orca::KeywordCatalog catalog = orca::KeywordCatalog::defaults();
  recovery::Options recovery;
  std::vector<std::string> seed_files;  // absolute
  memory::SemanticMemory semantic;
  int node_cores = 24;
  std::string task;  // default task text, may be empty

  // Throws Error(config) with the offending key, including hierarchy problems.
  static Config from_json(const nlohmann::json& j, const std::string& base_dir);
  static Config load(const std::string& path);
};

// Tool names provided by register_builtin_tools.
std::set<std::string> builtin_tool_names();

struct Layout {
  std::string dir;
  std::string workdir;      // <dir>/work
  std::string trace_dir;    // <dir>/trace
  std::string global_path;  // <dir>/global_memory.jsonl

  static Layout at(const std::string& dir);
};

// One task on one hierarchy, with its own directory, backends and trace.
class Session {
 public:
  Session(std::string id, const std::string& dir, const Config& config, std::string task);
  ~Session();
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  const std::string& id() const { return id_; }
  const std::string& task() const { return task_; }
  const std::string& created() const { return created_; }
  const Layout& layout() const { return layout_; }
  const Config& config() const { return config_; }
  const agent::Hierarchy& hierarchy() const { return *hierarchy_; }

  // Runs on the calling thread.
  agent::SessionResult run();
  // Runs on a background thread.
  void start();
  void join();

  agent::SessionStatus state() const;
  std::optional<agent::SessionResult> result() const;

  // Throws Error(not_found) for an unknown agent and Error(conflict) once the session has ended.
  void post_message(const std::string& agent, const std::string& text);
  // Throws Error(conflict) when the session has ended, or for resume when it is not paused.
  void pause();
  void resume();
  void add_breakpoint(const agent::Breakpoint& b);
  void remove_breakpoint(const agent::Breakpoint& b);
  std::vector<agent::Breakpoint> breakpoints() const;

  trace::Trace& trace() { return *trace_; }
  const trace::Trace& trace() const { return *trace_; }
  agent::Runtime& runtime() { return *runtime_; }
  std::optional<agent::Activity> activity() const { return control_.activity(); }

  // Events as JSON; raw reasoning text is attached only when the config allows it.
  nlohmann::json events_json(std::uint64_t after, const trace::EventFilter& filter) const;
  nlohmann::json graph() const;
  nlohmann::json info() const;
  nlohmann::json list_files(const std::string& rel) const;
  std::string read_file(const std::string& rel) const;
  nlohmann::json notebook() const;

 private:
  void finish(const agent::SessionResult& r);
  void persist() const;

  std::string id_;
  std::string task_;
  std::string created_;
  Layout layout_;
  Config config_;
  tools::Registry registry_;
  std::unique_ptr<agent::Hierarchy> hierarchy_;
  std::unique_ptr<exec::Backend> exec_;
  std::map<std::string, std::unique_ptr<reasoning::Backend>> backends_;
  std::unique_ptr<trace::Trace> trace_;
  std::unique_ptr<memory::GlobalMemory> global_;
  memory::EpisodicStore episodic_;
  reasoning::UsageLedger usage_;
  agent::Control control_;
  std::unique_ptr<agent::Runtime> runtime_;

  mutable std::mutex mu_;
  std::optional<agent::SessionResult> result_;
  bool started_ = false;
  std::thread thread_;
};

// Sessions under one root directory, named session-0001, session-0002, ...
class SessionManager {
 public:
  SessionManager(std::string root_dir, Config defaults);

  std::shared_ptr<Session> create(const std::string& task, const std::optional<nlohmann::json>& config = {},
                                  bool start = true);
  std::shared_ptr<Session> get(const std::string& id) const;
  std::vector<std::shared_ptr<Session>> list() const;
  const Config& defaults() const { return defaults_; }
  const std::string& root_dir() const { return root_; }

 private:
  std::string root_;
  Config defaults_;
  mutable std::mutex mu_;
  std::vector<std::shared_ptr<Session>> sessions_;
  int next_ = 1;
};

// Reads a finished or running session's trace from <sessions_dir>/<id>/trace.
std::vector<trace::ActionEvent> load_session_events(const std::string& sessions_dir, const std::string& id);

}  // namespace chemflow::session
