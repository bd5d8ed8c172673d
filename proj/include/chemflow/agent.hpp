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

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "chemflow/memory.hpp"
#include "chemflow/reasoning.hpp"
#include "chemflow/tools.hpp"
#include "chemflow/trace.hpp"

namespace chemflow::agent {

inline constexpr int kMaxDepth = 6;

struct AgentSpec {
  std::string id;
  std::string role_text;
  std::string context_doc;
  std::vector<std::string> callable_modules;  // child agents and tools, in order
  std::set<std::string> semantic_keys;
  std::string model_binding = "default";
  bool forgetful = false;
};

struct Edge {
  std::string from;
  std::string to;
  bool to_agent = false;

  bool operator==(const Edge&) const = default;
};

// Validated callable graph. Agent and tool names share one namespace.
class Hierarchy {
 public:
  // Throws Error(config) for duplicate or clashing names, unregistered references, cycles and
  // agents deeper than max_depth below the root.
  Hierarchy(std::vector<AgentSpec> agents, std::string root, const std::set<std::string>& tools,
            int max_depth = kMaxDepth);

  const std::string& root() const { return root_; }
  bool is_agent(const std::string& name) const { return index_.count(name) > 0; }
  bool is_tool(const std::string& name) const { return tools_.count(name) > 0; }
  const AgentSpec& agent(const std::string& id) const;
  const std::vector<AgentSpec>& agents() const { return agents_; }
  // Longest path length from the root; -1 for agents the root cannot reach.
  int depth(const std::string& id) const;
  int max_depth() const;
  bool has_edge(const std::string& from, const std::string& to) const;
  std::vector<Edge> edges() const;

 private:
  std::vector<AgentSpec> agents_;
  std::map<std::string, std::size_t> index_;
  std::set<std::string> tools_;
  std::string root_;
  std::map<std::string, int> depth_;
};

enum class MessageKind { user, command, report, tool_call, tool_result, error };

const char* to_string(MessageKind k) noexcept;

struct Message {
  std::string id;
  std::string session_id;
  MessageKind kind = MessageKind::user;
  std::string from;
  std::string to;
  std::string body;
  std::string summary;
  std::string ts;
  std::string exchange;
  int origin_depth = 0;  // depth of the agent whose action produced the message

  nlohmann::json to_json() const;
};

struct CallableEntry {
  std::string name;
  bool agent = false;
};

struct WorkingMemory {
  std::string agent;
  std::string role_text;
  std::string context_doc;
  std::vector<CallableEntry> callable;
  std::vector<memory::GlobalMemoryEntry> global_excerpt;
  std::vector<Message> conversation;
  memory::GroundingSnapshot grounding;
  std::vector<memory::SemanticEntry> retrieved;
  std::size_t token_estimate = 0;

  // Byte-stable: depends only on the fields above, never on timestamps.
  std::string render() const;
};

struct Limits {
  std::size_t max_steps = 500;
  int max_depth = kMaxDepth;
  int max_reasks = 2;
  std::size_t summary_cap = tools::kSummaryCap;
  std::size_t global_excerpt = memory::kDefaultGlobalExcerpt;
  int grounding_depth = 4;
};

enum class SessionStatus { running, paused, done, failed, budget_exceeded };

const char* to_string(SessionStatus s) noexcept;

struct SessionResult {
  SessionStatus status = SessionStatus::running;
  std::string final_response;
  std::string error;
  std::string trace_dir;
  trace::Counters counters;
  std::size_t steps = 0;
  int max_depth_reached = 0;
  std::map<std::string, reasoning::UsageTotals> usage;

  // Share of the root agent's final context in the sum of all agents' final contexts.
  double root_context_share(const std::string& root) const;
  nlohmann::json to_json() const;
};

struct Activity {
  std::string agent;
  trace::Kind kind = trace::Kind::system;
  std::string target;
};

struct Breakpoint {
  std::string agent;
  trace::Kind kind = trace::Kind::acting;

  bool operator<(const Breakpoint& o) const {
    return std::tie(agent, kind) < std::tie(o.agent, o.kind);
  }
  bool operator==(const Breakpoint&) const = default;
};

// Steering shared between a running session and outside callers. All members are thread-safe.
class Control {
 public:
  void request_pause();
  void resume();
  void cancel();
  bool paused() const;
  bool cancelled() const;
  // Waits until the run is blocked at a boundary or the timeout passes.
  bool wait_paused(std::chrono::milliseconds timeout) const;

  void add_breakpoint(Breakpoint b);
  void remove_breakpoint(const Breakpoint& b);
  std::vector<Breakpoint> breakpoints() const;

  void post(const std::string& agent, const std::string& text);
  std::vector<std::string> drain(const std::string& agent);
  std::size_t pending() const;

  std::optional<Activity> activity() const;

  // Runtime side: blocks at a step boundary while paused. `kind` is the event the next action
  // will record, or empty before reasoning. Throws Error(unavailable) once cancelled.
  void checkpoint(const std::string& agent, std::optional<trace::Kind> kind);
  void set_activity(std::optional<Activity> a);

 private:
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  bool pause_requested_ = false;
  bool paused_ = false;
  bool cancelled_ = false;
  std::set<Breakpoint> breakpoints_;
  std::map<std::string, std::deque<std::string>> inbox_;
  std::optional<Activity> activity_;
};

struct SessionEnv {
  std::string session_id;
  std::string workdir;
  const Hierarchy* hierarchy = nullptr;
  const tools::Registry* tools = nullptr;
  // Keyed by model_binding; "default" serves agents whose binding has no entry.
  std::map<std::string, reasoning::Backend*> backends;
  trace::Trace* trace = nullptr;
  memory::GlobalMemory* global_memory = nullptr;
  const memory::SemanticMemory* semantic = nullptr;
  memory::EpisodicStore* episodic = nullptr;
  reasoning::UsageLedger* usage = nullptr;
  Control* control = nullptr;
  tools::ToolContext tool_context;  // agent, workdir and trace are filled per call
};

// Drives one session: a single decision loop that descends through delegations.
class Runtime {
 public:
  Runtime(SessionEnv env, Limits limits = {});

  SessionResult run(const std::string& task);

  WorkingMemory assemble_working_memory(const std::string& agent) const;
  std::vector<Message> conversation(const std::string& agent) const;
  std::vector<Message> messages() const;

  // Protocol primitives. delegate returns the exchange id; both throw Error(protocol) for a missing
  // edge or an unknown exchange.
  std::string delegate(const std::string& parent, const std::string& child, const std::string& body);
  void report(const std::string& child, const std::string& exchange, const std::string& summary, bool error = false);

 private:
  struct Outcome {
    bool ok = false;
    std::string text;
  };

  Outcome run_agent(const std::string& agent, int depth);
  reasoning::DecideResult decide(const std::string& agent, const WorkingMemory& wm);
  std::optional<std::string> check_action_space(const std::string& agent, int depth,
                                                const reasoning::Decision& d) const;
  Message append(Message m);
  void drain_inbox(const std::string& agent, int depth);
  void checkpoint(const std::string& agent, std::optional<trace::Kind> kind);
  trace::ActionEvent record(trace::ActionEvent e, const std::optional<std::string>& payload = std::nullopt);

  SessionEnv env_;
  Limits limits_;
  mutable std::mutex mu_;
  std::vector<Message> messages_;
  std::map<std::string, std::vector<std::size_t>> conversations_;
  struct Open {
    std::string parent;
    std::string child;
  };
  std::map<std::string, Open> open_;
  std::uint64_t next_message_ = 1;
  std::uint64_t next_exchange_ = 1;
  std::size_t steps_ = 0;
  int max_depth_reached_ = 0;
};

}  // namespace chemflow::agent
