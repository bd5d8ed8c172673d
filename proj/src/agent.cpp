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

#include "chemflow/agent.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "chemflow/error.hpp"
#include "chemflow/text.hpp"

namespace chemflow::agent {

namespace {

struct BudgetExceeded {};

}  // namespace

// ---------------------------------------------------------------- hierarchy

Hierarchy::Hierarchy(std::vector<AgentSpec> agents, std::string root, const std::set<std::string>& tools,
                     int max_depth)
    : agents_(std::move(agents)), tools_(tools), root_(std::move(root)) {
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    const auto& id = agents_[i].id;
    if (id.empty()) throw Error(Errc::config, "agent with empty id");
    if (id == "user") throw Error(Errc::config, "agent id 'user' is reserved");
    if (!index_.emplace(id, i).second) throw Error(Errc::config, "duplicate agent id: " + id);
    if (tools_.count(id)) throw Error(Errc::config, "agent id clashes with a tool name: " + id);
  }
  if (!is_agent(root_)) throw Error(Errc::config, "root agent is not registered: " + root_);
  for (const auto& a : agents_) {
    std::set<std::string> seen;
    for (const auto& m : a.callable_modules) {
      if (!is_agent(m) && !is_tool(m))
        throw Error(Errc::config, "agent " + a.id + " references unregistered module: " + m);
      if (m == a.id) throw Error(Errc::config, "agent " + a.id + " lists itself as callable");
      if (!seen.insert(m).second) throw Error(Errc::config, "agent " + a.id + " lists " + m + " twice");
    }
  }

  // 0 unvisited, 1 on stack, 2 done
  std::map<std::string, int> state;
  std::function<void(const std::string&, std::vector<std::string>&)> visit = [&](const std::string& id,
                                                                                   std::vector<std::string>& path) {
    state[id] = 1;
    path.push_back(id);
    for (const auto& m : agent(id).callable_modules) {
      if (!is_agent(m)) continue;
      if (state[m] == 1) {
        path.push_back(m);
        throw Error(Errc::config, "cycle in agent hierarchy: " + text::join(path, " -> "));
      }
      if (state[m] == 0) visit(m, path);
    }
    path.pop_back();
    state[id] = 2;
  };
  for (const auto& a : agents_) {
    std::vector<std::string> path;
    if (state[a.id] == 0) visit(a.id, path);
  }

  std::function<void(const std::string&, int)> descend = [&](const std::string& id, int d) {
    auto it = depth_.find(id);
    if (it != depth_.end() && it->second >= d) return;
    depth_[id] = d;
    if (d > max_depth)
      throw Error(Errc::config, "agent " + id + " is at depth " + std::to_string(d) + ", limit is " +
                                    std::to_string(max_depth));
    for (const auto& m : agent(id).callable_modules)
      if (is_agent(m)) descend(m, d + 1);
  };
  descend(root_, 0);
}

const AgentSpec& Hierarchy::agent(const std::string& id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw Error(Errc::not_found, "unknown agent: " + id);
  return agents_[it->second];
}

int Hierarchy::depth(const std::string& id) const {
  auto it = depth_.find(id);
  return it == depth_.end() ? -1 : it->second;
}

int Hierarchy::max_depth() const {
  int d = 0;
  for (const auto& [id, v] : depth_) d = std::max(d, v);
  return d;
}

bool Hierarchy::has_edge(const std::string& from, const std::string& to) const {
  if (!is_agent(from)) return false;
  const auto& mods = agent(from).callable_modules;
  return std::find(mods.begin(), mods.end(), to) != mods.end();
}

std::vector<Edge> Hierarchy::edges() const {
  std::vector<Edge> out;
  for (const auto& a : agents_)
    for (const auto& m : a.callable_modules) out.push_back({a.id, m, is_agent(m)});
  return out;
}

// ---------------------------------------------------------------- messages

const char* to_string(MessageKind k) noexcept {
  switch (k) {
    case MessageKind::user: return "user";
    case MessageKind::command: return "command";
    case MessageKind::report: return "report";
    case MessageKind::tool_call: return "tool_call";
    case MessageKind::tool_result: return "tool_result";
    case MessageKind::error: return "error";
  }
  return "user";
}

nlohmann::json Message::to_json() const {
  nlohmann::json j = {{"id", id}, {"session_id", session_id}, {"kind", to_string(kind)}, {"from", from},
                      {"to", to}, {"body", body}, {"timestamp", ts}};
  if (!summary.empty()) j["summary"] = summary;
  if (!exchange.empty()) j["exchange"] = exchange;
  return j;
}

std::string WorkingMemory::render() const {
  std::ostringstream os;
  os << "# agent " << agent << "\n";
  os << "## role\n" << role_text << (role_text.empty() || role_text.back() == '\n' ? "" : "\n");
  if (!context_doc.empty())
    os << "## context\n" << context_doc << (context_doc.back() == '\n' ? "" : "\n");
  os << "## callable modules\n";
  for (const auto& c : callable) os << "- " << c.name << (c.agent ? " (agent)\n" : " (tool)\n");
  os << "## global memory\n";
  for (const auto& g : global_excerpt) os << "[" << g.seq << "] " << g.author << ": " << g.text << "\n";
  os << "## working directory\n" << grounding.render();
  os << "## retrieved\n";
  for (const auto& r : retrieved) os << "- " << r.text << "\n";
  os << "## conversation\n";
  for (const auto& m : conversation) {
    os << "--- message " << m.id << " kind=" << to_string(m.kind) << " from=" << m.from << " to=" << m.to << "\n";
    os << m.body << "\n--- end\n";
  }
  return os.str();
}

// ---------------------------------------------------------------- results

const char* to_string(SessionStatus s) noexcept {
  switch (s) {
    case SessionStatus::running: return "running";
    case SessionStatus::paused: return "paused";
    case SessionStatus::done: return "done";
    case SessionStatus::failed: return "failed";
    case SessionStatus::budget_exceeded: return "budget_exceeded";
  }
  return "running";
}

double SessionResult::root_context_share(const std::string& root) const {
  std::size_t total = 0;
  for (const auto& [id, u] : usage) total += u.last_context;
  auto it = usage.find(root);
  if (total == 0 || it == usage.end()) return 0.0;
  return static_cast<double>(it->second.last_context) / static_cast<double>(total);
}

nlohmann::json SessionResult::to_json() const {
  nlohmann::json per_agent = nlohmann::json::object();
  for (const auto& [id, u] : usage)
    per_agent[id] = {{"tokens_in", u.tokens_in},
                     {"tokens_out", u.tokens_out},
                     {"calls", u.calls},
                     {"final_context", u.last_context},
                     {"peak_context", u.peak_context}};
  nlohmann::json j = {{"status", to_string(status)},
                      {"final_response", final_response},
                      {"trace_dir", trace_dir},
                      {"counters", counters.to_json()},
                      {"steps", steps},
                      {"max_depth", max_depth_reached},
                      {"usage", per_agent}};
  if (!error.empty()) j["error"] = error;
  return j;
}

// ---------------------------------------------------------------- control

void Control::request_pause() {
  std::lock_guard lock(mu_);
  pause_requested_ = true;
}

void Control::resume() {
  {
    std::lock_guard lock(mu_);
    pause_requested_ = false;
    paused_ = false;
  }
  cv_.notify_all();
}

void Control::cancel() {
  {
    std::lock_guard lock(mu_);
    cancelled_ = true;
  }
  cv_.notify_all();
}

bool Control::paused() const {
  std::lock_guard lock(mu_);
  return paused_;
}

bool Control::cancelled() const {
  std::lock_guard lock(mu_);
  return cancelled_;
}

bool Control::wait_paused(std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return cv_.wait_for(lock, timeout, [&] { return paused_; });
}

void Control::add_breakpoint(Breakpoint b) {
  std::lock_guard lock(mu_);
  breakpoints_.insert(std::move(b));
}

void Control::remove_breakpoint(const Breakpoint& b) {
  std::lock_guard lock(mu_);
  breakpoints_.erase(b);
}

std::vector<Breakpoint> Control::breakpoints() const {
  std::lock_guard lock(mu_);
  return {breakpoints_.begin(), breakpoints_.end()};
}

void Control::post(const std::string& agent, const std::string& text) {
  std::lock_guard lock(mu_);
  inbox_[agent].push_back(text);
}

std::vector<std::string> Control::drain(const std::string& agent) {
  std::lock_guard lock(mu_);
  auto it = inbox_.find(agent);
  if (it == inbox_.end()) return {};
  std::vector<std::string> out(it->second.begin(), it->second.end());
  inbox_.erase(it);
  return out;
}

std::size_t Control::pending() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [a, q] : inbox_) n += q.size();
  return n;
}

std::optional<Activity> Control::activity() const {
  std::lock_guard lock(mu_);
  return activity_;
}

void Control::set_activity(std::optional<Activity> a) {
  std::lock_guard lock(mu_);
  activity_ = std::move(a);
}

void Control::checkpoint(const std::string& agent, std::optional<trace::Kind> kind) {
  std::unique_lock lock(mu_);
  if (cancelled_) throw Error(Errc::unavailable, "session cancelled");
  bool hit = pause_requested_ || (kind && (breakpoints_.count({agent, *kind}) || breakpoints_.count({"*", *kind})));
  if (!hit) return;
  paused_ = true;
  pause_requested_ = false;
  cv_.notify_all();
  cv_.wait(lock, [&] { return !paused_ || cancelled_; });
  if (cancelled_) throw Error(Errc::unavailable, "session cancelled");
}

// ---------------------------------------------------------------- runtime

Runtime::Runtime(SessionEnv env, Limits limits) : env_(std::move(env)), limits_(limits) {
  if (!env_.hierarchy || !env_.tools || !env_.trace)
    throw Error(Errc::invalid_argument, "session needs a hierarchy, a tool registry and a trace");
  if (env_.backends.empty()) throw Error(Errc::invalid_argument, "session needs a reasoning backend");
}

WorkingMemory Runtime::assemble_working_memory(const std::string& agent) const {
  const auto& spec = env_.hierarchy->agent(agent);
  WorkingMemory wm;
  wm.agent = agent;
  wm.role_text = spec.role_text;
  wm.context_doc = spec.context_doc;
  for (const auto& m : spec.callable_modules) wm.callable.push_back({m, env_.hierarchy->is_agent(m)});
  if (env_.global_memory) wm.global_excerpt = env_.global_memory->last(limits_.global_excerpt);
  wm.conversation = conversation(agent);
  wm.grounding = memory::snapshot_grounding(env_.workdir, limits_.grounding_depth);
  if (env_.semantic) wm.retrieved = env_.semantic->retrieve(agent, spec.semantic_keys);
  wm.token_estimate = reasoning::count_tokens(wm.render());
  return wm;
}

std::vector<Message> Runtime::conversation(const std::string& agent) const {
  std::lock_guard lock(mu_);
  std::vector<Message> out;
  auto it = conversations_.find(agent);
  if (it == conversations_.end()) return out;
  for (auto i : it->second) out.push_back(messages_[i]);
  return out;
}

std::vector<Message> Runtime::messages() const {
  std::lock_guard lock(mu_);
  return messages_;
}

Message Runtime::append(Message m) {
  std::lock_guard lock(mu_);
  m.id = "m" + std::to_string(next_message_++);
  m.session_id = env_.session_id;
  m.ts = text::now_iso8601();
  messages_.push_back(std::move(m));
  auto idx = messages_.size() - 1;
  const auto& stored = messages_.back();
  for (const auto* who : {&stored.from, &stored.to})
    if (env_.hierarchy->is_agent(*who)) {
      auto& conv = conversations_[*who];
      if (conv.empty() || conv.back() != idx) conv.push_back(idx);
    }
  return messages_.back();
}

trace::ActionEvent Runtime::record(trace::ActionEvent e, const std::optional<std::string>& payload) {
  return env_.trace->record(std::move(e), payload);
}

void Runtime::checkpoint(const std::string& agent, std::optional<trace::Kind> kind) {
  if (env_.control) env_.control->checkpoint(agent, kind);
}

std::string Runtime::delegate(const std::string& parent, const std::string& child, const std::string& body) {
  if (!env_.hierarchy->is_agent(child) || !env_.hierarchy->has_edge(parent, child))
    throw Error(Errc::protocol, "no delegation edge " + parent + " -> " + child);
  std::string ex;
  {
    std::lock_guard lock(mu_);
    ex = "x" + std::to_string(next_exchange_++);
    open_[ex] = {parent, child};
  }
  Message m;
  m.kind = MessageKind::command;
  m.from = parent;
  m.to = child;
  m.body = body;
  m.exchange = ex;
  m.origin_depth = std::max(0, env_.hierarchy->depth(parent));
  append(std::move(m));

  trace::ActionEvent e;
  e.agent = parent;
  e.kind = trace::Kind::commanding;
  e.title = "delegate to " + child;
  e.target = child;
  e.summary = text::cap(body, limits_.summary_cap);
  e.exchange = ex;
  record(std::move(e));
  return ex;
}

void Runtime::report(const std::string& child, const std::string& exchange, const std::string& summary, bool error) {
  Open open;
  {
    std::lock_guard lock(mu_);
    auto it = open_.find(exchange);
    if (it == open_.end()) throw Error(Errc::protocol, "report without a matching command: " + exchange);
    if (it->second.child != child)
      throw Error(Errc::protocol, "exchange " + exchange + " was not delegated to " + child);
    open = it->second;
    open_.erase(it);
  }
  Message m;
  m.kind = error ? MessageKind::error : MessageKind::report;
  m.from = child;
  m.to = open.parent;
  m.body = text::cap(summary, limits_.summary_cap);
  m.exchange = exchange;
  m.origin_depth = std::max(0, env_.hierarchy->depth(child));
  auto body = append(std::move(m)).body;

  trace::ActionEvent e;
  e.agent = child;
  e.kind = trace::Kind::reporting;
  e.title = (error ? "error to " : "report to ") + open.parent;
  e.target = open.parent;
  e.summary = body;
  e.exchange = exchange;
  record(std::move(e));

  if (env_.hierarchy->agent(child).forgetful) {
    std::lock_guard lock(mu_);
    conversations_[child].clear();
  }
}

void Runtime::drain_inbox(const std::string& agent, int depth) {
  if (!env_.control) return;
  for (const auto& text : env_.control->drain(agent)) {
    Message m;
    m.kind = MessageKind::user;
    m.from = "user";
    m.to = agent;
    m.body = text;
    m.origin_depth = depth;
    append(std::move(m));
    trace::ActionEvent e;
    e.agent = "user";
    e.kind = trace::Kind::user;
    e.title = "message to " + agent;
    e.target = agent;
    e.summary = text::cap(text, limits_.summary_cap);
    record(std::move(e));
  }
}

reasoning::DecideResult Runtime::decide(const std::string& agent, const WorkingMemory& wm) {
  const auto& spec = env_.hierarchy->agent(agent);
  auto it = env_.backends.find(spec.model_binding);
  if (it == env_.backends.end()) it = env_.backends.find("default");
  if (it == env_.backends.end() || !it->second)
    throw Error(Errc::config, "no reasoning backend for binding " + spec.model_binding);

  reasoning::ReasoningRequest req;
  req.agent_id = agent;
  req.rendered_context = wm.render();
  req.allowed_actions = spec.callable_modules;
  req.allowed_actions.push_back("respond");
  req.allowed_actions.push_back("fail");
  try {
    auto r = it->second->decide(req);
    if (env_.usage) env_.usage->add(r.usage);
    return r;
  } catch (const reasoning::ReplyParseError&) {
    if (env_.usage) env_.usage->add({agent, reasoning::count_tokens(req.rendered_context), 0});
    throw;
  }
}

std::optional<std::string> Runtime::check_action_space(const std::string& agent, int depth,
                                                       const reasoning::Decision& d) const {
  using A = reasoning::Decision::Action;
  if (d.action != A::invoke_tool && d.action != A::delegate) return std::nullopt;
  const auto& h = *env_.hierarchy;
  if (!h.has_edge(agent, d.target)) return "action-space violation: " + d.target + " is not callable by " + agent;
  if (d.action == A::invoke_tool && !h.is_tool(d.target))
    return "action-space violation: " + d.target + " is an agent, not a tool";
  if (d.action == A::invoke_tool && !env_.tools->contains(d.target))
    return "action-space violation: tool " + d.target + " is not registered";
  if (d.action == A::delegate && !h.is_agent(d.target))
    return "action-space violation: " + d.target + " is a tool, not an agent";
  if (d.action == A::delegate && depth + 1 > limits_.max_depth)
    return "action-space violation: delegation below depth " + std::to_string(limits_.max_depth);
  return std::nullopt;
}

Runtime::Outcome Runtime::run_agent(const std::string& agent, int depth) {
  using A = reasoning::Decision::Action;
  {
    std::lock_guard lock(mu_);
    max_depth_reached_ = std::max(max_depth_reached_, depth);
  }
  int reasks = 0;
  for (;;) {
    checkpoint(agent, std::nullopt);
    drain_inbox(agent, depth);
    {
      std::lock_guard lock(mu_);
      if (steps_ >= limits_.max_steps) throw BudgetExceeded{};
      ++steps_;
    }
    auto wm = assemble_working_memory(agent);

    reasoning::Decision decision;
    std::optional<std::string> problem;
    try {
      auto r = decide(agent, wm);
      decision = r.decision;
      trace::ActionEvent e;
      e.agent = agent;
      e.kind = trace::Kind::system;
      e.title = "decision";
      e.summary = text::cap(decision.describe(), limits_.summary_cap);
      e.args = {{"tokens_in", r.usage.tokens_in}, {"tokens_out", r.usage.tokens_out}};
      record(std::move(e), r.raw);
      if (env_.episodic) env_.episodic->write({agent, env_.session_id, decision.to_json(), ""});
      problem = check_action_space(agent, depth, decision);
    } catch (const reasoning::ReplyParseError& err) {
      trace::ActionEvent e;
      e.agent = agent;
      e.kind = trace::Kind::system;
      e.title = "unparseable reply";
      e.summary = err.what();
      record(std::move(e), err.raw());
      problem = std::string("unparseable reply: ") + err.what();
    }

    if (problem) {
      trace::ActionEvent e;
      e.agent = agent;
      e.kind = trace::Kind::system;
      e.title = "rejected decision";
      e.summary = *problem;
      record(std::move(e));
      if (reasks >= limits_.max_reasks) {
        decision = reasoning::Decision::fail(*problem);
      } else {
        ++reasks;
        Message m;
        m.kind = MessageKind::error;
        m.from = "runtime";
        m.to = agent;
        m.body = *problem + "; choose another action";
        m.origin_depth = depth;
        append(std::move(m));
        continue;
      }
    }
    reasks = 0;

    switch (decision.action) {
      case A::invoke_tool: {
        checkpoint(agent, trace::Kind::acting);
        if (env_.control) env_.control->set_activity(Activity{agent, trace::Kind::acting, decision.target});
        Message call;
        call.kind = MessageKind::tool_call;
        call.from = agent;
        call.to = decision.target;
        call.body = trace::call_expression(decision.target, decision.args);
        call.origin_depth = depth;
        append(std::move(call));

        auto ctx = env_.tool_context;
        ctx.agent = agent;
        ctx.workdir = env_.workdir;
        ctx.session_id = env_.session_id;
        ctx.trace = env_.trace;
        if (!ctx.global_memory) ctx.global_memory = env_.global_memory;
        tools::ToolResult result;
        try {
          result = env_.tools->invoke(ctx, decision.target, decision.args);
        } catch (...) {
          if (env_.control) env_.control->set_activity(std::nullopt);
          throw;
        }
        if (env_.control) env_.control->set_activity(std::nullopt);

        Message res;
        res.kind = MessageKind::tool_result;
        res.from = decision.target;
        res.to = agent;
        res.body = (result.ok ? "" : "[failed] ") + result.summary;
        res.origin_depth = depth;
        append(std::move(res));
        break;
      }
      case A::delegate: {
        checkpoint(agent, trace::Kind::commanding);
        if (env_.control) env_.control->set_activity(Activity{agent, trace::Kind::commanding, decision.target});
        auto ex = delegate(agent, decision.target, decision.body);
        auto out = run_agent(decision.target, depth + 1);
        report(decision.target, ex, out.text, !out.ok);
        break;
      }
      case A::respond:
        if (depth > 0) checkpoint(agent, trace::Kind::reporting);
        return {true, decision.body};
      case A::fail:
        if (depth > 0) checkpoint(agent, trace::Kind::reporting);
        return {false, decision.body};
    }
  }
}

SessionResult Runtime::run(const std::string& task) {
  SessionResult res;
  res.trace_dir = env_.trace->dir();
  const auto& root = env_.hierarchy->root();
  auto note = [&](const std::string& title, const std::string& summary) {
    try {
      trace::ActionEvent e;
      e.agent = root;
      e.kind = trace::Kind::system;
      e.title = title;
      e.summary = text::cap(summary, limits_.summary_cap);
      record(std::move(e));
    } catch (const std::exception&) {
    }
  };
  try {
    Message m;
    m.kind = MessageKind::user;
    m.from = "user";
    m.to = root;
    m.body = task;
    append(std::move(m));
    trace::ActionEvent e;
    e.agent = "user";
    e.kind = trace::Kind::user;
    e.title = "task";
    e.target = root;
    e.summary = task;
    record(std::move(e));

    auto out = run_agent(root, 0);
    res.status = out.ok ? SessionStatus::done : SessionStatus::failed;
    res.final_response = out.text;
    if (!out.ok) res.error = out.text;
    note(out.ok ? "final response" : "session failed", out.text);
  } catch (const BudgetExceeded&) {
    res.status = SessionStatus::budget_exceeded;
    res.error = "step budget of " + std::to_string(limits_.max_steps) + " exhausted";
    note("budget exceeded", res.error);
  } catch (const std::exception& e) {
    res.status = SessionStatus::failed;
    res.error = e.what();
    note("session failed", res.error);
  }
  if (env_.control) env_.control->set_activity(std::nullopt);
  res.counters = env_.trace->counters();
  {
    std::lock_guard lock(mu_);
    res.steps = steps_;
    res.max_depth_reached = max_depth_reached_;
  }
  if (env_.usage) res.usage = env_.usage->per_agent();
  return res;
}

}  // namespace chemflow::agent
