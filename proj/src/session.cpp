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

#include "chemflow/session.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>

#include "chemflow/builtin_tools.hpp"
#include "chemflow/error.hpp"
#include "chemflow/text.hpp"

namespace chemflow::session {

namespace fs = std::filesystem;
using nlohmann::json;

std::set<std::string> builtin_tool_names() {
  tools::Registry r;
  tools::register_builtin_tools(r);
  auto n = r.names();
  return {n.begin(), n.end()};
}

namespace {

std::string resolve(const std::string& base, const std::string& p) {
  fs::path x(p);
  return (x.is_relative() ? fs::path(base) / x : x).lexically_normal().string();
}

ReasoningConfig reasoning_from(const json& j, const std::string& base) {
  ReasoningConfig r;
  r.backend = j.value("backend", r.backend);
  if (j.contains("rules")) r.rules = resolve(base, j["rules"].get<std::string>());
  r.url = j.value("url", r.url);
  return r;
}

std::unique_ptr<reasoning::Backend> make_reasoning(const ReasoningConfig& rc) {
  if (text::lower(rc.backend) == "live") {
    auto lc = reasoning::LiveConfig::from_env();
    if (lc.url.empty()) lc.url = rc.url;
    return std::make_unique<reasoning::LiveBackend>(lc);
  }
  return reasoning::make_backend(rc.backend, rc.rules);
}

}  // namespace

Config Config::from_json(const json& j, const std::string& base_dir) {
  Config c;
  c.base_dir = base_dir;
  try {
    if (!j.is_object()) throw Error(Errc::config, "config must be a JSON object");
    if (!j.contains("root")) throw Error(Errc::config, "config needs 'root'");
    if (!j.contains("agents") || !j["agents"].is_array()) throw Error(Errc::config, "config needs an 'agents' array");
    c.root = j["root"].get<std::string>();
    for (const auto& a : j["agents"]) {
      agent::AgentSpec s;
      s.id = a.at("id").get<std::string>();
      s.role_text = a.value("role", std::string{});
      if (a.contains("context_file")) {
        auto p = resolve(base_dir, a["context_file"].get<std::string>());
        if (!fs::is_regular_file(p)) throw Error(Errc::config, "agent " + s.id + ": missing context file " + p);
        s.context_doc = text::read_file(p);
      } else {
        s.context_doc = a.value("context", std::string{});
      }
      s.callable_modules = a.value("callable", std::vector<std::string>{});
      auto keys = a.value("semantic_keys", std::vector<std::string>{});
      s.semantic_keys = {keys.begin(), keys.end()};
      s.model_binding = a.value("model", std::string("default"));
      s.forgetful = a.value("forgetful", false);
      c.agents.push_back(std::move(s));
    }

    if (j.contains("reasoning")) {
      const auto& r = j["reasoning"];
      c.reasoning = reasoning_from(r, base_dir);
      c.expose_raw_reasoning = r.value("expose_raw", false);
      if (r.contains("bindings"))
        for (const auto& [name, b] : r["bindings"].items()) c.bindings[name] = reasoning_from(b, base_dir);
    }

    if (j.contains("limits")) {
      const auto& l = j["limits"];
      c.limits.max_steps = l.value("max_steps", c.limits.max_steps);
      c.limits.max_depth = l.value("max_depth", c.limits.max_depth);
      c.limits.max_reasks = l.value("max_reasks", c.limits.max_reasks);
      c.limits.summary_cap = l.value("summary_cap", c.limits.summary_cap);
      c.limits.global_excerpt = l.value("global_excerpt", c.limits.global_excerpt);
      c.limits.grounding_depth = l.value("grounding_depth", c.limits.grounding_depth);
    }
    if (c.limits.max_depth < 1 || c.limits.max_depth > agent::kMaxDepth)
      throw Error(Errc::config, "limits.max_depth must be between 1 and 6");

    if (j.contains("exec")) {
      c.exec = j["exec"];
      if (c.exec.contains("fixture_map"))
        c.exec["fixture_map"] = resolve(base_dir, c.exec["fixture_map"].get<std::string>());
      if (c.exec.contains("inject_batch_failure_after"))
        c.inject_batch_failure_after = c.exec["inject_batch_failure_after"].get<std::size_t>();
      c.node_cores = c.exec.value("node_cores", c.node_cores);
    }

    if (j.contains("catalog")) {
      auto p = resolve(base_dir, j["catalog"].get<std::string>());
      if (!fs::is_regular_file(p)) throw Error(Errc::config, "missing catalog file " + p);
      c.catalog = orca::KeywordCatalog::parse(text::read_file(p));
    }

    if (j.contains("recovery")) {
      const auto& r = j["recovery"];
      c.recovery.max_retries = r.value("max_retries", c.recovery.max_retries);
      c.recovery.threshold = r.value("threshold", c.recovery.threshold);
      c.recovery.amplitude = r.value("amplitude", c.recovery.amplitude);
      c.recovery.max_polls = r.value("max_polls", c.recovery.max_polls);
      c.recovery.poll_sleep_ms = r.value("poll_sleep_ms", c.recovery.poll_sleep_ms);
      if (r.contains("replacements")) c.recovery.replacements = recovery::replacements_from_json(r["replacements"]);
    }
    c.recovery.catalog = c.catalog;

    for (const auto& s : j.value("seed_files", std::vector<std::string>{})) {
      auto p = resolve(base_dir, s);
      if (!fs::is_regular_file(p)) throw Error(Errc::config, "missing seed file " + p);
      c.seed_files.push_back(p);
    }

    if (j.contains("semantic_memory")) {
      const auto& m = j["semantic_memory"];
      c.semantic = m.is_string() ? memory::SemanticMemory::from_json(json::parse(
                                       text::read_file(resolve(base_dir, m.get<std::string>()))))
                                 : memory::SemanticMemory::from_json(m);
    }
    c.task = j.value("task", std::string{});
  } catch (const Error& e) {
    if (e.code() == Errc::config) throw;
    throw Error(Errc::config, std::string("invalid config: ") + e.what());
  } catch (const json::exception& e) {
    throw Error(Errc::config, std::string("invalid config: ") + e.what());
  }

  agent::Hierarchy(c.agents, c.root, builtin_tool_names(), c.limits.max_depth);
  for (const auto& a : c.agents)
    if (a.model_binding != "default" && !c.bindings.count(a.model_binding))
      throw Error(Errc::config, "agent " + a.id + " is bound to unknown model '" + a.model_binding + "'");
  return c;
}

Config Config::load(const std::string& path) {
  if (!fs::is_regular_file(path)) throw Error(Errc::config, "config file not found: " + path);
  json j;
  try {
    j = json::parse(text::read_file(path));
  } catch (const json::exception& e) {
    throw Error(Errc::config, "config " + path + " is not valid JSON: " + e.what());
  }
  return from_json(j, fs::absolute(path).parent_path().string());
}

Layout Layout::at(const std::string& dir) {
  auto d = fs::absolute(dir).lexically_normal();
  return {d.string(), (d / "work").string(), (d / "trace").string(), (d / "global_memory.jsonl").string()};
}

// ---------------------------------------------------------------- session

Session::Session(std::string id, const std::string& dir, const Config& config, std::string task)
    : id_(std::move(id)), task_(std::move(task)), created_(text::now_iso8601()), layout_(Layout::at(dir)),
      config_(config) {
  if (task_.empty()) throw Error(Errc::invalid_argument, "task is empty");
  fs::create_directories(layout_.workdir);
  fs::create_directories(layout_.trace_dir);
  for (const auto& s : config_.seed_files)
    fs::copy_file(s, fs::path(layout_.workdir) / fs::path(s).filename(), fs::copy_options::overwrite_existing);

  tools::register_builtin_tools(registry_);
  auto names = registry_.names();
  hierarchy_ = std::make_unique<agent::Hierarchy>(config_.agents, config_.root,
                                                  std::set<std::string>(names.begin(), names.end()),
                                                  config_.limits.max_depth);
  exec_ = exec::make_backend(config_.exec, config_.base_dir);
  if (config_.inject_batch_failure_after)
    if (auto* mock = dynamic_cast<exec::MockEngine*>(exec_.get())) mock->fail_batch_after(*config_.inject_batch_failure_after);

  backends_["default"] = make_reasoning(config_.reasoning);
  for (const auto& [name, rc] : config_.bindings) backends_[name] = make_reasoning(rc);

  trace_ = std::make_unique<trace::Trace>(layout_.trace_dir);
  global_ = std::make_unique<memory::GlobalMemory>(id_, layout_.global_path);

  agent::SessionEnv env;
  env.session_id = id_;
  env.workdir = layout_.workdir;
  env.hierarchy = hierarchy_.get();
  env.tools = &registry_;
  for (const auto& [name, b] : backends_) env.backends[name] = b.get();
  env.trace = trace_.get();
  env.global_memory = global_.get();
  env.semantic = &config_.semantic;
  env.episodic = &episodic_;
  env.usage = &usage_;
  env.control = &control_;
  env.tool_context.backend = exec_.get();
  env.tool_context.catalog = &config_.catalog;
  env.tool_context.recovery = &config_.recovery;
  env.tool_context.settings = {{"node_cores", config_.node_cores}};
  runtime_ = std::make_unique<agent::Runtime>(env, config_.limits);
  persist();
}

Session::~Session() {
  control_.cancel();
  join();
}

agent::SessionResult Session::run() {
  {
    std::lock_guard lock(mu_);
    if (started_) throw Error(Errc::conflict, "session " + id_ + " already started");
    started_ = true;
  }
  auto r = runtime_->run(task_);
  finish(r);
  return r;
}

void Session::start() {
  std::lock_guard lock(mu_);
  if (started_) throw Error(Errc::conflict, "session " + id_ + " already started");
  started_ = true;
  thread_ = std::thread([this] { finish(runtime_->run(task_)); });
}

void Session::join() {
  if (thread_.joinable() && thread_.get_id() != std::this_thread::get_id()) thread_.join();
}

void Session::finish(const agent::SessionResult& r) {
  {
    std::lock_guard lock(mu_);
    result_ = r;
  }
  try {
    persist();
  } catch (const std::exception&) {
  }
}

agent::SessionStatus Session::state() const {
  {
    std::lock_guard lock(mu_);
    if (result_) return result_->status;
  }
  return control_.paused() ? agent::SessionStatus::paused : agent::SessionStatus::running;
}

std::optional<agent::SessionResult> Session::result() const {
  std::lock_guard lock(mu_);
  return result_;
}

void Session::post_message(const std::string& agent, const std::string& text) {
  hierarchy_->agent(agent);
  if (result()) throw Error(Errc::conflict, "session " + id_ + " has ended");
  if (text.empty()) throw Error(Errc::invalid_argument, "message text is empty");
  control_.post(agent, text);
}

void Session::pause() {
  if (result()) throw Error(Errc::conflict, "session " + id_ + " has ended");
  control_.request_pause();
}

void Session::resume() {
  if (result()) throw Error(Errc::conflict, "session " + id_ + " has ended");
  if (!control_.paused()) throw Error(Errc::conflict, "session " + id_ + " is not paused");
  control_.resume();
}

void Session::add_breakpoint(const agent::Breakpoint& b) {
  if (b.agent != "*" && !hierarchy_->is_agent(b.agent)) throw Error(Errc::not_found, "unknown agent: " + b.agent);
  control_.add_breakpoint(b);
}

void Session::remove_breakpoint(const agent::Breakpoint& b) { control_.remove_breakpoint(b); }

std::vector<agent::Breakpoint> Session::breakpoints() const { return control_.breakpoints(); }

json Session::events_json(std::uint64_t after, const trace::EventFilter& filter) const {
  json arr = json::array();
  for (const auto& e : trace_->events_after(after, filter)) {
    auto j = e.to_json();
    if (config_.expose_raw_reasoning && e.kind == trace::Kind::system && !e.payload_ref.empty()) {
      try {
        j["raw"] = text::read_file(trace_->payload_path(e));
      } catch (const std::exception&) {
      }
    }
    arr.push_back(std::move(j));
  }
  return {{"session", id_}, {"events", arr}, {"last_seq", trace_->last_seq()}, {"state", to_string(state())}};
}

json Session::graph() const {
  auto act = control_.activity();
  auto events = trace_->events();
  struct Last {
    std::string kind, ts;
  };
  std::map<std::string, Last> last;
  std::map<std::string, std::string> open;  // exchange -> child agent
  for (const auto& e : events) {
    if (e.kind == trace::Kind::commanding && !e.exchange.empty()) open[e.exchange] = e.target;
    if (e.kind == trace::Kind::reporting) open.erase(e.exchange);
    if (e.kind == trace::Kind::system || e.kind == trace::Kind::user) continue;
    last[e.agent] = {trace::to_string(e.kind), e.ts};
    if (e.kind == trace::Kind::acting) last[e.target] = {"acting", e.ts};
  }
  auto st = state();
  bool live = st == agent::SessionStatus::running || st == agent::SessionStatus::paused;
  std::set<std::string> busy;
  if (live && !events.empty()) busy.insert(hierarchy_->root());
  for (const auto& [ex, child] : open) busy.insert(child);
  auto node = [&](const std::string& id, const char* type) {
    json n = {{"id", id}, {"type", type}};
    bool active = live && (busy.count(id) || (act && (act->agent == id || act->target == id)));
    n["status"] = active ? "active" : "idle";
    auto it = last.find(id);
    n["last_event_kind"] = it == last.end() ? json() : json(it->second.kind);
    n["last_event_ts"] = it == last.end() ? json() : json(it->second.ts);
    return n;
  };
  json nodes = json::array(), edges = json::array();
  std::set<std::string> tools_seen;
  for (const auto& a : hierarchy_->agents()) {
    auto n = node(a.id, "agent");
    n["depth"] = hierarchy_->depth(a.id);
    n["forgetful"] = a.forgetful;
    nodes.push_back(n);
  }
  for (const auto& e : hierarchy_->edges()) {
    edges.push_back({{"from", e.from}, {"to", e.to}});
    if (!e.to_agent && tools_seen.insert(e.to).second) nodes.push_back(node(e.to, "tool"));
  }
  json activity = act ? json{{"agent", act->agent}, {"kind", trace::to_string(act->kind)}, {"target", act->target}}
                      : json();
  return {{"root", hierarchy_->root()}, {"nodes", nodes}, {"edges", edges}, {"activity", activity},
          {"state", to_string(st)}};
}

json Session::info() const {
  json bps = json::array();
  for (const auto& b : breakpoints()) bps.push_back({{"agent", b.agent}, {"kind", trace::to_string(b.kind)}});
  json j = {{"id", id_},           {"task", task_},          {"created", created_},
            {"state", to_string(state())}, {"workdir", layout_.workdir}, {"trace_dir", layout_.trace_dir},
            {"breakpoints", bps}};
  if (auto r = result()) j["result"] = r->to_json();
  return j;
}

json Session::list_files(const std::string& rel) const {
  auto p = tools::resolve_path(layout_.workdir, rel.empty() ? "." : rel);
  if (!fs::exists(p)) throw Error(Errc::not_found, "no such path: " + rel);
  auto root = fs::weakly_canonical(layout_.workdir);
  auto rel_of = [&](const fs::path& x) {
    auto r = x.lexically_relative(root).generic_string();
    return r == "." ? std::string{} : r;
  };
  if (!fs::is_directory(p))
    return {{"path", rel_of(p)}, {"type", "file"}, {"size", fs::file_size(p)}};
  json entries = json::array();
  std::vector<fs::directory_entry> items(fs::directory_iterator(p), fs::directory_iterator{});
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.path() < b.path(); });
  for (const auto& e : items) {
    json item = {{"name", e.path().filename().string()}, {"path", rel_of(e.path())}};
    if (e.is_directory()) {
      item["type"] = "dir";
    } else {
      item["type"] = "file";
      std::error_code ec;
      auto size = e.file_size(ec);
      item["size"] = ec ? json() : json(size);
    }
    entries.push_back(item);
  }
  return {{"path", rel_of(p)}, {"type", "dir"}, {"entries", entries}};
}

std::string Session::read_file(const std::string& rel) const {
  auto p = tools::resolve_path(layout_.workdir, rel);
  if (!fs::is_regular_file(p)) throw Error(Errc::not_found, "no such file: " + rel);
  return text::read_file(p.string());
}

json Session::notebook() const { return trace::export_notebook(trace_->events(), "chemflow session " + id_); }

void Session::persist() const {
  json j = info();
  j["config_dir"] = config_.base_dir;
  text::write_file((fs::path(layout_.dir) / "session.json").string(), j.dump(2) + "\n");
}

// ---------------------------------------------------------------- manager

SessionManager::SessionManager(std::string root_dir, Config defaults)
    : root_(fs::absolute(root_dir).lexically_normal().string()), defaults_(std::move(defaults)) {
  fs::create_directories(root_);
  for (const auto& e : fs::directory_iterator(root_)) {
    auto name = e.path().filename().string();
    if (!e.is_directory() || !text::starts_with(name, "session-")) continue;
    if (auto n = text::parse_int(name.substr(8))) next_ = std::max<int>(next_, static_cast<int>(*n) + 1);
  }
}

std::shared_ptr<Session> SessionManager::create(const std::string& task, const std::optional<json>& config,
                                                bool start) {
  auto cfg = config ? Config::from_json(*config, defaults_.base_dir) : defaults_;
  auto t = task.empty() ? cfg.task : task;
  if (t.empty()) throw Error(Errc::invalid_argument, "task is empty and the config has no default task");
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(mu_);
    char buf[32];
    std::snprintf(buf, sizeof buf, "session-%04d", next_++);
    s = std::make_shared<Session>(buf, (fs::path(root_) / buf).string(), cfg, t);
    sessions_.push_back(s);
  }
  if (start) s->start();
  return s;
}

std::shared_ptr<Session> SessionManager::get(const std::string& id) const {
  std::lock_guard lock(mu_);
  for (const auto& s : sessions_)
    if (s->id() == id) return s;
  throw Error(Errc::not_found, "unknown session: " + id);
}

std::vector<std::shared_ptr<Session>> SessionManager::list() const {
  std::lock_guard lock(mu_);
  return sessions_;
}

std::vector<trace::ActionEvent> load_session_events(const std::string& sessions_dir, const std::string& id) {
  if (id.empty() || id.find('/') != std::string::npos || id.find("..") != std::string::npos)
    throw Error(Errc::invalid_argument, "bad session id: " + id);
  auto dir = fs::path(sessions_dir) / id / "trace";
  if (!fs::is_regular_file(dir / "trace.jsonl")) throw Error(Errc::not_found, "unknown session: " + id);
  return trace::Trace(dir.string()).events();
}

}  // namespace chemflow::session
