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

#include "chemflow/trace.hpp"

#include <filesystem>
#include <iomanip>
#include <sstream>

#include "chemflow/error.hpp"
#include "chemflow/text.hpp"

namespace fs = std::filesystem;

namespace chemflow::trace {

const char* to_string(Kind k) noexcept {
  switch (k) {
    case Kind::commanding: return "commanding";
    case Kind::reporting: return "reporting";
    case Kind::acting: return "acting";
    case Kind::user: return "user";
    case Kind::system: return "system";
  }
  return "?";
}

Kind parse_kind(std::string_view s) {
  auto l = text::lower(s);
  if (l == "commanding") return Kind::commanding;
  if (l == "reporting") return Kind::reporting;
  if (l == "acting") return Kind::acting;
  if (l == "user") return Kind::user;
  if (l == "system") return Kind::system;
  throw Error(Errc::invalid_argument, "unknown event kind '" + std::string(s) + "'");
}

nlohmann::json ActionEvent::to_json() const {
  nlohmann::json j = stable_json();
  j["ts"] = ts;
  return j;
}

nlohmann::json ActionEvent::stable_json() const {
  nlohmann::json j = {{"seq", seq},         {"agent", agent},         {"kind", to_string(kind)},
                      {"title", title},     {"summary", summary},     {"payload_ref", payload_ref},
                      {"target", target},   {"args", args},           {"exchange", exchange}};
  return j;
}

ActionEvent ActionEvent::from_json(const nlohmann::json& j) {
  ActionEvent e;
  e.seq = j.at("seq").get<std::uint64_t>();
  e.ts = j.value("ts", "");
  e.agent = j.at("agent").get<std::string>();
  e.kind = parse_kind(j.at("kind").get<std::string>());
  e.title = j.value("title", "");
  e.summary = j.value("summary", "");
  e.payload_ref = j.value("payload_ref", "");
  e.target = j.value("target", "");
  e.args = j.value("args", nlohmann::json::object());
  e.exchange = j.value("exchange", "");
  return e;
}

nlohmann::json Counters::to_json() const {
  return {{"commanding", commanding}, {"reporting", reporting}, {"acting", acting}, {"total", total()}};
}

bool EventFilter::matches(const ActionEvent& e) const {
  if (agent && e.agent != *agent) return false;
  if (kind && e.kind != *kind) return false;
  return true;
}

Trace::Trace(std::string dir) : dir_(std::move(dir)) {
  auto file = fs::path(dir_) / "trace.jsonl";
  if (!fs::exists(file)) return;
  int lineno = 0;
  for (const auto& line : text::lines(text::read_file(file.string()))) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      events_.push_back(ActionEvent::from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& ex) {
      throw Error(Errc::parse, file.string() + ":" + std::to_string(lineno) + ": " + ex.what());
    }
  }
}

std::string Trace::payload_path(const ActionEvent& e) const {
  if (e.payload_ref.empty()) return {};
  return (fs::path(dir_) / e.payload_ref).string();
}

ActionEvent Trace::record(ActionEvent event, const std::optional<std::string>& payload) {
  std::unique_lock lock(mu_);
  event.seq = events_.empty() ? 1 : events_.back().seq + 1;
  event.ts = text::now_iso8601();
  try {
    fs::create_directories(dir_);
    if (payload) {
      std::ostringstream name;
      name << "payloads/" << std::setw(6) << std::setfill('0') << event.seq << ".txt";
      event.payload_ref = name.str();
      fs::create_directories(fs::path(dir_) / "payloads");
      text::write_file((fs::path(dir_) / event.payload_ref).string(), *payload);
    }
    text::append_durable((fs::path(dir_) / "trace.jsonl").string(), event.to_json().dump() + "\n");
  } catch (const std::exception& ex) {
    degraded_ = true;
    throw Error(Errc::io, std::string("trace write failed: ") + ex.what());
  }
  events_.push_back(event);
  lock.unlock();
  cv_.notify_all();
  return event;
}

std::vector<ActionEvent> Trace::events() const {
  std::lock_guard lock(mu_);
  return events_;
}

std::vector<ActionEvent> Trace::events_after(std::uint64_t after, const EventFilter& filter) const {
  std::lock_guard lock(mu_);
  std::vector<ActionEvent> out;
  for (const auto& e : events_) {
    if (e.seq > after && filter.matches(e)) out.push_back(e);
  }
  return out;
}

bool Trace::wait_for_events(std::uint64_t after, std::chrono::milliseconds timeout) const {
  std::unique_lock lock(mu_);
  return cv_.wait_for(lock, timeout, [&] { return !events_.empty() && events_.back().seq > after; });
}

std::uint64_t Trace::last_seq() const {
  std::lock_guard lock(mu_);
  return events_.empty() ? 0 : events_.back().seq;
}

Counters Trace::counters() const {
  std::lock_guard lock(mu_);
  return count(events_);
}

bool Trace::degraded() const {
  std::lock_guard lock(mu_);
  return degraded_;
}

Counters count(const std::vector<ActionEvent>& events) {
  Counters c;
  for (const auto& e : events) {
    if (e.kind == Kind::commanding) ++c.commanding;
    else if (e.kind == Kind::reporting) ++c.reporting;
    else if (e.kind == Kind::acting) ++c.acting;
  }
  return c;
}

std::string call_expression(const std::string& tool, const nlohmann::json& args) {
  std::string out = tool + "(";
  bool first = true;
  if (args.is_object()) {
    for (const auto& [k, v] : args.items()) {
      if (!first) out += ", ";
      out += k + "=" + v.dump();
      first = false;
    }
  }
  return out + ")";
}

namespace {

nlohmann::json markdown_cell(const std::string& source, const nlohmann::json& meta = nlohmann::json::object()) {
  return {{"cell_type", "markdown"}, {"metadata", meta}, {"source", source}};
}

}  // namespace

nlohmann::json export_notebook(const std::vector<ActionEvent>& events, const std::string& title) {
  if (events.empty()) throw Error(Errc::invalid_argument, "cannot export an empty trace");
  std::ostringstream pre;
  pre << "# " << title << "\n\n"
      << "Each code cell records one tool call as `tool_name(arg=value, ...)`; values are JSON literals and "
         "names refer to the session's tool registry. Markdown cells hold delegation commands and reports.\n";
  for (const auto& e : events) {
    if (e.kind == Kind::user) pre << "\n**Task:** " << e.summary << "\n";
  }
  nlohmann::json cells = nlohmann::json::array();
  cells.push_back(markdown_cell(pre.str(), {{"chemflow", {{"role", "preamble"}}}}));
  for (const auto& e : events) {
    nlohmann::json meta = {{"chemflow", {{"seq", e.seq}, {"agent", e.agent}, {"kind", to_string(e.kind)}}}};
    if (e.kind == Kind::commanding || e.kind == Kind::reporting) {
      auto arrow = e.kind == Kind::commanding ? " → " : " ⇒ ";
      cells.push_back(markdown_cell("**" + e.agent + arrow + e.target + "** (" + to_string(e.kind) + ")\n\n" +
                                        e.summary,
                                    meta));
    } else if (e.kind == Kind::acting) {
      cells.push_back({{"cell_type", "code"},
                       {"execution_count", nullptr},
                       {"metadata", meta},
                       {"outputs", nlohmann::json::array()},
                       {"source", call_expression(e.target, e.args)}});
    }
  }
  return {{"nbformat", 4},
          {"nbformat_minor", 4},
          {"metadata", {{"language_info", {{"name", "chemflow-call"}}}, {"title", title}}},
          {"cells", cells}};
}

std::string export_log(const std::vector<ActionEvent>& events) {
  std::string out;
  for (const auto& e : events) {
    std::string body = "[" + std::string(to_string(e.kind)) + "] " + e.title;
    if (!e.summary.empty()) body += ": " + e.summary;
    nlohmann::json j = {{"seq", e.seq}, {"author", e.agent}, {"ts", e.ts}, {"text", body}};
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace chemflow::trace
