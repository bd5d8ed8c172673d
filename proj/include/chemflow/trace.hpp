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
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace chemflow::trace {

enum class Kind { commanding, reporting, acting, user, system };

const char* to_string(Kind k) noexcept;
Kind parse_kind(std::string_view s);

struct ActionEvent {
  std::uint64_t seq = 0;
  std::string ts;
  std::string agent;
  Kind kind = Kind::system;
  std::string title;
  std::string summary;
  std::string payload_ref;  // relative to the trace directory; empty when no payload
  std::string target;       // child agent, tool name or parent agent
  nlohmann::json args = nlohmann::json::object();  // tool arguments for acting events
  std::string exchange;     // delegation exchange id, when any

  nlohmann::json to_json() const;
  static ActionEvent from_json(const nlohmann::json& j);
  // Same record with ts cleared, for comparisons across runs.
  nlohmann::json stable_json() const;
};

struct Counters {
  std::size_t commanding = 0;
  std::size_t reporting = 0;
  std::size_t acting = 0;

  std::size_t total() const { return commanding + reporting + acting; }
  nlohmann::json to_json() const;
  bool operator==(const Counters&) const = default;
};

struct EventFilter {
  std::optional<std::string> agent;
  std::optional<Kind> kind;

  bool matches(const ActionEvent& e) const;
};

// Append-only event log stored as <dir>/trace.jsonl with payload files under <dir>/payloads.
class Trace {
 public:
  // Loads existing events when <dir>/trace.jsonl exists.
  explicit Trace(std::string dir);

  // Assigns seq and timestamp, writes the payload (if any) and the record durably, and returns the stored event.
  ActionEvent record(ActionEvent event, const std::optional<std::string>& payload = std::nullopt);

  std::vector<ActionEvent> events() const;
  std::vector<ActionEvent> events_after(std::uint64_t after, const EventFilter& filter = {}) const;
  // Blocks until an event with seq > after exists or the timeout passes; returns whether one exists.
  bool wait_for_events(std::uint64_t after, std::chrono::milliseconds timeout) const;
  std::uint64_t last_seq() const;
  Counters counters() const;
  bool degraded() const;

  const std::string& dir() const { return dir_; }
  std::string payload_path(const ActionEvent& e) const;

 private:
  std::string dir_;
  mutable std::mutex mu_;
  mutable std::condition_variable cv_;
  std::vector<ActionEvent> events_;
  bool degraded_ = false;
};

Counters count(const std::vector<ActionEvent>& events);

// Renders `name(key=value, ...)` with JSON literals for values, keys in sorted order.
std::string call_expression(const std::string& tool, const nlohmann::json& args);

// Notebook format 4.4: a markdown preamble, one markdown cell per commanding/reporting event and one
// code cell per acting event. Throws when there are no events.
nlohmann::json export_notebook(const std::vector<ActionEvent>& events, const std::string& title = "chemflow session");

// One record per event in the global-memory line format {seq, author, ts, text}.
std::string export_log(const std::vector<ActionEvent>& events);

}  // namespace chemflow::trace
