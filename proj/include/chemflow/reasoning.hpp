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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "chemflow/error.hpp"

namespace chemflow::reasoning {

struct Decision {
  enum class Action { invoke_tool, delegate, respond, fail };

  Action action = Action::fail;
  std::string target;  // tool or child agent
  nlohmann::json args = nlohmann::json::object();
  std::string body;    // delegation body, response summary or failure reason

  static Decision invoke(std::string tool, nlohmann::json args);
  static Decision delegate_to(std::string child, std::string body);
  static Decision respond(std::string summary);
  static Decision fail(std::string reason);

  nlohmann::json to_json() const;
  static Decision from_json(const nlohmann::json& j);
  std::string describe() const;
  bool operator==(const Decision&) const = default;
};

const char* to_string(Decision::Action a) noexcept;

struct ReasoningRequest {
  std::string agent_id;
  std::string rendered_context;
  std::vector<std::string> allowed_actions;
};

// ceil(bytes / 4)
std::size_t count_tokens(std::string_view text);

struct UsageRecord {
  std::string agent_id;
  std::size_t tokens_in = 0;
  std::size_t tokens_out = 0;
};

struct UsageTotals {
  std::size_t tokens_in = 0;
  std::size_t tokens_out = 0;
  std::size_t calls = 0;
  std::size_t last_context = 0;  // tokens_in of the most recent call
  std::size_t peak_context = 0;

  bool operator==(const UsageTotals&) const = default;
};

class UsageLedger {
 public:
  void add(const UsageRecord& r);
  std::map<std::string, UsageTotals> per_agent() const;
  UsageTotals session() const;
  std::vector<UsageRecord> records() const;
  nlohmann::json to_json() const;

 private:
  mutable std::mutex mu_;
  std::vector<UsageRecord> records_;
};

struct DecideResult {
  Decision decision;
  UsageRecord usage;
  std::string raw;  // backend response text as received
};

// Thrown for replies that do not parse into a decision; keeps the raw reply.
class ReplyParseError : public Error {
 public:
  ReplyParseError(const std::string& what, std::string raw) : Error(Errc::parse, what), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  virtual DecideResult decide(const ReasoningRequest& request) = 0;
};

struct Rule {
  std::string agent = "*";
  std::vector<std::string> contains;
  std::vector<std::string> excludes;
  Decision decision;

  bool matches(const ReasoningRequest& r) const;
};

// Rules file grammar, one rule per line ('#' starts a comment, '\' continues a line):
//   rule <agent|*> [contains "<text>"]... [not "<text>"]... => <action>
//   <action> := invoke <tool> [<json object>] | delegate <child> "<body>" | respond "<summary>" | fail "<reason>"
// Strings use JSON escapes. Response text may use {last:tool_result} and {last:report}, which expand to
// the body of the latest such message in the rendered context.
class ScriptedPolicy final : public Backend {
 public:
  ScriptedPolicy() = default;
  explicit ScriptedPolicy(std::vector<Rule> rules) : rules_(std::move(rules)) {}

  static ScriptedPolicy parse(std::string_view text);
  static ScriptedPolicy load(const std::string& path);

  std::string name() const override { return "scripted"; }
  DecideResult decide(const ReasoningRequest& request) override;
  const std::vector<Rule>& rules() const { return rules_; }

 private:
  std::vector<Rule> rules_;
};

// Body of the latest message of `kind` in a context rendered by the agent runtime.
std::optional<std::string> last_message_body(std::string_view rendered_context, std::string_view kind);

// Extracts a decision from free model text: the first JSON object with an "action" key.
Decision parse_reply(const std::string& raw);

struct LiveConfig {
  std::string url;    // http://host:port/path
  std::string token;  // bearer credential
  int attempts = 3;
  std::chrono::milliseconds backoff{200};
  std::chrono::seconds timeout{120};

  // CHEMFLOW_LLM_URL and CHEMFLOW_LLM_TOKEN
  static LiveConfig from_env();
};

// POSTs {agent_id, context, allowed_actions} as JSON and expects a reply whose text contains a decision
// object. Transport failures and 5xx replies are retried with exponential backoff.
class LiveBackend final : public Backend {
 public:
  explicit LiveBackend(LiveConfig config);

  std::string name() const override { return "live"; }
  DecideResult decide(const ReasoningRequest& request) override;
  int last_attempts() const { return last_attempts_; }

 private:
  LiveConfig config_;
  std::string scheme_host_port_;
  std::string path_;
  int last_attempts_ = 0;
};

std::unique_ptr<Backend> make_backend(const std::string& kind, const std::string& rules_path);

}  // namespace chemflow::reasoning
