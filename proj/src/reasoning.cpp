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

#include "chemflow/reasoning.hpp"

#include <httplib.h>

#include <cstdlib>
#include <sstream>
#include <thread>

#include "chemflow/text.hpp"

namespace chemflow::reasoning {

const char* to_string(Decision::Action a) noexcept {
  switch (a) {
    case Decision::Action::invoke_tool: return "invoke_tool";
    case Decision::Action::delegate: return "delegate";
    case Decision::Action::respond: return "respond";
    case Decision::Action::fail: return "fail";
  }
  return "?";
}

Decision Decision::invoke(std::string tool, nlohmann::json args) {
  return {Action::invoke_tool, std::move(tool), args.is_null() ? nlohmann::json::object() : std::move(args), {}};
}
Decision Decision::delegate_to(std::string child, std::string body) {
  return {Action::delegate, std::move(child), nlohmann::json::object(), std::move(body)};
}
Decision Decision::respond(std::string summary) {
  return {Action::respond, {}, nlohmann::json::object(), std::move(summary)};
}
Decision Decision::fail(std::string reason) { return {Action::fail, {}, nlohmann::json::object(), std::move(reason)}; }

nlohmann::json Decision::to_json() const {
  nlohmann::json j = {{"action", to_string(action)}};
  switch (action) {
    case Action::invoke_tool:
      j["tool"] = target;
      j["args"] = args;
      break;
    case Action::delegate:
      j["agent"] = target;
      j["body"] = body;
      break;
    case Action::respond: j["summary"] = body; break;
    case Action::fail: j["reason"] = body; break;
  }
  return j;
}

Decision Decision::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("action") || !j["action"].is_string()) {
    throw Error(Errc::parse, "decision needs a string 'action'");
  }
  auto a = j["action"].get<std::string>();
  auto str = [&](const char* key) {
    if (!j.contains(key) || !j[key].is_string()) throw Error(Errc::parse, std::string("decision needs '") + key + "'");
    return j[key].get<std::string>();
  };
  if (a == "invoke_tool" || a == "invoke") {
    auto args = j.value("args", nlohmann::json::object());
    if (!args.is_object()) throw Error(Errc::parse, "decision 'args' must be an object");
    return invoke(str("tool"), args);
  }
  if (a == "delegate") return delegate_to(str("agent"), str("body"));
  if (a == "respond") return respond(str("summary"));
  if (a == "fail") return fail(str("reason"));
  throw Error(Errc::parse, "unknown decision action '" + a + "'");
}

std::string Decision::describe() const {
  switch (action) {
    case Action::invoke_tool: return "invoke " + target + " " + args.dump();
    case Action::delegate: return "delegate to " + target;
    case Action::respond: return "respond";
    case Action::fail: return "fail: " + body;
  }
  return "?";
}

std::size_t count_tokens(std::string_view text) { return (text.size() + 3) / 4; }

void UsageLedger::add(const UsageRecord& r) {
  std::lock_guard lock(mu_);
  records_.push_back(r);
}

std::map<std::string, UsageTotals> UsageLedger::per_agent() const {
  std::lock_guard lock(mu_);
  std::map<std::string, UsageTotals> out;
  for (const auto& r : records_) {
    auto& t = out[r.agent_id];
    t.tokens_in += r.tokens_in;
    t.tokens_out += r.tokens_out;
    ++t.calls;
    t.last_context = r.tokens_in;
    t.peak_context = std::max(t.peak_context, r.tokens_in);
  }
  return out;
}

UsageTotals UsageLedger::session() const {
  std::lock_guard lock(mu_);
  UsageTotals t;
  for (const auto& r : records_) {
    t.tokens_in += r.tokens_in;
    t.tokens_out += r.tokens_out;
    ++t.calls;
    t.last_context = r.tokens_in;
    t.peak_context = std::max(t.peak_context, r.tokens_in);
  }
  return t;
}

std::vector<UsageRecord> UsageLedger::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

nlohmann::json UsageLedger::to_json() const {
  nlohmann::json agents = nlohmann::json::object();
  for (const auto& [id, t] : per_agent()) {
    agents[id] = {{"tokens_in", t.tokens_in}, {"tokens_out", t.tokens_out}, {"calls", t.calls},
                  {"last_context", t.last_context}, {"peak_context", t.peak_context}};
  }
  auto s = session();
  return {{"agents", agents}, {"session", {{"tokens_in", s.tokens_in}, {"tokens_out", s.tokens_out}, {"calls", s.calls}}}};
}

bool Rule::matches(const ReasoningRequest& r) const {
  if (agent != "*" && agent != r.agent_id) return false;
  for (const auto& c : contains) {
    if (!text::contains(r.rendered_context, c)) return false;
  }
  for (const auto& c : excludes) {
    if (text::contains(r.rendered_context, c)) return false;
  }
  return true;
}

namespace {

class RuleLexer {
 public:
  explicit RuleLexer(std::string_view s) : s_(s) {}

  bool done() {
    skip();
    return pos_ >= s_.size();
  }

  std::string word() {
    skip();
    auto start = pos_;
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) throw Error(Errc::parse, "expected a word");
    return std::string(s_.substr(start, pos_ - start));
  }

  std::string quoted() {
    skip();
    if (pos_ >= s_.size() || s_[pos_] != '"') throw Error(Errc::parse, "expected a quoted string");
    auto start = pos_++;
    while (pos_ < s_.size() && s_[pos_] != '"') {
      if (s_[pos_] == '\\') ++pos_;
      ++pos_;
    }
    if (pos_ >= s_.size()) throw Error(Errc::parse, "unterminated string");
    ++pos_;
    return nlohmann::json::parse(s_.substr(start, pos_ - start)).get<std::string>();
  }

  std::string rest() {
    skip();
    auto r = std::string(s_.substr(pos_));
    pos_ = s_.size();
    return r;
  }

 private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  std::string_view s_;
  std::size_t pos_ = 0;
};

// Drops a '#' comment that is not inside a quoted string.
std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (in_str && c == '\\') {
      ++i;
      continue;
    }
    if (c == '"') in_str = !in_str;
    if (c == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

Rule parse_rule(const std::string& line) {
  RuleLexer lx(line);
  if (lx.word() != "rule") throw Error(Errc::parse, "expected 'rule'");
  Rule r;
  r.agent = lx.word();
  for (;;) {
    auto w = lx.word();
    if (w == "=>") break;
    if (w == "contains") r.contains.push_back(lx.quoted());
    else if (w == "not") r.excludes.push_back(lx.quoted());
    else throw Error(Errc::parse, "unexpected '" + w + "' before '=>'");
  }
  auto action = lx.word();
  if (action == "invoke") {
    auto tool = lx.word();
    auto rest = lx.rest();
    auto args = rest.empty() ? nlohmann::json::object() : nlohmann::json::parse(rest);
    if (!args.is_object()) throw Error(Errc::parse, "invoke arguments must be a JSON object");
    r.decision = Decision::invoke(tool, args);
    return r;
  }
  if (action == "delegate") {
    auto child = lx.word();
    r.decision = Decision::delegate_to(child, lx.quoted());
  } else if (action == "respond") {
    r.decision = Decision::respond(lx.quoted());
  } else if (action == "fail") {
    r.decision = Decision::fail(lx.quoted());
  } else {
    throw Error(Errc::parse, "unknown action '" + action + "'");
  }
  if (!lx.done()) throw Error(Errc::parse, "trailing text after action");
  return r;
}

std::string expand_placeholders(std::string s, std::string_view context) {
  for (const auto& kind : {"tool_result", "report"}) {
    auto key = std::string("{last:") + kind + "}";
    for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos)) {
      auto body = last_message_body(context, kind).value_or("");
      s.replace(pos, key.size(), body);
      pos += body.size();
    }
  }
  return s;
}

}  // namespace

ScriptedPolicy ScriptedPolicy::parse(std::string_view text) {
  std::vector<Rule> rules;
  std::string pending;
  int lineno = 0, start_line = 0;
  for (const auto& raw : text::lines(text)) {
    ++lineno;
    auto line = text::trim_right(strip_comment(raw));
    if (pending.empty()) start_line = lineno;
    if (!line.empty() && line.back() == '\\') {
      pending += line.substr(0, line.size() - 1) + " ";
      continue;
    }
    pending += line;
    if (text::trim(pending).empty()) {
      pending.clear();
      continue;
    }
    try {
      rules.push_back(parse_rule(pending));
    } catch (const std::exception& e) {
      throw Error(Errc::parse, "rules line " + std::to_string(start_line) + ": " + e.what());
    }
    pending.clear();
  }
  if (!text::trim(pending).empty()) throw Error(Errc::parse, "rules: dangling continuation at end of file");
  return ScriptedPolicy(std::move(rules));
}

ScriptedPolicy ScriptedPolicy::load(const std::string& path) { return parse(text::read_file(path)); }

DecideResult ScriptedPolicy::decide(const ReasoningRequest& request) {
  DecideResult out;
  out.decision = Decision::fail("no applicable action");
  for (const auto& r : rules_) {
    if (r.matches(request)) {
      out.decision = r.decision;
      if (out.decision.action == Decision::Action::respond || out.decision.action == Decision::Action::delegate ||
          out.decision.action == Decision::Action::fail) {
        out.decision.body = expand_placeholders(out.decision.body, request.rendered_context);
      }
      break;
    }
  }
  out.raw = out.decision.to_json().dump();
  out.usage = {request.agent_id, count_tokens(request.rendered_context), count_tokens(out.raw)};
  return out;
}

std::optional<std::string> last_message_body(std::string_view ctx, std::string_view kind) {
  auto marker = "--- message ";
  auto kind_tag = " kind=" + std::string(kind) + " ";
  std::optional<std::string> found;
  std::size_t pos = 0;
  while ((pos = ctx.find(marker, pos)) != std::string_view::npos) {
    auto eol = ctx.find('\n', pos);
    if (eol == std::string_view::npos) break;
    auto header = std::string(ctx.substr(pos, eol - pos)) + " ";
    auto close = ctx.find("\n--- end", eol);
    if (close == std::string_view::npos) break;
    if (text::contains(header, kind_tag)) found = std::string(ctx.substr(eol + 1, close - eol - 1));
    pos = close;
  }
  return found;
}

Decision parse_reply(const std::string& raw) {
  for (std::size_t start = raw.find('{'); start != std::string::npos; start = raw.find('{', start + 1)) {
    int depth = 0;
    bool in_str = false;
    for (std::size_t i = start; i < raw.size(); ++i) {
      char c = raw[i];
      if (in_str) {
        if (c == '\\') ++i;
        else if (c == '"') in_str = false;
        continue;
      }
      if (c == '"') in_str = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) {
        auto j = nlohmann::json::parse(raw.substr(start, i - start + 1), nullptr, false);
        if (!j.is_discarded() && j.is_object() && j.contains("action")) {
          try {
            return Decision::from_json(j);
          } catch (const Error& e) {
            throw ReplyParseError(std::string("malformed decision: ") + e.what(), raw);
          }
        }
        break;
      }
    }
  }
  throw ReplyParseError("reply contains no decision object", raw);
}

LiveConfig LiveConfig::from_env() {
  LiveConfig c;
  if (const char* u = std::getenv("CHEMFLOW_LLM_URL")) c.url = u;
  if (const char* t = std::getenv("CHEMFLOW_LLM_TOKEN")) c.token = t;
  return c;
}

LiveBackend::LiveBackend(LiveConfig config) : config_(std::move(config)) {
  if (config_.url.empty()) throw Error(Errc::config, "live backend needs CHEMFLOW_LLM_URL");
  auto scheme_end = config_.url.find("://");
  if (scheme_end == std::string::npos) throw Error(Errc::config, "live backend URL needs a scheme: " + config_.url);
  auto path_start = config_.url.find('/', scheme_end + 3);
  scheme_host_port_ = config_.url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : config_.url.substr(path_start);
  if (config_.attempts < 1) config_.attempts = 1;
}

DecideResult LiveBackend::decide(const ReasoningRequest& request) {
  nlohmann::json body = {{"agent_id", request.agent_id},
                         {"context", request.rendered_context},
                         {"allowed_actions", request.allowed_actions}};
  httplib::Client cli(scheme_host_port_);
  cli.set_connection_timeout(config_.timeout);
  cli.set_read_timeout(config_.timeout);
  httplib::Headers headers;
  if (!config_.token.empty()) headers.emplace("Authorization", "Bearer " + config_.token);
  std::string last_error;
  auto delay = config_.backoff;
  last_attempts_ = 0;
  for (int attempt = 1; attempt <= config_.attempts; ++attempt) {
    last_attempts_ = attempt;
    auto res = cli.Post(path_, headers, body.dump(), "application/json");
    if (res && res->status < 500) {
      if (res->status != 200) {
        throw Error(Errc::unavailable, "reasoning endpoint returned HTTP " + std::to_string(res->status));
      }
      DecideResult out;
      out.raw = res->body;
      std::string reply = res->body;
      std::optional<nlohmann::json> usage;
      auto j = nlohmann::json::parse(res->body, nullptr, false);
      if (!j.is_discarded() && j.is_object() && j.contains("text") && j["text"].is_string()) {
        reply = j["text"].get<std::string>();
        if (j.contains("usage")) usage = j["usage"];
      }
      out.decision = parse_reply(reply);
      out.usage = {request.agent_id, count_tokens(request.rendered_context), count_tokens(reply)};
      if (usage && usage->is_object()) {
        out.usage.tokens_in = usage->value("tokens_in", out.usage.tokens_in);
        out.usage.tokens_out = usage->value("tokens_out", out.usage.tokens_out);
      }
      return out;
    }
    last_error = res ? "HTTP " + std::to_string(res->status) : httplib::to_string(res.error());
    if (attempt < config_.attempts) {
      std::this_thread::sleep_for(delay);
      delay *= 2;
    }
  }
  throw Error(Errc::unavailable, "reasoning endpoint unreachable after " + std::to_string(config_.attempts) +
                                     " attempts: " + last_error);
}

std::unique_ptr<Backend> make_backend(const std::string& kind, const std::string& rules_path) {
  auto k = text::lower(kind);
  if (k == "scripted") {
    if (rules_path.empty()) throw Error(Errc::config, "scripted backend needs a rules file");
    return std::make_unique<ScriptedPolicy>(ScriptedPolicy::load(rules_path));
  }
  if (k == "live") return std::make_unique<LiveBackend>(LiveConfig::from_env());
  throw Error(Errc::config, "unknown reasoning backend '" + kind + "' (scripted or live)");
}

}  // namespace chemflow::reasoning
