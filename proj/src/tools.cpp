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

#include "chemflow/tools.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

#include "chemflow/error.hpp"
#include "chemflow/text.hpp"
#include "chemflow/trace.hpp"

namespace fs = std::filesystem;

namespace chemflow::tools {

const char* to_string(ParamType t) noexcept {
  switch (t) {
    case ParamType::string: return "string";
    case ParamType::integer: return "integer";
    case ParamType::number: return "number";
    case ParamType::boolean: return "boolean";
    case ParamType::array: return "array";
    case ParamType::object: return "object";
  }
  return "?";
}

nlohmann::json ToolResult::to_json() const {
  nlohmann::json j = {{"ok", ok}, {"summary", summary}, {"artifacts", artifacts}, {"payload", payload}};
  if (!error.empty()) j["error"] = error;
  return j;
}

namespace {

bool type_ok(const nlohmann::json& v, ParamType t) {
  switch (t) {
    case ParamType::string: return v.is_string();
    case ParamType::integer: return v.is_number_integer();
    case ParamType::number: return v.is_number();
    case ParamType::boolean: return v.is_boolean();
    case ParamType::array: return v.is_array();
    case ParamType::object: return v.is_object();
  }
  return false;
}

}  // namespace

nlohmann::json validate_args(const ToolSpec& spec, const nlohmann::json& args) {
  if (!args.is_null() && !args.is_object()) {
    throw Error(Errc::invalid_argument, spec.name + ": arguments must be an object");
  }
  nlohmann::json out = nlohmann::json::object();
  std::set<std::string> known;
  for (const auto& p : spec.params) {
    known.insert(p.name);
    if (args.is_object() && args.contains(p.name) && !args[p.name].is_null()) {
      const auto& v = args[p.name];
      if (!type_ok(v, p.type)) {
        throw Error(Errc::invalid_argument,
                    spec.name + ": parameter '" + p.name + "' must be " + to_string(p.type) + ", got " + v.dump());
      }
      out[p.name] = v;
    } else if (p.required) {
      throw Error(Errc::invalid_argument, spec.name + ": missing required parameter '" + p.name + "'");
    } else if (!p.default_value.is_null()) {
      out[p.name] = p.default_value;
    }
  }
  if (args.is_object()) {
    for (const auto& [k, v] : args.items()) {
      if (!known.count(k)) throw Error(Errc::invalid_argument, spec.name + ": unknown parameter '" + k + "'");
    }
  }
  return out;
}

void Registry::register_tool(ToolSpec spec) {
  if (spec.name.empty()) throw Error(Errc::invalid_argument, "tool name is empty");
  if (!spec.handler) throw Error(Errc::invalid_argument, "tool " + spec.name + " has no handler");
  if (tools_.count(spec.name)) throw Error(Errc::conflict, "duplicate tool name '" + spec.name + "'");
  std::set<std::string> seen;
  for (const auto& p : spec.params) {
    if (!seen.insert(p.name).second) throw Error(Errc::invalid_argument, spec.name + ": duplicate parameter " + p.name);
  }
  locks_[spec.name] = std::make_unique<std::mutex>();
  auto name = spec.name;
  tools_.emplace(std::move(name), std::move(spec));
}

bool Registry::contains(const std::string& name) const { return tools_.count(name) > 0; }

const ToolSpec& Registry::get(const std::string& name) const {
  auto it = tools_.find(name);
  if (it == tools_.end()) throw Error(Errc::not_found, "unknown tool '" + name + "'");
  return it->second;
}

std::vector<std::string> Registry::names() const {
  std::vector<std::string> out;
  for (const auto& [n, s] : tools_) out.push_back(n);
  return out;
}

const ToolSpec& Registry::resolve(const std::vector<std::string>& action_space, const std::string& name) const {
  if (std::find(action_space.begin(), action_space.end(), name) == action_space.end()) {
    throw Error(Errc::action_space, "action-space violation: '" + name + "' is not callable here");
  }
  return get(name);
}

ToolResult Registry::invoke(const ToolContext& ctx, const std::string& name, const nlohmann::json& args) const {
  const auto& spec = get(name);
  {
    std::lock_guard lock(count_mu_);
    ++invocations_;
  }
  ToolResult result;
  nlohmann::json normalized;
  try {
    normalized = validate_args(spec, args);
  } catch (const Error& e) {
    result.error = "schema";
    result.summary = std::string("schema error: ") + e.what();
    result.payload = {{"error", e.what()}};
    normalized = args.is_object() ? args : nlohmann::json::object();
  }
  if (result.error.empty()) {
    try {
      std::unique_lock<std::mutex> guard;
      if (!spec.reentrant) guard = std::unique_lock(*locks_.at(name));
      result = spec.handler(ctx, normalized);
      result.error.clear();
      if (!result.ok) result.error = "handler";
    } catch (const std::exception& e) {
      result = ToolResult{};
      result.error = "handler";
      result.summary = name + " failed: " + e.what();
      result.payload = {{"error", e.what()}};
    }
  }
  if (result.ok) {
    for (const auto& a : result.artifacts) {
      auto p = fs::path(a).is_absolute() ? fs::path(a) : fs::path(ctx.workdir) / a;
      if (!fs::exists(p)) {
        result.ok = false;
        result.error = "artifact";
        result.summary = name + " listed a missing artifact: " + a;
        break;
      }
    }
  }
  if (result.summary.empty()) result.summary = result.ok ? name + " completed" : name + " failed";
  result.summary = text::cap(result.summary, kSummaryCap);

  if (ctx.trace) {
    trace::ActionEvent e;
    e.agent = ctx.agent;
    e.kind = trace::Kind::acting;
    e.title = name;
    e.target = name;
    e.args = normalized;
    e.summary = (result.ok ? "" : "[failed] ") + result.summary;
    ctx.trace->record(std::move(e), result.to_json().dump(2));
  }
  return result;
}

std::size_t Registry::invocations() const {
  std::lock_guard lock(count_mu_);
  return invocations_;
}

nlohmann::json Registry::catalog() const {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& [name, spec] : tools_) {
    nlohmann::json params = nlohmann::json::array();
    for (const auto& p : spec.params) {
      nlohmann::json pj = {{"name", p.name}, {"type", to_string(p.type)}, {"required", p.required},
                           {"description", p.description}};
      if (!p.default_value.is_null()) pj["default"] = p.default_value;
      params.push_back(pj);
    }
    out.push_back({{"name", name}, {"description", spec.description}, {"reentrant", spec.reentrant},
                   {"parameters", params}});
  }
  return out;
}

}  // namespace chemflow::tools
