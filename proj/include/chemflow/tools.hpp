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

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace chemflow {
namespace exec {
class Backend;
}
namespace memory {
class GlobalMemory;
}
namespace trace {
class Trace;
}
namespace orca {
struct KeywordCatalog;
}
namespace recovery {
struct Options;
}
}  // namespace chemflow

namespace chemflow::tools {

inline constexpr std::size_t kSummaryCap = 2000;

enum class ParamType { string, integer, number, boolean, array, object };

const char* to_string(ParamType t) noexcept;

struct Param {
  std::string name;
  ParamType type = ParamType::string;
  bool required = true;
  std::string description;
  nlohmann::json default_value;  // used when optional and absent; null means omitted
};

struct ToolResult {
  bool ok = false;
  nlohmann::json payload;
  std::string summary;
  std::vector<std::string> artifacts;  // paths relative to the workdir
  std::string error;                   // "schema", "handler" or "artifact" when !ok

  nlohmann::json to_json() const;
};

// Services a handler may use. Pointers may be null when a session does not provide them.
struct ToolContext {
  std::string workdir;
  std::string agent;
  std::string session_id;
  exec::Backend* backend = nullptr;
  memory::GlobalMemory* global_memory = nullptr;
  trace::Trace* trace = nullptr;
  const orca::KeywordCatalog* catalog = nullptr;
  const recovery::Options* recovery = nullptr;
  nlohmann::json settings = nlohmann::json::object();
};

using Handler = std::function<ToolResult(const ToolContext&, const nlohmann::json& args)>;

struct ToolSpec {
  std::string name;
  std::string description;
  std::vector<Param> params;
  bool reentrant = true;
  Handler handler;
};

// Checks types and required names, rejects unknown names and fills defaults. Throws Error(invalid_argument).
nlohmann::json validate_args(const ToolSpec& spec, const nlohmann::json& args);

class Registry {
 public:
  void register_tool(ToolSpec spec);
  bool contains(const std::string& name) const;
  const ToolSpec& get(const std::string& name) const;
  std::vector<std::string> names() const;

  // Returns the spec when `name` is in the action space and registered.
  const ToolSpec& resolve(const std::vector<std::string>& action_space, const std::string& name) const;

  // Runs the handler and records one acting event in ctx.trace (when set). Schema, handler and
  // artifact failures come back as ok=false; only an unregistered name throws.
  ToolResult invoke(const ToolContext& ctx, const std::string& name, const nlohmann::json& args) const;

  std::size_t invocations() const;

  // [{name, description, reentrant, parameters: [{name, type, required, description}]}]
  nlohmann::json catalog() const;

 private:
  std::map<std::string, ToolSpec> tools_;
  std::map<std::string, std::unique_ptr<std::mutex>> locks_;
  mutable std::mutex count_mu_;
  mutable std::size_t invocations_ = 0;
};

}  // namespace chemflow::tools
