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

#include <cstdint>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

namespace chemflow::memory {

struct GlobalMemoryEntry {
  std::uint64_t seq = 0;
  std::string session_id;
  std::string author;
  std::string ts;
  std::string text;
};

// Session-wide append-only log, one JSON record per line: {seq, author, ts, text}.
class GlobalMemory {
 public:
  // Loads existing records from `path` when the file exists.
  GlobalMemory(std::string session_id, std::string path);

  GlobalMemoryEntry append(const std::string& author, const std::string& text);
  std::vector<GlobalMemoryEntry> read() const;
  std::vector<GlobalMemoryEntry> last(std::size_t k) const;
  std::size_t size() const;

  // Set after a failed append; the failed entry is not kept in memory either.
  bool degraded() const;
  const std::string& path() const { return path_; }

 private:
  std::string session_id_;
  std::string path_;
  mutable std::mutex mu_;
  std::vector<GlobalMemoryEntry> entries_;
  bool degraded_ = false;
};

inline constexpr std::size_t kDefaultGlobalExcerpt = 50;

struct SemanticEntry {
  std::set<std::string> tags;
  std::string owner = "shared";
  std::string text;

  bool operator==(const SemanticEntry&) const = default;
};

class SemanticMemory {
 public:
  void add(SemanticEntry entry);
  // Entries whose tags intersect `tags` and whose owner is the agent or "shared", in insertion order.
  std::vector<SemanticEntry> retrieve(const std::string& agent, const std::set<std::string>& tags) const;
  std::size_t size() const { return entries_.size(); }

  // [{"tags": [...], "owner": "...", "text": "..."}]
  static SemanticMemory from_json(const nlohmann::json& j);

 private:
  std::vector<SemanticEntry> entries_;
};

struct EpisodicRecord {
  std::string agent;
  std::string session;
  nlohmann::json decision;
  std::string outcome;
};

// Present but disabled by default; writes while disabled succeed and store nothing.
class EpisodicStore {
 public:
  explicit EpisodicStore(bool enabled = false) : enabled_(enabled) {}

  bool write(EpisodicRecord record);
  bool enabled() const { return enabled_; }
  std::size_t size() const;

 private:
  bool enabled_;
  mutable std::mutex mu_;
  std::vector<EpisodicRecord> records_;
};

struct GroundingEntry {
  enum class Kind { file, dir, unreadable };
  std::string path;  // relative, '/' separated
  Kind kind = Kind::file;
  std::uintmax_t size = 0;

  bool operator==(const GroundingEntry&) const = default;
};

const char* to_string(GroundingEntry::Kind k) noexcept;

struct GroundingSnapshot {
  std::string root;
  int depth_limit = 4;
  bool available = true;
  bool truncated = false;
  std::vector<GroundingEntry> entries;

  // One line per entry; "(grounding unavailable)" when the root could not be read.
  std::string render() const;
  nlohmann::json to_json() const;
};

// Files and empty directories up to depth_limit path components, sorted by path. Directories at
// the depth limit that still have content are listed as kind dir.
GroundingSnapshot snapshot_grounding(const std::string& root, int depth_limit = 4, std::size_t max_entries = 500);

}  // namespace chemflow::memory
