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

#include "chemflow/memory.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "chemflow/error.hpp"
#include "chemflow/text.hpp"

namespace fs = std::filesystem;

namespace chemflow::memory {

GlobalMemory::GlobalMemory(std::string session_id, std::string path)
    : session_id_(std::move(session_id)), path_(std::move(path)) {
  if (!fs::exists(path_)) return;
  int lineno = 0;
  for (const auto& line : text::lines(text::read_file(path_))) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      GlobalMemoryEntry e;
      e.seq = j.at("seq").get<std::uint64_t>();
      e.session_id = session_id_;
      e.author = j.at("author").get<std::string>();
      e.ts = j.value("ts", "");
      e.text = j.at("text").get<std::string>();
      if (!entries_.empty() && e.seq <= entries_.back().seq) {
        throw Error(Errc::parse, "non-increasing seq");
      }
      entries_.push_back(std::move(e));
    } catch (const std::exception& ex) {
      throw Error(Errc::parse, path_ + ":" + std::to_string(lineno) + ": bad global memory record: " + ex.what());
    }
  }
}

GlobalMemoryEntry GlobalMemory::append(const std::string& author, const std::string& text_) {
  std::lock_guard lock(mu_);
  GlobalMemoryEntry e{entries_.empty() ? 1 : entries_.back().seq + 1, session_id_, author, text::now_iso8601(), text_};
  nlohmann::json j = {{"seq", e.seq}, {"author", e.author}, {"ts", e.ts}, {"text", e.text}};
  try {
    text::append_durable(path_, j.dump() + "\n");
  } catch (const Error&) {
    degraded_ = true;
    throw;
  }
  entries_.push_back(e);
  return e;
}

std::vector<GlobalMemoryEntry> GlobalMemory::read() const {
  std::lock_guard lock(mu_);
  return entries_;
}

std::vector<GlobalMemoryEntry> GlobalMemory::last(std::size_t k) const {
  std::lock_guard lock(mu_);
  auto from = entries_.size() > k ? entries_.end() - static_cast<std::ptrdiff_t>(k) : entries_.begin();
  return {from, entries_.end()};
}

std::size_t GlobalMemory::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

bool GlobalMemory::degraded() const {
  std::lock_guard lock(mu_);
  return degraded_;
}

void SemanticMemory::add(SemanticEntry entry) {
  if (entry.owner.empty()) entry.owner = "shared";
  entries_.push_back(std::move(entry));
}

std::vector<SemanticEntry> SemanticMemory::retrieve(const std::string& agent, const std::set<std::string>& tags) const {
  std::vector<SemanticEntry> out;
  if (tags.empty()) return out;
  for (const auto& e : entries_) {
    if (e.owner != agent && e.owner != "shared") continue;
    bool hit = std::any_of(e.tags.begin(), e.tags.end(), [&](const std::string& t) { return tags.count(t) > 0; });
    if (hit) out.push_back(e);
  }
  return out;
}

SemanticMemory SemanticMemory::from_json(const nlohmann::json& j) {
  SemanticMemory m;
  if (j.is_null()) return m;
  if (!j.is_array()) throw Error(Errc::config, "semantic memory must be an array");
  for (const auto& item : j) {
    SemanticEntry e;
    for (const auto& t : item.at("tags")) e.tags.insert(t.get<std::string>());
    e.owner = item.value("owner", "shared");
    e.text = item.at("text").get<std::string>();
    m.add(std::move(e));
  }
  return m;
}

bool EpisodicStore::write(EpisodicRecord record) {
  if (!enabled_) return true;
  std::lock_guard lock(mu_);
  records_.push_back(std::move(record));
  return true;
}

std::size_t EpisodicStore::size() const {
  std::lock_guard lock(mu_);
  return records_.size();
}

const char* to_string(GroundingEntry::Kind k) noexcept {
  switch (k) {
    case GroundingEntry::Kind::file: return "file";
    case GroundingEntry::Kind::dir: return "dir";
    case GroundingEntry::Kind::unreadable: return "unreadable";
  }
  return "?";
}

namespace {

void walk(const fs::path& dir, const std::string& prefix, int depth, int limit, std::vector<GroundingEntry>& out) {
  std::error_code ec;
  fs::directory_iterator it(dir, ec);
  if (ec) {
    out.push_back({prefix, GroundingEntry::Kind::unreadable, 0});
    return;
  }
  std::vector<fs::directory_entry> children;
  for (; it != fs::directory_iterator(); it.increment(ec)) {
    if (ec) break;
    children.push_back(*it);
  }
  if (children.empty()) {
    if (!prefix.empty()) out.push_back({prefix, GroundingEntry::Kind::dir, 0});
    return;
  }
  if (depth >= limit) {
    out.push_back({prefix, GroundingEntry::Kind::dir, 0});
    return;
  }
  for (const auto& c : children) {
    auto rel = prefix.empty() ? c.path().filename().string() : prefix + "/" + c.path().filename().string();
    std::error_code sec;
    if (c.is_directory(sec) && !c.is_symlink(sec)) {
      walk(c.path(), rel, depth + 1, limit, out);
    } else {
      auto size = c.is_regular_file(sec) ? c.file_size(sec) : 0;
      out.push_back({rel, sec ? GroundingEntry::Kind::unreadable : GroundingEntry::Kind::file, sec ? 0 : size});
    }
  }
}

}  // namespace

GroundingSnapshot snapshot_grounding(const std::string& root, int depth_limit, std::size_t max_entries) {
  if (depth_limit < 1) throw Error(Errc::invalid_argument, "depth_limit must be >= 1");
  GroundingSnapshot snap;
  snap.root = root;
  snap.depth_limit = depth_limit;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    snap.available = false;
    return snap;
  }
  fs::directory_iterator probe(root, ec);
  if (ec) {
    snap.available = false;
    return snap;
  }
  walk(root, "", 0, depth_limit, snap.entries);
  std::sort(snap.entries.begin(), snap.entries.end(),
            [](const GroundingEntry& a, const GroundingEntry& b) { return a.path < b.path; });
  if (snap.entries.size() > max_entries) {
    snap.entries.resize(max_entries);
    snap.truncated = true;
  }
  return snap;
}

std::string GroundingSnapshot::render() const {
  if (!available) return "(grounding unavailable)\n";
  std::ostringstream os;
  for (const auto& e : entries) {
    os << e.path;
    if (e.kind == GroundingEntry::Kind::dir) os << "/";
    else if (e.kind == GroundingEntry::Kind::unreadable) os << " (unreadable)";
    else os << " (" << e.size << " bytes)";
    os << "\n";
  }
  if (truncated) os << "... (listing truncated)\n";
  return os.str();
}

nlohmann::json GroundingSnapshot::to_json() const {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& e : entries) arr.push_back({{"path", e.path}, {"kind", to_string(e.kind)}, {"size", e.size}});
  return {{"root", root}, {"depth_limit", depth_limit}, {"available", available}, {"truncated", truncated},
          {"entries", arr}};
}

}  // namespace chemflow::memory
