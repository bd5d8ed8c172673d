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

#include "chemflow/exec.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <sstream>
#include <thread>

#include "chemflow/geometry.hpp"
#include "chemflow/orca_output.hpp"
#include "chemflow/text.hpp"

namespace fs = std::filesystem;

namespace chemflow::exec {

Solvation parse_solvation(std::string_view s) {
  auto l = text::lower(s);
  if (l == "gas" || l == "gas_phase" || l == "vacuum") return Solvation::gas;
  if (l == "implicit" || l == "cpcm" || l == "smd") return Solvation::implicit;
  if (l == "explicit" || l == "explicit_cluster" || l == "cluster") return Solvation::explicit_cluster;
  throw Error(Errc::invalid_argument, "unknown solvation '" + std::string(s) + "' (gas, implicit, explicit_cluster)");
}

int allocate_cores(int atom_count, Solvation solvation, int node_cores) {
  if (node_cores < 1) throw Error(Errc::invalid_argument, "node_cores must be >= 1");
  int tier = solvation == Solvation::gas ? 0 : solvation == Solvation::implicit ? 1 : 2;
  if (atom_count > 60) tier = std::min(tier + 1, 2);
  constexpr std::array<int, 3> kTiers = {8, 16, 24};
  return std::clamp(kTiers[tier], 1, std::min(24, node_cores));
}

const char* to_string(JobState s) noexcept {
  switch (s) {
    case JobState::queued: return "queued";
    case JobState::running: return "running";
    case JobState::done: return "done";
    case JobState::failed: return "failed";
  }
  return "?";
}

std::string normalize_input(std::string_view input) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= input.size()) {
    auto pos = input.find('\n', start);
    if (pos == std::string_view::npos) pos = input.size();
    std::string_view line = input.substr(start, pos - start);
    auto hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    out.push_back(text::trim_right(line));
    start = pos + 1;
  }
  while (!out.empty() && out.back().empty()) out.pop_back();
  if (out.empty()) return {};
  return text::join(out, "\n") + "\n";
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(Errc::unavailable, "sha256 digest failed");
  }
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

std::string input_hash(std::string_view input) { return sha256_hex(normalize_input(input)); }

SubmissionReport submit_with_fallback(Backend& backend, const std::vector<JobRequest>& jobs) {
  SubmissionReport report;
  if (jobs.empty()) return report;
  try {
    report.handles = backend.submit_batch(jobs);
    return report;
  } catch (const BatchSubmissionError& e) {
    report.fallback = true;
    report.fallback_reason = e.what();
    report.handles = e.accepted();
  }
  for (std::size_t i = report.handles.size(); i < jobs.size(); ++i) {
    ++report.serial_submissions;
    try {
      report.handles.push_back(backend.submit(jobs[i]));
    } catch (const Error& e) {
      JobHandle h;
      h.backend = backend.name();
      h.name = jobs[i].name;
      h.workdir = jobs[i].workdir;
      h.submit_error = e.what();
      report.handles.push_back(h);
    }
  }
  return report;
}

JobStatus wait_for(Backend& backend, const JobHandle& handle, int max_polls, int sleep_ms) {
  for (int i = 0; i < max_polls; ++i) {
    auto st = backend.poll(handle);
    if (st.state == JobState::done || st.state == JobState::failed) return st;
    if (sleep_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(sleep_ms));
  }
  return {JobState::failed, "job did not finish within " + std::to_string(max_polls) + " polls"};
}

std::mutex& workdir_mutex(const std::string& workdir) {
  static std::mutex registry_mu;
  static std::map<std::string, std::unique_ptr<std::mutex>> registry;
  std::lock_guard lock(registry_mu);
  auto key = fs::weakly_canonical(fs::path(workdir)).string();
  auto& slot = registry[key];
  if (!slot) slot = std::make_unique<std::mutex>();
  return *slot;
}

void MockEngine::load_fixture_map(const std::string& map_path) {
  auto base = fs::path(map_path).parent_path();
  auto content = text::read_file(map_path);
  int lineno = 0;
  for (const auto& raw : text::lines(content)) {
    ++lineno;
    auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    auto f = text::split_ws(line);
    if (f.size() != 2) throw Error(Errc::parse, map_path + ":" + std::to_string(lineno) + ": expected '<hash> <path>'");
    std::string hash = f[0];
    int round = 0;
    if (auto at = hash.find('@'); at != std::string::npos) {
      auto r = text::parse_int(hash.substr(at + 1));
      if (!r || *r < 1) throw Error(Errc::parse, map_path + ":" + std::to_string(lineno) + ": bad round");
      round = static_cast<int>(*r);
      hash = hash.substr(0, at);
    }
    if (hash.size() != 64) throw Error(Errc::parse, map_path + ":" + std::to_string(lineno) + ": bad hash");
    add_fixture_file(hash, (base / f[1]).string(), round);
  }
}

void MockEngine::add_fixture(const std::string& hash, std::string output_text, int round) {
  std::lock_guard lock(mu_);
  fixtures_[{hash, round}] = Fixture{std::move(output_text), {}};
}

void MockEngine::add_fixture_file(const std::string& hash, const std::string& path, int round) {
  std::lock_guard lock(mu_);
  fixtures_[{hash, round}] = Fixture{std::nullopt, path};
}

void MockEngine::fail_batch_after(std::size_t n) {
  std::lock_guard lock(mu_);
  fail_batch_after_ = n;
}

void MockEngine::reject_job(const std::string& name) {
  std::lock_guard lock(mu_);
  rejected_.push_back(name);
}

std::size_t MockEngine::fixture_count() const {
  std::lock_guard lock(mu_);
  return fixtures_.size();
}

std::size_t MockEngine::submissions() const {
  std::lock_guard lock(mu_);
  return jobs_.size();
}

JobHandle MockEngine::submit_locked(const JobRequest& job) {
  if (job.name.empty()) throw Error(Errc::invalid_argument, "job name is empty");
  if (job.cores < 1) throw Error(Errc::invalid_argument, "job " + job.name + ": cores must be >= 1");
  if (!fs::is_directory(job.workdir)) throw Error(Errc::not_found, "job " + job.name + ": workdir does not exist");
  if (std::find(rejected_.begin(), rejected_.end(), job.name) != rejected_.end()) {
    throw Error(Errc::unavailable, "submission of " + job.name + " rejected");
  }
  Job j;
  j.request = job;
  j.hash = input_hash(job.input);
  j.round = ++rounds_[j.hash];
  if (auto it = fixtures_.find({j.hash, j.round}); it != fixtures_.end()) j.fixture = &it->second;
  else if (auto any = fixtures_.find({j.hash, 0}); any != fixtures_.end()) j.fixture = &any->second;

  {
    std::lock_guard wd(workdir_mutex(job.workdir));
    text::write_file((fs::path(job.workdir) / (job.name + ".inp")).string(), job.input);
  }

  JobHandle h;
  h.backend = name();
  h.id = "mock-" + std::to_string(next_id_++);
  h.name = job.name;
  h.workdir = job.workdir;
  jobs_.emplace(h.id, std::move(j));
  return h;
}

JobHandle MockEngine::submit(const JobRequest& job) {
  std::lock_guard lock(mu_);
  return submit_locked(job);
}

std::vector<JobHandle> MockEngine::submit_batch(const std::vector<JobRequest>& jobs) {
  std::lock_guard lock(mu_);
  std::vector<JobHandle> handles;
  std::optional<std::size_t> limit;
  if (fail_batch_after_ && jobs.size() > *fail_batch_after_) {
    limit = fail_batch_after_;
    fail_batch_after_.reset();
  }
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    if (limit && i == *limit) {
      throw BatchSubmissionError("scheduler rejected job " + std::to_string(i + 1) + " (" + jobs[i].name + ")", handles);
    }
    try {
      handles.push_back(submit_locked(jobs[i]));
    } catch (const Error& e) {
      JobHandle h;
      h.backend = name();
      h.name = jobs[i].name;
      h.workdir = jobs[i].workdir;
      h.submit_error = e.what();
      handles.push_back(h);
    }
  }
  return handles;
}

std::string MockEngine::fixture_text(const Fixture& f) const {
  if (f.text) return *f.text;
  return text::read_file(f.path);
}

void MockEngine::finish(Job& job) {
  std::string output;
  try {
    output = fixture_text(*job.fixture);
  } catch (const Error& e) {
    job.state = JobState::failed;
    job.diagnostic = e.what();
    return;
  }
  std::lock_guard wd(workdir_mutex(job.request.workdir));
  auto dir = fs::path(job.request.workdir);
  text::write_file((dir / (job.request.name + ".out")).string(), output);
  auto parsed = orca::parse_output(output);
  if (parsed.terminated_normally && parsed.final_geometry) {
    text::write_file((dir / (job.request.name + ".xyz")).string(),
                     write_xyz(*parsed.final_geometry, job.request.name + " final geometry"));
  }
  job.state = JobState::done;
}

JobStatus MockEngine::poll(const JobHandle& handle) {
  if (!handle.submit_error.empty()) return {JobState::failed, handle.submit_error};
  std::lock_guard lock(mu_);
  auto it = jobs_.find(handle.id);
  if (it == jobs_.end()) throw Error(Errc::not_found, "unknown job handle '" + handle.id + "'");
  auto& job = it->second;
  switch (job.state) {
    case JobState::queued:
      if (!job.fixture) {
        job.state = JobState::failed;
        job.diagnostic = "no fixture for input hash " + job.hash + " (round " + std::to_string(job.round) + ")";
      } else {
        job.state = JobState::running;
      }
      break;
    case JobState::running:
      finish(job);
      break;
    case JobState::done:
    case JobState::failed:
      break;
  }
  return {job.state, job.diagnostic};
}

std::string MockEngine::collect(const JobHandle& handle) {
  std::lock_guard lock(mu_);
  auto it = jobs_.find(handle.id);
  if (it == jobs_.end()) throw Error(Errc::not_found, "unknown job handle '" + handle.id + "'");
  if (it->second.state != JobState::done) {
    throw Error(Errc::unavailable, "job " + handle.name + " is " + to_string(it->second.state) +
                                       (it->second.diagnostic.empty() ? "" : ": " + it->second.diagnostic));
  }
  return fixture_text(*it->second.fixture);
}

std::string ShellBackend::expand(const std::string& tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] == '{') {
      auto close = tmpl.find('}', i);
      if (close != std::string::npos) {
        auto key = tmpl.substr(i + 1, close - i - 1);
        if (auto it = vars.find(key); it != vars.end()) {
          out += it->second;
          i = close;
          continue;
        }
      }
    }
    out += tmpl[i];
  }
  return out;
}

std::string run_command(const std::string& command) {
  std::FILE* pipe = ::popen(command.c_str(), "r");
  if (!pipe) throw Error(Errc::unavailable, "cannot run: " + command);
  std::string out;
  std::array<char, 4096> buf{};
  std::size_t n = 0;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
  int status = ::pclose(pipe);
  if (status != 0) throw Error(Errc::unavailable, "command failed (status " + std::to_string(status) + "): " + command);
  return out;
}

namespace {

std::map<std::string, std::string> job_vars(const std::string& name, const std::string& workdir, int cores,
                                            const std::string& id) {
  return {{"name", name},
          {"workdir", workdir},
          {"cores", std::to_string(cores)},
          {"input", name + ".inp"},
          {"output", name + ".out"},
          {"id", id}};
}

}  // namespace

JobHandle ShellBackend::submit(const JobRequest& job) {
  if (job.cores < 1) throw Error(Errc::invalid_argument, "job " + job.name + ": cores must be >= 1");
  std::lock_guard wd(workdir_mutex(job.workdir));
  auto dir = fs::path(job.workdir);
  text::write_file((dir / (job.name + ".inp")).string(), job.input);
  auto vars = job_vars(job.name, job.workdir, job.cores, "");
  if (!templates_.script_template.empty()) {
    text::write_file((dir / (job.name + ".sh")).string(), expand(templates_.script_template, vars));
  }
  auto out = text::trim(run_command(expand(templates_.submit, vars)));
  if (out.empty()) throw Error(Errc::unavailable, "submit command returned no job id for " + job.name);
  auto id = text::split_ws(out).back();
  if (auto semi = id.find(';'); semi != std::string::npos) id = id.substr(0, semi);
  return JobHandle{name(), id, job.name, job.workdir, {}};
}

std::vector<JobHandle> ShellBackend::submit_batch(const std::vector<JobRequest>& jobs) {
  std::vector<JobHandle> handles;
  for (const auto& job : jobs) {
    try {
      handles.push_back(submit(job));
    } catch (const Error& e) {
      throw BatchSubmissionError(e.what(), handles);
    }
  }
  return handles;
}

JobStatus ShellBackend::poll(const JobHandle& handle) {
  if (!handle.submit_error.empty()) return {JobState::failed, handle.submit_error};
  auto out = text::upper(text::trim(run_command(expand(templates_.poll, job_vars(handle.name, handle.workdir, 1, handle.id)))));
  if (out.empty() || out == "COMPLETED") {
    if (fs::exists(fs::path(handle.workdir) / (handle.name + ".out"))) return {JobState::done, {}};
    return {JobState::failed, "job left the queue without writing " + handle.name + ".out"};
  }
  if (out == "PENDING" || out == "CONFIGURING") return {JobState::queued, {}};
  if (out == "RUNNING" || out == "COMPLETING") return {JobState::running, {}};
  return {JobState::failed, "scheduler state " + out};
}

std::string ShellBackend::collect(const JobHandle& handle) {
  return text::read_file((fs::path(handle.workdir) / (handle.name + ".out")).string());
}

std::unique_ptr<Backend> make_backend(const nlohmann::json& config, const std::string& base_dir) {
  std::string kind = config.value("backend", std::string("mock"));
  if (const char* env = std::getenv("CHEMFLOW_EXEC_BACKEND"); env && *env) kind = env;
  kind = text::lower(kind);
  if (kind == "mock") {
    auto engine = std::make_unique<MockEngine>();
    if (config.contains("fixture_map")) {
      auto path = fs::path(config["fixture_map"].get<std::string>());
      if (path.is_relative()) path = fs::path(base_dir) / path;
      engine->load_fixture_map(path.string());
    }
    return engine;
  }
  if (kind == "shell") {
    ShellTemplates t;
    if (config.contains("shell")) {
      const auto& s = config["shell"];
      t.submit = s.value("submit", t.submit);
      t.poll = s.value("poll", t.poll);
      t.script_template = s.value("script_template", t.script_template);
    }
    return std::make_unique<ShellBackend>(t);
  }
  throw Error(Errc::config, "unknown exec backend '" + kind + "' (mock or shell)");
}

}  // namespace chemflow::exec
