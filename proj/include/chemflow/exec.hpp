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

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chemflow/error.hpp"

namespace chemflow::exec {

enum class Solvation { gas, implicit, explicit_cluster };

Solvation parse_solvation(std::string_view s);

// Tier by solvation (8, 16, 24), one tier up above 60 atoms, clamped to [1, min(24, node_cores)].
int allocate_cores(int atom_count, Solvation solvation, int node_cores);

struct JobRequest {
  std::string name;
  std::string workdir;
  std::string input;
  int cores = 1;
  std::vector<std::string> expected_outputs;
};

enum class JobState { queued, running, done, failed };

const char* to_string(JobState s) noexcept;

struct JobHandle {
  std::string backend;
  std::string id;
  std::string name;
  std::string workdir;
  std::string submit_error;  // non-empty when the submission itself was rejected

  bool operator==(const JobHandle&) const = default;
};

struct JobStatus {
  JobState state = JobState::queued;
  std::string diagnostic;
};

// Thrown by submit_batch when the batch as a whole breaks; carries what was accepted first.
class BatchSubmissionError : public Error {
 public:
  BatchSubmissionError(const std::string& what, std::vector<JobHandle> accepted)
      : Error(Errc::unavailable, what), accepted_(std::move(accepted)) {}

  const std::vector<JobHandle>& accepted() const noexcept { return accepted_; }

 private:
  std::vector<JobHandle> accepted_;
};

class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string name() const = 0;
  virtual JobHandle submit(const JobRequest& job) = 0;
  virtual std::vector<JobHandle> submit_batch(const std::vector<JobRequest>& jobs) = 0;
  virtual JobStatus poll(const JobHandle& handle) = 0;
  virtual std::string collect(const JobHandle& handle) = 0;
};

// Strips '#' comments and trailing whitespace, drops trailing blank lines.
std::string normalize_input(std::string_view text);

// Hex SHA-256 of the normalized input.
std::string input_hash(std::string_view text);

std::string sha256_hex(std::string_view bytes);

struct SubmissionReport {
  std::vector<JobHandle> handles;  // same order as the requests
  bool fallback = false;
  std::string fallback_reason;
  std::size_t serial_submissions = 0;
};

// Submits all jobs as one batch; on a batch failure the remaining jobs go one at a time.
SubmissionReport submit_with_fallback(Backend& backend, const std::vector<JobRequest>& jobs);

// Polls until done or failed, or until max_polls is reached (then reports failed).
JobStatus wait_for(Backend& backend, const JobHandle& handle, int max_polls = 1000, int sleep_ms = 0);

// Serializes submissions that target the same working directory.
std::mutex& workdir_mutex(const std::string& workdir);

struct FixtureKey {
  std::string hash;
  int round = 0;  // 0 matches any submission count

  auto operator<=>(const FixtureKey&) const = default;
};

class MockEngine final : public Backend {
 public:
  MockEngine() = default;

  // Map lines: "<hash>[@round] <path>", paths relative to the map file.
  void load_fixture_map(const std::string& map_path);
  void add_fixture(const std::string& hash, std::string output_text, int round = 0);
  void add_fixture_file(const std::string& hash, const std::string& path, int round = 0);

  // The next batch of more than n jobs accepts n and then fails.
  void fail_batch_after(std::size_t n);
  // Submissions of this job name are rejected outright.
  void reject_job(const std::string& name);

  std::size_t fixture_count() const;
  std::size_t submissions() const;

  std::string name() const override { return "mock"; }
  JobHandle submit(const JobRequest& job) override;
  std::vector<JobHandle> submit_batch(const std::vector<JobRequest>& jobs) override;
  JobStatus poll(const JobHandle& handle) override;
  std::string collect(const JobHandle& handle) override;

 private:
  struct Fixture {
    std::optional<std::string> text;
    std::string path;
  };
  struct Job {
    JobRequest request;
    std::string hash;
    int round = 0;
    const Fixture* fixture = nullptr;
    JobState state = JobState::queued;
    std::string diagnostic;
  };

  JobHandle submit_locked(const JobRequest& job);
  std::string fixture_text(const Fixture& f) const;
  void finish(Job& job);

  mutable std::mutex mu_;
  std::map<FixtureKey, Fixture> fixtures_;
  std::map<std::string, int> rounds_;
  std::map<std::string, Job> jobs_;
  std::vector<std::string> rejected_;
  std::optional<std::size_t> fail_batch_after_;
  std::size_t next_id_ = 1;
};

struct ShellTemplates {
  // Placeholders: {name} {workdir} {cores} {input} {output} {id}
  std::string submit = "sbatch --parsable -J {name} -c {cores} -D {workdir} --wrap \"orca {input} > {output}\"";
  std::string poll = "squeue -h -j {id} -o %T";
  std::string script_template;  // optional batch script written as <workdir>/<name>.sh before submit
};

class ShellBackend final : public Backend {
 public:
  explicit ShellBackend(ShellTemplates templates) : templates_(std::move(templates)) {}

  std::string name() const override { return "shell"; }
  JobHandle submit(const JobRequest& job) override;
  std::vector<JobHandle> submit_batch(const std::vector<JobRequest>& jobs) override;
  JobStatus poll(const JobHandle& handle) override;
  std::string collect(const JobHandle& handle) override;

  static std::string expand(const std::string& tmpl, const std::map<std::string, std::string>& vars);

 private:
  ShellTemplates templates_;
};

// Runs a shell command and returns its stdout; throws on a non-zero exit status.
std::string run_command(const std::string& command);

// Builds the backend named by CHEMFLOW_EXEC_BACKEND, or by config["backend"] (default "mock").
std::unique_ptr<Backend> make_backend(const nlohmann::json& config, const std::string& base_dir);

}  // namespace chemflow::exec
