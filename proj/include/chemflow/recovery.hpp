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

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "chemflow/error.hpp"
#include "chemflow/exec.hpp"
#include "chemflow/orca_input.hpp"
#include "chemflow/orca_output.hpp"

namespace chemflow::recovery {

// location string ("keyword_line", "block(scf)") -> upper-case token -> replacement text.
// Block replacements are "Key Value" lines, keyword-line replacements a single token.
using ReplacementTable = std::map<std::string, std::map<std::string, std::string>>;

ReplacementTable replacements_from_json(const nlohmann::json& j);

enum class RepairAction { removed, replaced, noop };

const char* to_string(RepairAction a) noexcept;

struct Repair {
  orca::CalcSpec spec;
  RepairAction action = RepairAction::noop;
  std::string token;     // upper case
  std::string location;  // diagnosis location string
  std::string note;
};

// Removes (or replaces, when the table says so and the token was never removed before) the
// diagnosed token. A token that is not in the spec yields a flagged no-op.
Repair debug_input(const orca::CalcSpec& spec, const orca::ErrorDiagnosis& diag,
                   const orca::KeywordCatalog& catalog, const ReplacementTable& replacements = {},
                   const std::set<std::string>& previously_removed = {});

// Indices of modes with frequency < 0 and magnitude above the threshold.
std::vector<int> check_imaginary(const orca::ParsedOutput& output, double threshold = 15.0);

enum class Status { recovered, accepted_as_is, exhausted };

const char* to_string(Status s) noexcept;

struct LogEntry {
  int round = 0;
  std::string job;
  std::string detail;

  bool operator==(const LogEntry&) const = default;
};

struct RecoveryOutcome {
  Status status = Status::exhausted;
  int attempts = 0;
  std::vector<LogEntry> log;
  orca::CalcSpec final_spec;
  std::string final_job;
  std::string final_output_text;
  std::string raw_message;  // last undiagnosable or unrepairable solver message
  std::vector<double> imaginary_history;  // lowest non-zero frequency of each checked output

  nlohmann::json to_json() const;
};

struct RecoveryJob {
  std::string name;
  std::string workdir;
  orca::CalcSpec spec;
  int cores = 1;
};

struct Options {
  int max_retries = 3;
  double threshold = 15.0;
  double amplitude = 0.3;
  orca::KeywordCatalog catalog = orca::KeywordCatalog::defaults();
  ReplacementTable replacements;
  int max_polls = 1000;
  int poll_sleep_ms = 0;
};

// Thrown when the backend itself fails a job; carries the log so far.
class ExecFailure : public Error {
 public:
  ExecFailure(const std::string& what, RecoveryOutcome partial)
      : Error(Errc::unavailable, what), partial_(std::move(partial)) {}
  const RecoveryOutcome& partial() const noexcept { return partial_; }

 private:
  RecoveryOutcome partial_;
};

// Runs one job to completion on the backend and returns the output text.
std::string run_job(exec::Backend& backend, const RecoveryJob& job, const Options& opts);

// When initial_output is non-empty it stands in for the first submission.
RecoveryOutcome input_debug_loop(exec::Backend& backend, const RecoveryJob& job, const Options& opts = {},
                                 const std::string& initial_output = {});

// Name of the n-th resubmission: base_removed, base_removed2, ...
std::string removed_name(const std::string& base, int round);

// When initial_output is empty the job is submitted first.
RecoveryOutcome imaginary_frequency_loop(exec::Backend& backend, const RecoveryJob& job, const Options& opts = {},
                                         const std::string& initial_output = {});

}  // namespace chemflow::recovery
