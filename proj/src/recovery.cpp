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

#include "chemflow/recovery.hpp"

#include <algorithm>
#include <filesystem>

#include "chemflow/geometry.hpp"
#include "chemflow/text.hpp"

namespace fs = std::filesystem;

namespace chemflow::recovery {

using orca::BlockEntry;
using orca::CalcSpec;
using orca::ErrorDiagnosis;

ReplacementTable replacements_from_json(const nlohmann::json& j) {
  ReplacementTable table;
  if (j.is_null()) return table;
  if (!j.is_object()) throw Error(Errc::config, "replacements must be an object of location -> {token: replacement}");
  for (const auto& [loc, entries] : j.items()) {
    if (!entries.is_object()) throw Error(Errc::config, "replacements[" + loc + "] must be an object");
    for (const auto& [tok, repl] : entries.items()) {
      if (!repl.is_string()) throw Error(Errc::config, "replacement for " + tok + " must be a string");
      table[text::lower(loc)][text::upper(tok)] = repl.get<std::string>();
    }
  }
  return table;
}

const char* to_string(RepairAction a) noexcept {
  switch (a) {
    case RepairAction::removed: return "removed";
    case RepairAction::replaced: return "replaced";
    case RepairAction::noop: return "noop";
  }
  return "?";
}

const char* to_string(Status s) noexcept {
  switch (s) {
    case Status::recovered: return "recovered";
    case Status::accepted_as_is: return "accepted_as_is";
    case Status::exhausted: return "exhausted";
  }
  return "?";
}

namespace {

std::optional<std::string> lookup_replacement(const ReplacementTable& table, const std::string& location,
                                              const std::string& token, const std::set<std::string>& removed) {
  auto loc = table.find(location);
  if (loc == table.end()) return std::nullopt;
  auto it = loc->second.find(token);
  if (it == loc->second.end()) return std::nullopt;
  if (removed.count(token)) return std::nullopt;
  auto first = text::split_ws(it->second);
  if (first.empty() || removed.count(text::upper(first.front()))) return std::nullopt;
  return it->second;
}

// Returns true when at least one entry matched.
bool repair_entries(std::vector<BlockEntry>& entries, const std::string& token,
                    const std::optional<std::string>& replacement) {
  auto match = [&](const BlockEntry& e) { return text::iequals(e.key, token); };
  auto first = std::find_if(entries.begin(), entries.end(), match);
  if (first == entries.end()) return false;
  auto pos = first - entries.begin();
  entries.erase(std::remove_if(entries.begin(), entries.end(), match), entries.end());
  if (replacement) {
    auto t = std::string(text::trim(*replacement));
    auto sp = t.find_first_of(" \t");
    BlockEntry e{sp == std::string::npos ? t : t.substr(0, sp),
                 sp == std::string::npos ? std::string{} : std::string(text::trim(t.substr(sp)))};
    entries.insert(entries.begin() + pos, e);
  }
  return true;
}

bool repair_keyword_line(CalcSpec& s, const std::string& token, const std::optional<std::string>& replacement,
                         std::string& note) {
  auto is = [&](const std::string& v) { return text::iequals(v, token); };
  if (is(s.functional) || is(s.basis)) {
    note = "token " + token + " is the functional or basis and cannot be removed";
    return false;
  }
  for (auto r : s.runtypes) {
    auto name = std::string(orca::to_string(r));
    if (is(name) || (r == orca::RunType::OPT_FREQ && (is("OPT") || is("FREQ")))) {
      note = "token " + token + " is a run type and cannot be removed";
      return false;
    }
  }
  bool hit = false;
  auto fix_opt = [&](std::optional<std::string>& f) {
    if (f && is(*f)) {
      hit = true;
      if (replacement) f = *replacement;
      else f.reset();
    }
  };
  auto fix_vec = [&](std::vector<std::string>& v) {
    for (auto it = v.begin(); it != v.end();) {
      if (is(*it)) {
        hit = true;
        if (replacement) {
          *it = *replacement;
          ++it;
        } else {
          it = v.erase(it);
        }
      } else {
        ++it;
      }
    }
  };
  fix_opt(s.dispersion);
  fix_vec(s.approximations);
  fix_opt(s.grid);
  fix_vec(s.extra_keywords);
  fix_opt(s.scf_convergence);
  if (!hit) note = "token " + token + " not present on the keyword line";
  return hit;
}

bool repair_block(CalcSpec& s, const std::string& block, const std::string& token,
                  const std::optional<std::string>& replacement, std::string& note) {
  if (block == "scf") return repair_entries(s.scf_block, token, replacement);
  if (block == "geom") return s.geom_block && repair_entries(*s.geom_block, token, replacement);
  if (block == "output") {
    auto before = s.output_prints.size();
    std::erase_if(s.output_prints, [&](const std::string& line) {
      return text::iequals(orca::directive_identifier(line), token) || text::iequals(text::trim(line), token);
    });
    return s.output_prints.size() != before;
  }
  if (block == "basis" && s.basis_block) {
    if (token == "ECP" && !s.basis_block->ecp.empty()) {
      s.basis_block->ecp.clear();
      return true;
    }
    if (token == "BASIS") {
      s.basis_block.reset();
      return true;
    }
    return false;
  }
  if (block == "cpcm" && s.cpcm_solvent && (token == "SMD" || token == "SMDSOLVENT")) {
    s.cpcm_solvent.reset();
    return true;
  }
  if (block == "tddft" && s.tddft && (token == "NROOTS" || token == "TRIPLETS")) {
    s.tddft.reset();
    return true;
  }
  if (block == "pal" || block == "maxcore") note = "resource settings in %" + block + " are not removable";
  return false;
}

}  // namespace

Repair debug_input(const CalcSpec& spec, const ErrorDiagnosis& diag, const orca::KeywordCatalog& catalog,
                   const ReplacementTable& replacements, const std::set<std::string>& previously_removed) {
  Repair r;
  r.spec = spec;
  r.token = text::upper(diag.offending_token);
  r.location = diag.location_str();
  if (diag.location == ErrorDiagnosis::Location::unknown || r.token.empty()) {
    r.note = "diagnosis has no known location";
    return r;
  }
  auto replacement = lookup_replacement(replacements, r.location, r.token, previously_removed);
  bool hit = false;
  if (diag.location == ErrorDiagnosis::Location::keyword_line) {
    hit = repair_keyword_line(r.spec, r.token, replacement, r.note);
  } else {
    auto block = text::lower(diag.block);
    bool table_block = block == "scf" || block == "geom";
    if (!table_block) replacement.reset();
    hit = repair_block(r.spec, block, r.token, replacement, r.note);
    if (!hit && r.note.empty()) r.note = "token " + r.token + " not present in %" + block;
  }
  if (!hit) {
    r.spec = spec;
    r.action = RepairAction::noop;
    return r;
  }
  r.action = replacement ? RepairAction::replaced : RepairAction::removed;
  r.note = replacement ? r.token + " replaced by '" + *replacement + "' @ " + r.location
                       : r.token + " removed @ " + r.location;
  for (const auto& v : orca::validate_spec(r.spec, catalog)) {
    if (replacement && v.location == r.location && !text::iequals(v.token, r.token)) {
      r.note += " (replacement " + v.token + " is not in the catalog)";
    }
  }
  return r;
}

std::vector<int> check_imaginary(const orca::ParsedOutput& output, double threshold) {
  std::vector<int> out;
  if (!output.frequencies) return out;
  const auto& f = *output.frequencies;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] < 0 && -f[i] > threshold) out.push_back(static_cast<int>(i));
  }
  return out;
}

nlohmann::json RecoveryOutcome::to_json() const {
  nlohmann::json log_json = nlohmann::json::array();
  for (const auto& e : log) log_json.push_back({{"round", e.round}, {"job", e.job}, {"detail", e.detail}});
  nlohmann::json j = {{"status", to_string(status)},
                      {"attempts", attempts},
                      {"final_job", final_job},
                      {"final_xyz", final_spec.geometry.xyz_file},
                      {"log", log_json}};
  if (!raw_message.empty()) j["raw_message"] = raw_message;
  if (!imaginary_history.empty()) j["lowest_frequencies"] = imaginary_history;
  return j;
}

std::string run_job(exec::Backend& backend, const RecoveryJob& job, const Options& opts) {
  auto problems = orca::structural_errors(job.spec);
  if (!problems.empty()) throw Error(Errc::invalid_argument, "job " + job.name + ": " + text::join(problems, "; "));
  exec::JobRequest req{job.name, job.workdir, orca::render_input(job.spec), job.cores, {job.name + ".out"}};
  auto handle = backend.submit(req);
  auto st = exec::wait_for(backend, handle, opts.max_polls, opts.poll_sleep_ms);
  if (st.state != exec::JobState::done) {
    throw Error(Errc::unavailable, "job " + job.name + " " + exec::to_string(st.state) +
                                       (st.diagnostic.empty() ? "" : ": " + st.diagnostic));
  }
  return backend.collect(handle);
}

namespace {

std::string run_or_throw(exec::Backend& backend, const RecoveryJob& job, const Options& opts,
                         RecoveryOutcome& out) {
  try {
    return run_job(backend, job, opts);
  } catch (const ExecFailure&) {
    throw;
  } catch (const Error& e) {
    out.log.push_back({out.attempts, job.name, std::string("exec failure: ") + e.what()});
    out.final_job = job.name;
    out.final_spec = job.spec;
    throw ExecFailure(e.what(), out);
  }
}

void settle(RecoveryOutcome& out, const RecoveryJob& job, const std::string& text) {
  out.final_job = job.name;
  out.final_spec = job.spec;
  out.final_output_text = text;
}

}  // namespace

RecoveryOutcome input_debug_loop(exec::Backend& backend, const RecoveryJob& job, const Options& opts,
                                 const std::string& initial_output) {
  RecoveryOutcome out;
  RecoveryJob current = job;
  std::set<std::string> removed;
  bool first = true;
  for (;;) {
    auto text = first && !initial_output.empty() ? initial_output : run_or_throw(backend, current, opts, out);
    first = false;
    settle(out, current, text);
    auto parsed = orca::parse_output(text);
    if (parsed.terminated_normally) {
      out.status = out.attempts == 0 ? Status::accepted_as_is : Status::recovered;
      out.log.push_back({out.attempts, current.name, "terminated normally"});
      return out;
    }
    auto diag = parsed.error.value_or(ErrorDiagnosis{});
    if (diag.raw_message.empty()) diag.raw_message = "run did not terminate normally and reported no error";
    out.raw_message = diag.raw_message;
    if (diag.location == ErrorDiagnosis::Location::unknown) {
      out.status = Status::exhausted;
      out.log.push_back({out.attempts, current.name, "undiagnosable error: " + diag.raw_message});
      return out;
    }
    if (out.attempts >= opts.max_retries) {
      out.status = Status::exhausted;
      out.log.push_back({out.attempts, current.name, "retry limit reached at " + text::upper(diag.offending_token) +
                                                          " @ " + diag.location_str()});
      return out;
    }
    auto repair = debug_input(current.spec, diag, opts.catalog, opts.replacements, removed);
    if (repair.action == RepairAction::noop) {
      out.status = Status::exhausted;
      out.log.push_back({out.attempts, current.name, "no-op repair: " + repair.note});
      return out;
    }
    if (repair.action == RepairAction::removed) removed.insert(repair.token);
    ++out.attempts;
    out.log.push_back({out.attempts, current.name, repair.note});
    current.spec = repair.spec;
  }
}

std::string removed_name(const std::string& base, int round) {
  if (round < 1) throw Error(Errc::invalid_argument, "round must be >= 1");
  return base + "_removed" + (round == 1 ? std::string{} : std::to_string(round));
}

RecoveryOutcome imaginary_frequency_loop(exec::Backend& backend, const RecoveryJob& job, const Options& opts,
                                         const std::string& initial_output) {
  RecoveryOutcome out;
  RecoveryJob current = job;
  auto text = initial_output.empty() ? run_or_throw(backend, current, opts, out) : initial_output;
  for (;;) {
    settle(out, current, text);
    auto parsed = orca::parse_output(text);
    if (!parsed.terminated_normally) {
      out.status = Status::exhausted;
      out.raw_message = parsed.error ? parsed.error->raw_message : "run did not terminate normally";
      out.log.push_back({out.attempts, current.name, "job failed: " + out.raw_message});
      return out;
    }
    if (!parsed.frequencies || parsed.frequencies->empty()) {
      throw Error(Errc::invalid_argument, "output of " + current.name + " has no frequencies");
    }
    std::optional<double> lowest;
    for (double f : *parsed.frequencies) {
      if (f != 0.0 && (!lowest || f < *lowest)) lowest = f;
    }
    if (lowest) out.imaginary_history.push_back(*lowest);
    auto offending = check_imaginary(parsed, opts.threshold);
    if (offending.empty()) {
      out.status = out.attempts == 0 ? Status::accepted_as_is : Status::recovered;
      out.log.push_back({out.attempts, current.name,
                         "no imaginary frequency above " + text::fixed(opts.threshold, 2) + " cm-1"});
      return out;
    }
    const auto& freqs = *parsed.frequencies;
    int worst = *std::min_element(offending.begin(), offending.end(),
                                  [&](int a, int b) { return freqs[a] < freqs[b]; });
    if (out.attempts >= opts.max_retries) {
      out.status = Status::exhausted;
      out.log.push_back({out.attempts, current.name,
                         "retry limit reached with imaginary mode " + std::to_string(worst) + " at " +
                             text::fixed(freqs[worst], 2) + " cm-1"});
      return out;
    }
    auto mode = std::find_if(parsed.modes.begin(), parsed.modes.end(),
                             [&](const NormalMode& m) { return m.index == worst; });
    if (mode == parsed.modes.end()) {
      out.status = Status::exhausted;
      out.raw_message = "no displacement vectors for mode " + std::to_string(worst);
      out.log.push_back({out.attempts, current.name, out.raw_message});
      return out;
    }
    Molecule mol = parsed.final_geometry
                       ? *parsed.final_geometry
                       : parse_xyz(text::read_file((fs::path(current.workdir) / current.spec.geometry.xyz_file).string()));
    mol.charge = current.spec.geometry.charge;
    mol.multiplicity = current.spec.geometry.multiplicity;
    auto displaced = displace_along_mode(mol, *mode, opts.amplitude);
    auto xyz_name = current.name + "_distorted.xyz";
    {
      std::lock_guard lock(exec::workdir_mutex(current.workdir));
      text::write_file((fs::path(current.workdir) / xyz_name).string(),
                       write_xyz(displaced, current.name + " displaced along mode " + std::to_string(worst)));
    }
    ++out.attempts;
    out.log.push_back({out.attempts, current.name,
                       "mode " + std::to_string(worst) + " at " + text::fixed(freqs[worst], 2) + " cm-1 displaced by " +
                           text::fixed(opts.amplitude, 2) + " A into " + xyz_name});
    RecoveryJob next = current;
    next.name = removed_name(job.name, out.attempts);
    next.spec.geometry.xyz_file = xyz_name;
    current = next;
    text = run_or_throw(backend, current, opts, out);
  }
}

}  // namespace chemflow::recovery
