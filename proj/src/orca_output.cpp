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

#include "chemflow/orca_output.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "chemflow/error.hpp"
#include "chemflow/text.hpp"

namespace chemflow::orca {

namespace {

using Lines = std::vector<std::string>;

bool is_rule(std::string_view line) {
  auto t = text::trim(line);
  return !t.empty() && std::all_of(t.begin(), t.end(), [](char c) { return c == '-' || c == '='; });
}

// Index of the first data line after a header line and its dashed underline.
std::size_t body_start(const Lines& lines, std::size_t header) {
  std::size_t i = header + 1;
  if (i < lines.size() && is_rule(lines[i])) ++i;
  return i;
}

std::optional<thermo::Energy> energy_after(std::string_view line, std::string_view marker) {
  auto pos = line.find(marker);
  if (pos == std::string_view::npos) return std::nullopt;
  for (const auto& tok : text::split_ws(line.substr(pos + marker.size()))) {
    if (text::parse_double(tok)) return thermo::Energy::parse(tok);
  }
  return std::nullopt;
}

std::optional<std::vector<double>> charge_table(const Lines& lines, std::size_t header) {
  std::vector<double> out;
  for (std::size_t i = body_start(lines, header); i < lines.size(); ++i) {
    auto t = text::trim(lines[i]);
    if (t.empty() || text::starts_with(t, "Sum of atomic charges")) break;
    auto colon = t.find(':');
    if (colon == std::string_view::npos) break;
    auto v = text::parse_double(t.substr(colon + 1));
    if (!v) break;
    out.push_back(*v);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

std::optional<std::vector<double>> hirshfeld_table(const Lines& lines, std::size_t header) {
  std::size_t i = body_start(lines, header);
  for (; i < lines.size(); ++i) {
    auto f = text::split_ws(lines[i]);
    if (f.size() >= 2 && f[0] == "ATOM" && f[1] == "CHARGE") break;
  }
  std::vector<double> out;
  for (++i; i < lines.size(); ++i) {
    auto f = text::split_ws(lines[i]);
    if (f.size() < 3 || f[0] == "TOTAL") break;
    auto v = text::parse_double(f[2]);
    if (!text::parse_int(f[0]) || !v) break;
    out.push_back(*v);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

std::optional<double> orbital_gap(const Lines& lines, std::size_t header) {
  std::optional<double> homo, lumo;
  std::size_t i = body_start(lines, header);
  for (; i < lines.size(); ++i) {
    auto f = text::split_ws(lines[i]);
    if (f.size() >= 4 && f[0] == "NO" && f[1] == "OCC") break;
  }
  for (++i; i < lines.size(); ++i) {
    auto f = text::split_ws(lines[i]);
    if (f.size() < 4) {
      if (text::trim(lines[i]).empty()) continue;
      break;
    }
    if (f[0] == "NO" && f[1] == "OCC") continue;
    auto occ = text::parse_double(f[1]);
    auto ev = text::parse_double(f[3]);
    if (!text::parse_int(f[0]) || !occ || !ev) break;
    if (*occ > 0.0) homo = homo ? std::max(*homo, *ev) : *ev;
    else lumo = lumo ? std::min(*lumo, *ev) : *ev;
  }
  if (!homo || !lumo) return std::nullopt;
  return *lumo - *homo;
}

std::optional<std::vector<double>> frequency_list(const Lines& lines, std::size_t header) {
  std::vector<double> out;
  for (std::size_t i = body_start(lines, header); i < lines.size(); ++i) {
    auto t = text::trim(lines[i]);
    if (t.empty() || text::starts_with(t, "Scaling factor")) continue;
    auto f = text::split_ws(t);
    if (f.size() < 3 || f[0].back() != ':' || !text::starts_with(f[2], "cm")) {
      if (!out.empty()) break;
      continue;
    }
    auto v = text::parse_double(f[1]);
    if (!v) break;
    out.push_back(*v);
  }
  if (out.empty()) return std::nullopt;
  return out;
}

// Column blocks: a header row of mode indices, then one row per Cartesian coordinate.
std::map<int, std::vector<double>> normal_mode_columns(const Lines& lines, std::size_t header) {
  std::map<int, std::vector<double>> cols;
  std::vector<int> current;
  for (std::size_t i = body_start(lines, header); i < lines.size(); ++i) {
    auto t = text::trim(lines[i]);
    if (t.empty()) {
      if (!cols.empty() && current.empty()) break;
      continue;
    }
    if (is_rule(t) || (!cols.empty() && std::isalpha(static_cast<unsigned char>(t.front())))) break;
    auto f = text::split_ws(t);
    bool all_int = std::all_of(f.begin(), f.end(), [](const std::string& s) { return text::parse_int(s).has_value(); });
    if (all_int) {
      current.clear();
      for (const auto& s : f) current.push_back(static_cast<int>(*text::parse_int(s)));
      continue;
    }
    if (current.empty() || f.size() != current.size() + 1 || !text::parse_int(f[0])) continue;
    for (std::size_t k = 0; k < current.size(); ++k) {
      auto v = text::parse_double(f[k + 1]);
      if (!v) return {};
      cols[current[k]].push_back(*v);
    }
  }
  return cols;
}

std::optional<Molecule> coordinate_block(const Lines& lines, std::size_t header) {
  Molecule mol;
  for (std::size_t i = body_start(lines, header); i < lines.size(); ++i) {
    auto f = text::split_ws(lines[i]);
    if (f.size() != 4) break;
    Atom a;
    a.element = canonical_element(f[0]);
    if (a.element.empty()) break;
    bool ok = true;
    for (int k = 0; k < 3; ++k) {
      auto v = text::parse_double(f[k + 1]);
      if (!v) ok = false;
      else a.pos[k] = *v;
    }
    if (!ok) break;
    mol.atoms.push_back(a);
  }
  if (mol.atoms.empty()) return std::nullopt;
  return mol;
}

std::string strip_token(std::string_view t) {
  auto s = std::string(text::trim(t));
  while (!s.empty() && (s.back() == '.' || s.back() == ',' || s.back() == ':')) s.pop_back();
  return text::upper(s);
}

std::string join_lines(const Lines& lines, std::size_t from, std::size_t count) {
  std::vector<std::string> parts;
  for (std::size_t i = from; i < lines.size() && parts.size() < count; ++i) {
    auto t = text::trim(lines[i]);
    if (!t.empty()) parts.emplace_back(t);
  }
  return text::join(parts, "\n");
}

std::optional<ErrorDiagnosis> diagnose(const Lines& lines) {
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    auto pos = line.find("Unknown identifier in ");
    if (pos != std::string::npos) {
      ErrorDiagnosis d;
      d.raw_message = join_lines(lines, i, 2);
      auto rest = text::split_ws(line.substr(pos + 22));
      if (rest.size() >= 2 && rest[1] == "block") {
        d.location = ErrorDiagnosis::Location::block;
        d.block = text::lower(rest[0]);
      }
      for (std::size_t j = i + 1; j < lines.size() && j <= i + 4; ++j) {
        auto lt = lines[j].find("Last token:");
        if (lt != std::string::npos) {
          d.offending_token = strip_token(lines[j].substr(lt + 11));
          break;
        }
      }
      if (d.offending_token.empty()) d.location = ErrorDiagnosis::Location::unknown;
      return d;
    }
    if (text::contains(line, "UNRECOGNIZED OR DUPLICATED KEYWORD(S) IN SIMPLE INPUT LINE")) {
      ErrorDiagnosis d;
      d.location = ErrorDiagnosis::Location::keyword_line;
      auto tail = text::split_ws(line.substr(line.find("INPUT LINE") + 10));
      if (!tail.empty()) {
        d.offending_token = strip_token(tail[0]);
      } else {
        for (std::size_t j = i + 1; j < lines.size(); ++j) {
          auto f = text::split_ws(lines[j]);
          if (!f.empty()) {
            d.offending_token = strip_token(f[0]);
            break;
          }
        }
      }
      d.raw_message = join_lines(lines, i > 0 && text::contains(lines[i - 1], "INPUT ERROR") ? i - 1 : i, 3);
      if (d.offending_token.empty()) d.location = ErrorDiagnosis::Location::unknown;
      return d;
    }
  }
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (text::contains(lines[i], "ERROR") || text::contains(lines[i], "error termination") ||
        text::contains(lines[i], "aborting the run")) {
      ErrorDiagnosis d;
      d.raw_message = join_lines(lines, i, 4);
      return d;
    }
  }
  return std::nullopt;
}

nlohmann::json energy_json(const thermo::Energy& e) { return {{"value", e.value}, {"text", e.text}, {"unit", "Eh"}}; }

}  // namespace

std::string ErrorDiagnosis::location_str() const {
  switch (location) {
    case Location::keyword_line: return "keyword_line";
    case Location::block: return "block(" + block + ")";
    case Location::unknown: return "unknown";
  }
  return "unknown";
}

ParsedOutput parse_output(std::string_view input) {
  ParsedOutput out;
  auto lines = text::lines(input);
  std::map<int, std::vector<double>> mode_cols;

  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    auto t = text::trim(line);
    if (text::contains(line, "ORCA TERMINATED NORMALLY")) {
      out.terminated_normally = true;
    } else if (text::starts_with(t, "FINAL SINGLE POINT ENERGY")) {
      if (auto e = energy_after(line, "FINAL SINGLE POINT ENERGY")) out.scf_energy = e;
    } else if (t == "TOTAL SCF ENERGY") {
      for (std::size_t j = body_start(lines, i); j < lines.size() && j < i + 8; ++j) {
        if (text::starts_with(text::trim(lines[j]), "Total Energy")) {
          if (auto e = energy_after(lines[j], ":")) {
            if (!out.scf_energy) out.scf_energy = e;
          }
          break;
        }
      }
    } else if (text::starts_with(t, "Total Enthalpy")) {
      if (auto e = energy_after(line, "...")) out.enthalpy = e;
    } else if (text::starts_with(t, "Final Gibbs free energy")) {
      if (auto e = energy_after(line, "...")) out.gibbs = e;
    } else if (text::starts_with(t, "Magnitude (Debye)")) {
      auto f = text::split_ws(t.substr(t.find(':') + 1));
      if (!f.empty()) out.dipole_debye = text::parse_double(f[0]);
    } else if (t == "ORBITAL ENERGIES") {
      if (auto g = orbital_gap(lines, i)) out.homo_lumo_gap_ev = g;
    } else if (t == "MULLIKEN ATOMIC CHARGES") {
      if (auto c = charge_table(lines, i)) out.charges.mulliken = c;
    } else if (t == "LOEWDIN ATOMIC CHARGES") {
      if (auto c = charge_table(lines, i)) out.charges.loewdin = c;
    } else if (t == "HIRSHFELD ANALYSIS") {
      if (auto c = hirshfeld_table(lines, i)) out.charges.hirshfeld = c;
    } else if (t == "VIBRATIONAL FREQUENCIES") {
      if (auto f = frequency_list(lines, i)) out.frequencies = f;
    } else if (t == "NORMAL MODES") {
      mode_cols = normal_mode_columns(lines, i);
    } else if (text::contains(line, "SCF CONVERGED AFTER")) {
      auto f = text::split_ws(line.substr(line.find("AFTER") + 5));
      if (!f.empty()) {
        if (auto n = text::parse_int(f[0])) out.convergence.scf_cycles = static_cast<int>(*n);
      }
    } else if (text::contains(line, "THE OPTIMIZATION HAS CONVERGED")) {
      out.convergence.geometry_converged = true;
    } else if (t == "CARTESIAN COORDINATES (ANGSTROEM)") {
      if (auto m = coordinate_block(lines, i)) out.final_geometry = m;
    }
  }

  if (out.frequencies) {
    for (const auto& [idx, col] : mode_cols) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= out.frequencies->size() || col.size() % 3 != 0) continue;
      NormalMode mode;
      mode.index = idx;
      mode.frequency = (*out.frequencies)[idx];
      for (std::size_t a = 0; a + 2 < col.size(); a += 3) mode.displacement.push_back({col[a], col[a + 1], col[a + 2]});
      out.modes.push_back(std::move(mode));
    }
  }

  if (!out.terminated_normally) out.error = diagnose(lines);
  return out;
}

const std::vector<std::string>& property_keys() {
  static const std::vector<std::string> keys = {"convergence_information", "TOTAL SCF ENERGY", "gibbs", "enthalpy",
                                                "frequencies", "charges", "dipole", "homo_lumo_gap"};
  return keys;
}

std::optional<nlohmann::json> extract_property(const ParsedOutput& out, std::string_view key) {
  auto k = text::lower(text::trim(key));
  if (k == "convergence_information") {
    nlohmann::json j;
    j["terminated_normally"] = out.terminated_normally;
    j["scf_cycles"] = out.convergence.scf_cycles ? nlohmann::json(*out.convergence.scf_cycles) : nlohmann::json();
    j["geometry_converged"] = out.convergence.geometry_converged;
    if (out.error) {
      j["error"] = {{"location", out.error->location_str()},
                    {"token", out.error->offending_token},
                    {"message", out.error->raw_message}};
    }
    return j;
  }
  if (k == "total scf energy") return out.scf_energy ? std::optional(energy_json(*out.scf_energy)) : std::nullopt;
  if (k == "gibbs") return out.gibbs ? std::optional(energy_json(*out.gibbs)) : std::nullopt;
  if (k == "enthalpy") return out.enthalpy ? std::optional(energy_json(*out.enthalpy)) : std::nullopt;
  if (k == "frequencies") {
    if (!out.frequencies) return std::nullopt;
    return nlohmann::json{{"values", *out.frequencies}, {"unit", "cm-1"}};
  }
  if (k == "charges") {
    if (out.charges.empty()) return std::nullopt;
    nlohmann::json j = nlohmann::json::object();
    if (out.charges.mulliken) j["mulliken"] = *out.charges.mulliken;
    if (out.charges.loewdin) j["loewdin"] = *out.charges.loewdin;
    if (out.charges.hirshfeld) j["hirshfeld"] = *out.charges.hirshfeld;
    return j;
  }
  if (k == "dipole") {
    if (!out.dipole_debye) return std::nullopt;
    return nlohmann::json{{"value", *out.dipole_debye}, {"unit", "Debye"}};
  }
  if (k == "homo_lumo_gap") {
    if (!out.homo_lumo_gap_ev) return std::nullopt;
    return nlohmann::json{{"value", *out.homo_lumo_gap_ev}, {"unit", "eV"}};
  }
  throw Error(Errc::invalid_argument, "unknown property key '" + std::string(key) + "'; expected one of: " +
                                          text::join(property_keys(), ", "));
}

}  // namespace chemflow::orca
