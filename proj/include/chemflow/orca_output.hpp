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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "chemflow/geometry.hpp"
#include "chemflow/thermo.hpp"

namespace chemflow::orca {

struct ErrorDiagnosis {
  enum class Location { keyword_line, block, unknown };

  Location location = Location::unknown;
  std::string block;           // lower case, set when location == block
  std::string offending_token; // upper case as reported by the solver
  std::string raw_message;

  // "keyword_line", "block(scf)" or "unknown"
  std::string location_str() const;
};

struct AtomicCharges {
  std::optional<std::vector<double>> mulliken;
  std::optional<std::vector<double>> loewdin;
  std::optional<std::vector<double>> hirshfeld;

  bool empty() const { return !mulliken && !loewdin && !hirshfeld; }
};

struct Convergence {
  std::optional<int> scf_cycles;
  bool geometry_converged = false;
};

struct ParsedOutput {
  bool terminated_normally = false;
  std::optional<thermo::Energy> scf_energy;
  std::optional<thermo::Energy> enthalpy;
  std::optional<thermo::Energy> gibbs;
  std::optional<double> dipole_debye;
  std::optional<double> homo_lumo_gap_ev;
  AtomicCharges charges;
  std::optional<std::vector<double>> frequencies;
  std::vector<NormalMode> modes;
  Convergence convergence;
  std::optional<Molecule> final_geometry;
  std::optional<ErrorDiagnosis> error;
};

ParsedOutput parse_output(std::string_view text);

const std::vector<std::string>& property_keys();

// Returns the value for a documented key, or nullopt when the section was absent.
std::optional<nlohmann::json> extract_property(const ParsedOutput& out, std::string_view key);

}  // namespace chemflow::orca
