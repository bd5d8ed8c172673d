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
#include <string_view>
#include <vector>

#include <json.hpp>

namespace chemflow::orca {

enum class RunType { OPT, FREQ, SP, OPT_FREQ };

const char* to_string(RunType r) noexcept;
std::optional<RunType> parse_runtype(std::string_view s);

// One identifier line inside a % block. An empty value renders as a bare identifier.
struct BlockEntry {
  std::string key;
  std::string value;

  bool operator==(const BlockEntry&) const = default;
};

struct BasisBlock {
  std::string basis;
  std::string ecp;

  bool operator==(const BasisBlock&) const = default;
};

struct TddftBlock {
  int nroots = 5;
  bool triplets = false;

  bool operator==(const TddftBlock&) const = default;
};

struct GeometryRef {
  int charge = 0;
  int multiplicity = 1;
  std::string xyz_file;

  bool operator==(const GeometryRef&) const = default;
};

struct CalcSpec {
  std::vector<RunType> runtypes;
  std::string functional;
  std::string basis;
  std::optional<std::string> dispersion;
  std::vector<std::string> approximations;
  std::optional<std::string> grid;
  std::vector<std::string> extra_keywords;
  std::optional<std::string> scf_convergence;
  int maxcore = 4000;
  int nprocs = 1;
  std::optional<BasisBlock> basis_block;
  std::vector<BlockEntry> scf_block;
  std::optional<std::vector<BlockEntry>> geom_block;
  std::optional<std::string> cpcm_solvent;
  std::optional<TddftBlock> tddft;
  std::vector<std::string> output_prints;
  GeometryRef geometry;

  // OPT_FREQ and {OPT, FREQ} compare equal.
  std::set<RunType> canonical_runtypes() const;
  bool operator==(const CalcSpec& other) const;
};

// Structural problems that make a spec unrenderable; empty when fine.
std::vector<std::string> structural_errors(const CalcSpec& spec);

std::string render_input(const CalcSpec& spec);

// Reads text in the rendered layout back into a spec.
CalcSpec parse_input(std::string_view text);

struct KeywordCatalog {
  std::set<std::string> keyword_line;                  // upper case
  std::map<std::string, std::set<std::string>> blocks;  // lower-case block -> upper-case identifiers
  int nprocs_min = 4;
  int nprocs_max = 24;
  int maxcore_default = 4000;

  bool allows_keyword(std::string_view token) const;
  bool allows_block(std::string_view block, std::string_view identifier) const;

  static KeywordCatalog defaults();
  static KeywordCatalog parse(std::string_view text);
  std::string serialize() const;
};

struct Violation {
  std::string token;     // upper case
  std::string location;  // "keyword_line" or "block(<name>)"

  std::string str() const { return token + " @ " + location; }
  bool operator==(const Violation&) const = default;
};

std::vector<Violation> validate_spec(const CalcSpec& spec, const KeywordCatalog& catalog);

// Identifier token of an %output directive such as "Print[ P_MOs ] 1".
std::string directive_identifier(std::string_view line);

nlohmann::json to_json(const CalcSpec& spec);
CalcSpec spec_from_json(const nlohmann::json& j);

}  // namespace chemflow::orca
