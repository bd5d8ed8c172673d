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

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace chemflow {

using Vec3 = std::array<double, 3>;

struct Atom {
  std::string element;
  Vec3 pos{};
};

struct Molecule {
  std::vector<Atom> atoms;
  int charge = 0;
  int multiplicity = 1;
};

// Frequency is in cm^-1; a negative value encodes an imaginary mode.
struct NormalMode {
  int index = 0;
  double frequency = 0.0;
  std::vector<Vec3> displacement;
};

// Returns the canonical symbol ("CE" -> "Ce") or an empty string when unknown.
std::string canonical_element(std::string_view symbol);

// Reads standard XYZ text. Charge and multiplicity stay at their defaults.
Molecule parse_xyz(std::string_view text);

std::string write_xyz(const Molecule& mol, std::string_view comment = {});

// Shifts every atom by amplitude * d_i / max_j |d_j|, so the largest shift equals amplitude.
Molecule displace_along_mode(const Molecule& mol, const NormalMode& mode, double amplitude);

Vec3 centroid(const Molecule& mol);

}  // namespace chemflow
