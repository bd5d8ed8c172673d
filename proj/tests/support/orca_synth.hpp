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

#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "chemflow/geometry.hpp"

namespace chemflow::testutil {

// Minimal solver output: final coordinates, frequencies with a single non-zero
// displacement column per listed mode, and a normal termination banner.
inline std::string synth_freq_output(const Molecule& mol, const std::vector<double>& freqs,
                                     const std::vector<std::vector<Vec3>>& modes) {
  std::ostringstream os;
  os << std::fixed;
  os << "CARTESIAN COORDINATES (ANGSTROEM)\n---------------------------------\n";
  for (const auto& a : mol.atoms) {
    os << "  " << a.element << std::setprecision(6);
    for (double x : a.pos) os << "  " << std::setw(12) << x;
    os << "\n";
  }
  os << "\n-----------------------\nVIBRATIONAL FREQUENCIES\n-----------------------\n\n";
  for (std::size_t i = 0; i < freqs.size(); ++i) {
    os << std::setw(6) << i << ":  " << std::setprecision(2) << std::setw(10) << freqs[i] << " cm**-1\n";
  }
  os << "\n------------\nNORMAL MODES\n------------\n\n";
  std::size_t rows = mol.atoms.size() * 3;
  for (std::size_t start = 0; start < freqs.size(); start += 6) {
    std::size_t end = std::min(freqs.size(), start + 6);
    os << "        ";
    for (std::size_t c = start; c < end; ++c) os << std::setw(11) << c;
    os << "\n";
    for (std::size_t r = 0; r < rows; ++r) {
      os << std::setw(6) << r << "  ";
      for (std::size_t c = start; c < end; ++c) {
        double v = c < modes.size() && !modes[c].empty() ? modes[c][r / 3][r % 3] : 0.0;
        os << std::setprecision(6) << std::setw(11) << v;
      }
      os << "\n";
    }
  }
  os << "\n                             ****ORCA TERMINATED NORMALLY****\n";
  return os.str();
}

inline std::string synth_error_output(const std::string& body) {
  return "                         ****END OF INPUT****\n\n" + body + "\n\nORCA finished by error termination in ORCA_main\n";
}

}  // namespace chemflow::testutil
