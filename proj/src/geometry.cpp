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

#include "chemflow/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chemflow/error.hpp"
#include "chemflow/text.hpp"

namespace chemflow {

namespace {

constexpr std::array<std::string_view, 118> kElements = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg", "Al", "Si", "P",
    "S",  "Cl", "Ar", "K",  "Ca", "Sc", "Ti", "V",  "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
    "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y",  "Zr", "Nb", "Mo", "Tc", "Ru", "Rh",
    "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W",  "Re",
    "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U",  "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db",
    "Sg", "Bh", "Hs", "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og"};

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

}  // namespace

std::string canonical_element(std::string_view symbol) {
  for (auto el : kElements) {
    if (text::iequals(el, symbol)) return std::string(el);
  }
  return {};
}

Molecule parse_xyz(std::string_view input) {
  auto rows = text::lines(input);
  if (rows.empty()) throw Error(Errc::parse, "xyz: empty input");
  auto count = text::parse_int(rows[0]);
  if (!count || *count < 0) throw Error(Errc::parse, "xyz: bad atom count line '" + rows[0] + "'");
  std::size_t n = static_cast<std::size_t>(*count);

  std::vector<std::string> atom_rows;
  for (std::size_t i = 2; i < rows.size(); ++i) {
    if (!text::trim(rows[i]).empty()) atom_rows.push_back(rows[i]);
  }
  if (atom_rows.size() != n) {
    throw Error(Errc::parse, "xyz: count line says " + std::to_string(n) + " atoms, found " +
                                 std::to_string(atom_rows.size()));
  }

  Molecule mol;
  mol.atoms.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto fields = text::split_ws(atom_rows[i]);
    if (fields.size() < 4) throw Error(Errc::parse, "xyz: atom line " + std::to_string(i + 1) + " is short");
    Atom atom;
    atom.element = canonical_element(fields[0]);
    if (atom.element.empty()) throw Error(Errc::parse, "xyz: unknown element '" + fields[0] + "'");
    for (int k = 0; k < 3; ++k) {
      auto v = text::parse_double(fields[k + 1]);
      if (!v) throw Error(Errc::parse, "xyz: non-numeric coordinate '" + fields[k + 1] + "'");
      atom.pos[k] = *v;
    }
    mol.atoms.push_back(std::move(atom));
  }
  return mol;
}

std::string write_xyz(const Molecule& mol, std::string_view comment) {
  std::ostringstream os;
  os << mol.atoms.size() << '\n';
  std::string c(comment);
  std::replace(c.begin(), c.end(), '\n', ' ');
  os << c << '\n';
  for (const auto& a : mol.atoms) {
    os << a.element;
    for (double v : a.pos) os << ' ' << text::fixed(v, 8);
    os << '\n';
  }
  return os.str();
}

Molecule displace_along_mode(const Molecule& mol, const NormalMode& mode, double amplitude) {
  if (mode.displacement.size() != mol.atoms.size()) {
    throw Error(Errc::invalid_argument, "mode has " + std::to_string(mode.displacement.size()) +
                                            " vectors for " + std::to_string(mol.atoms.size()) + " atoms");
  }
  if (!(amplitude > 0.0) || !std::isfinite(amplitude)) {
    throw Error(Errc::invalid_argument, "displacement amplitude must be positive");
  }
  double largest = 0.0;
  for (const auto& d : mode.displacement) largest = std::max(largest, norm(d));
  if (!(largest > 0.0)) throw Error(Errc::invalid_argument, "zero displacement vector");

  Molecule out = mol;
  double scale = amplitude / largest;
  for (std::size_t i = 0; i < out.atoms.size(); ++i) {
    for (int k = 0; k < 3; ++k) out.atoms[i].pos[k] += scale * mode.displacement[i][k];
  }
  return out;
}

Vec3 centroid(const Molecule& mol) {
  Vec3 c{};
  if (mol.atoms.empty()) return c;
  for (const auto& a : mol.atoms) {
    for (int k = 0; k < 3; ++k) c[k] += a.pos[k];
  }
  for (auto& v : c) v /= static_cast<double>(mol.atoms.size());
  return c;
}

}  // namespace chemflow
