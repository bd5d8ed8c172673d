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

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "chemflow/error.hpp"
#include "chemflow/geometry.hpp"
#include "support/test_util.hpp"

using namespace chemflow;

namespace {

Molecule random_molecule(std::mt19937& gen, int n) {
  static const char* kSymbols[] = {"H", "C", "N", "O", "Ce", "Cl", "F", "S"};
  std::uniform_int_distribution<int> pick(0, 7);
  std::uniform_real_distribution<double> coord(-25.0, 25.0);
  Molecule m;
  for (int i = 0; i < n; ++i) m.atoms.push_back({kSymbols[pick(gen)], {coord(gen), coord(gen), coord(gen)}});
  return m;
}

NormalMode random_mode(std::mt19937& gen, int n) {
  std::uniform_real_distribution<double> comp(-1.0, 1.0);
  NormalMode mode;
  mode.frequency = -100.0;
  for (int i = 0; i < n; ++i) mode.displacement.push_back({comp(gen), comp(gen), comp(gen)});
  return mode;
}

}  // namespace

TEST(Geometry, SingleHydrogenRoundTrips) {
  Molecule m;
  m.atoms.push_back({"H", {0, 0, 0}});
  auto back = parse_xyz(write_xyz(m, "h"));
  ASSERT_EQ(back.atoms.size(), 1u);
  EXPECT_EQ(back.atoms[0].element, "H");
  EXPECT_EQ(back.atoms[0].pos, (Vec3{0, 0, 0}));
}

TEST(Geometry, CountMismatchIsRejected) {
  EXPECT_THROW(parse_xyz("3\ncomment\nH 0 0 0\nH 0 0 0.74\n"), Error);
}

TEST(Geometry, BadElementAndCoordinateAreRejected) {
  EXPECT_THROW(parse_xyz("1\n\nXx 0 0 0\n"), Error);
  EXPECT_THROW(parse_xyz("1\n\nC 0 zero 0\n"), Error);
  EXPECT_THROW(parse_xyz("1\n\nC 0 0\n"), Error);
  EXPECT_THROW(parse_xyz("two\n\nC 0 0 0\n"), Error);
}

TEST(Geometry, ElementsAreCanonicalized) {
  auto m = parse_xyz("2\n\nCE 0 0 0\ncl 1 0 0\n");
  EXPECT_EQ(m.atoms[0].element, "Ce");
  EXPECT_EQ(m.atoms[1].element, "Cl");
}

TEST(Geometry, WriteUsesAtLeastSixDecimals) {
  Molecule m;
  m.atoms.push_back({"O", {1.5, -2.25, 0.125}});
  EXPECT_EQ(write_xyz(m, "water fragment"), "1\nwater fragment\nO 1.50000000 -2.25000000 0.12500000\n");
}

TEST(Geometry, TenAtomRoundTripWithinTolerance) {
  std::mt19937 gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = random_molecule(gen, 10);
    auto back = parse_xyz(write_xyz(m, "trial"));
    ASSERT_EQ(back.atoms.size(), m.atoms.size());
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
      EXPECT_EQ(back.atoms[i].element, m.atoms[i].element);
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(back.atoms[i].pos[k], m.atoms[i].pos[k], 1e-6);
    }
  }
}

TEST(Geometry, ParseThenWriteIsIdentityOnCanonicalText) {
  std::mt19937 gen(11);
  for (int trial = 0; trial < 20; ++trial) {
    auto canonical = write_xyz(random_molecule(gen, 1 + trial), "c");
    EXPECT_EQ(write_xyz(parse_xyz(canonical), "c"), canonical);
  }
}

TEST(Geometry, UnitDisplacementMovesOneAtomByAmplitude) {
  Molecule m;
  m.atoms = {{"C", {0, 0, 0}}, {"O", {1.2, 0, 0}}, {"H", {-0.5, 0.9, 0}}};
  NormalMode mode;
  mode.displacement = {{0, 0, 0}, {0, 1, 0}, {0, 0, 0}};
  auto out = displace_along_mode(m, mode, 0.3);
  EXPECT_EQ(out.atoms[0].pos, m.atoms[0].pos);
  EXPECT_EQ(out.atoms[2].pos, m.atoms[2].pos);
  EXPECT_NEAR(out.atoms[1].pos[1], 0.3, 1e-12);
  EXPECT_NEAR(out.atoms[1].pos[0], 1.2, 1e-12);
}

TEST(Geometry, ZeroModeAndBadAmplitudeAreErrors) {
  Molecule m;
  m.atoms = {{"H", {0, 0, 0}}};
  NormalMode zero;
  zero.displacement = {{0, 0, 0}};
  EXPECT_THROW(displace_along_mode(m, zero, 0.3), Error);
  NormalMode unit;
  unit.displacement = {{1, 0, 0}};
  EXPECT_THROW(displace_along_mode(m, unit, 0.0), Error);
  NormalMode wrong;
  wrong.displacement = {{1, 0, 0}, {0, 1, 0}};
  EXPECT_THROW(displace_along_mode(m, wrong, 0.3), Error);
}

TEST(Geometry, SymmetricTwoAtomModePreservesCentroid) {
  Molecule m;
  m.atoms = {{"H", {0, 0, 0}}, {"H", {0, 0, 0.74}}};
  NormalMode stretch;
  stretch.displacement = {{0, 0, -0.7071}, {0, 0, 0.7071}};
  auto before = centroid(m);
  auto after = centroid(displace_along_mode(m, stretch, 0.3));
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(after[k], before[k], 1e-12);
}

TEST(Geometry, MaxAtomShiftEqualsAmplitude) {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> amp(0.01, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = random_molecule(gen, 6);
    auto mode = random_mode(gen, 6);
    double a = amp(gen);
    auto out = displace_along_mode(m, mode, a);
    double largest = 0;
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
      double d2 = 0;
      for (int k = 0; k < 3; ++k) d2 += std::pow(out.atoms[i].pos[k] - m.atoms[i].pos[k], 2);
      largest = std::max(largest, std::sqrt(d2));
    }
    EXPECT_NEAR(largest, a, 1e-9);
    EXPECT_EQ(out.charge, m.charge);
    EXPECT_EQ(out.multiplicity, m.multiplicity);
  }
}

TEST(Geometry, DisplacementIsLinearInAmplitude) {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> amp(0.01, 0.5);
  for (int trial = 0; trial < 50; ++trial) {
    auto m = random_molecule(gen, 8);
    auto mode = random_mode(gen, 8);
    double a = amp(gen);
    auto once = displace_along_mode(m, mode, 2 * a);
    auto twice = displace_along_mode(displace_along_mode(m, mode, a), mode, a);
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
      for (int k = 0; k < 3; ++k) EXPECT_NEAR(once.atoms[i].pos[k], twice.atoms[i].pos[k], 1e-9);
    }
  }
}
