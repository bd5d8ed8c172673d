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
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace chemflow::thermo {

struct Constants {
  double hartree_to_kcal = 627.5095;  // kcal/mol per Eh
  double gas_constant = 1.987204e-3;  // kcal/(mol K)
  double temperature = 298.15;        // K
  double ln10 = 2.303;

  // 2.303 * R * T in kcal/mol
  double pka_denominator() const { return ln10 * gas_constant * temperature; }
};

// Free energy of the aqueous proton (Eh) used for single-acid pKa estimates.
inline constexpr double kProtonGibbsAqueous = -0.42373677;
// Proton free energy (Eh) used with the reference-acid calibration scheme.
inline constexpr double kProtonGibbsCalibration = -1.09744548;

// An energy in Eh that keeps the exact decimal text it was read from.
struct Energy {
  std::string text;
  double value = 0.0;

  static Energy parse(std::string_view s);
  static Energy of(double v);
};

enum class Property { E, H, G };

Property parse_property(std::string_view s);
const char* to_string(Property p) noexcept;

struct ThermoRecord {
  std::string label;
  std::optional<Energy> electronic_energy;
  std::optional<Energy> enthalpy;
  std::optional<Energy> gibbs;

  const std::optional<Energy>& get(Property p) const;
};

struct Species {
  std::string label;
  int coefficient = 1;
};

struct Reaction {
  std::vector<Species> reactants;
  std::vector<Species> products;
};

// Parses "A + 2 B -> C + D"; "->" and "=>" are both accepted.
Reaction parse_reaction(std::string_view s);

double hartree_to_kcal(double eh, const Constants& c = {});

// (sum products - sum reactants) converted to kcal/mol.
double reaction_delta(const std::vector<ThermoRecord>& records, const Reaction& reaction, Property p,
                      const Constants& c = {});

double pka_from_delta_g(double dg_kcal, const Constants& c = {});

double deprotonation_delta_g(double g_acid, double g_anion, double g_proton, const Constants& c = {});

struct Calibration {
  std::vector<double> corrections;
  double mean = 0.0;
};

// refs are (raw deprotonation free energy in kcal/mol, experimental pKa).
Calibration calibrate_proton_correction(const std::vector<std::pair<double, double>>& refs,
                                        const Constants& c = {});

struct Prediction {
  std::vector<double> predictions;
  double mean = 0.0;
};

Prediction predict_pka(double dg_raw_target, const std::vector<double>& corrections, const Constants& c = {});

struct RingPair {
  std::optional<ThermoRecord> cyclo;         // cycloalkane with n carbons in the ring
  std::optional<ThermoRecord> methylcyclo;   // methylcycloalkane with an (n-1) ring
};

struct StrainRow {
  int n = 0;
  std::optional<double> delta;  // methylcyclo_(n-1) - cyclo_n, kcal/mol
  double strain = 0.0;
};

// Groups records named cyclopropane..cyclododecane and their methyl analogues by ring size n.
std::map<int, RingPair> ring_series_from_records(const std::vector<ThermoRecord>& records);

std::vector<StrainRow> ring_strain(const std::map<int, RingPair>& series, int reference_n, Property p,
                                   const Constants& c = {});

struct RelativeEnergy {
  std::string label;
  double kcal = 0.0;
};

std::vector<RelativeEnergy> relative_energies(const std::vector<std::pair<std::string, double>>& conformers,
                                              const Constants& c = {});

// Delimited text table: first non-comment line is the header. Tab, comma or whitespace separated.
struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::optional<std::size_t> column(std::string_view name) const;
};

Table parse_table(std::string_view text);

// Columns label plus any of E, H, G (case-insensitive). Empty or "-" cells are absent.
std::vector<ThermoRecord> parse_energy_table(std::string_view text);

struct AcidRecord {
  std::string label;
  Energy g_acid;
  Energy g_anion;
  std::optional<double> pka_exp;
};

// Columns label, G_acid, G_anion and optional pKa.
std::vector<AcidRecord> parse_acid_table(std::string_view text);

}  // namespace chemflow::thermo
