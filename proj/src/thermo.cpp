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

#include "chemflow/thermo.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "chemflow/error.hpp"
#include "chemflow/text.hpp"

namespace chemflow::thermo {

namespace {

const std::optional<Energy> kNone;

const std::vector<std::pair<std::string_view, int>> kRingNames = {
    {"propane", 3}, {"butane", 4}, {"pentane", 5}, {"hexane", 6},  {"heptane", 7},
    {"octane", 8},  {"nonane", 9}, {"decane", 10}, {"undecane", 11}, {"dodecane", 12}};

std::optional<int> ring_size(std::string_view suffix) {
  for (const auto& [name, n] : kRingNames) {
    if (text::iequals(name, suffix)) return n;
  }
  return std::nullopt;
}

const ThermoRecord& find_record(const std::vector<ThermoRecord>& records, const std::string& label) {
  for (const auto& r : records) {
    if (r.label == label) return r;
  }
  throw Error(Errc::not_found, "no energy record for '" + label + "'");
}

double property_of(const ThermoRecord& r, Property p) {
  const auto& e = r.get(p);
  if (!e) throw Error(Errc::not_found, std::string("record '") + r.label + "' has no " + to_string(p) + " value");
  return e->value;
}

std::optional<Energy> optional_energy(const std::string& cell) {
  auto t = text::trim(cell);
  if (t.empty() || t == "-" || text::iequals(t, "na")) return std::nullopt;
  return Energy::parse(t);
}

}  // namespace

Energy Energy::parse(std::string_view s) {
  auto t = text::trim(s);
  auto v = text::parse_double(t);
  if (!v) throw Error(Errc::parse, "not an energy value: '" + std::string(t) + "'");
  return Energy{std::string(t), *v};
}

Energy Energy::of(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return Energy{std::string(buf, ptr), v};
}

Property parse_property(std::string_view s) {
  if (text::iequals(s, "E")) return Property::E;
  if (text::iequals(s, "H")) return Property::H;
  if (text::iequals(s, "G")) return Property::G;
  throw Error(Errc::invalid_argument, "unknown property '" + std::string(s) + "' (expected E, H or G)");
}

const char* to_string(Property p) noexcept {
  switch (p) {
    case Property::E: return "E";
    case Property::H: return "H";
    case Property::G: return "G";
  }
  return "?";
}

const std::optional<Energy>& ThermoRecord::get(Property p) const {
  switch (p) {
    case Property::E: return electronic_energy;
    case Property::H: return enthalpy;
    case Property::G: return gibbs;
  }
  return kNone;
}

Reaction parse_reaction(std::string_view s) {
  std::string str(s);
  std::size_t arrow = str.find("->");
  if (arrow == std::string::npos) arrow = str.find("=>");
  if (arrow == std::string::npos) throw Error(Errc::parse, "reaction needs '->': " + str);

  auto side = [](std::string_view part) {
    std::vector<Species> out;
    for (auto& term : text::split(part, '+')) {
      auto fields = text::split_ws(term);
      if (fields.empty()) throw Error(Errc::parse, "empty reaction term");
      Species sp;
      if (fields.size() == 2) {
        auto c = text::parse_int(fields[0]);
        if (!c || *c <= 0) throw Error(Errc::parse, "bad coefficient '" + fields[0] + "'");
        sp.coefficient = static_cast<int>(*c);
        sp.label = fields[1];
      } else if (fields.size() == 1) {
        sp.label = fields[0];
      } else {
        throw Error(Errc::parse, "bad reaction term '" + term + "'");
      }
      out.push_back(std::move(sp));
    }
    return out;
  };

  Reaction r;
  r.reactants = side(std::string_view(str).substr(0, arrow));
  r.products = side(std::string_view(str).substr(arrow + 2));
  return r;
}

double hartree_to_kcal(double eh, const Constants& c) { return eh * c.hartree_to_kcal; }

double reaction_delta(const std::vector<ThermoRecord>& records, const Reaction& reaction, Property p,
                      const Constants& c) {
  double sum = 0.0;
  for (const auto& s : reaction.products) {
    if (s.coefficient <= 0) throw Error(Errc::invalid_argument, "coefficient must be positive");
    sum += s.coefficient * property_of(find_record(records, s.label), p);
  }
  for (const auto& s : reaction.reactants) {
    if (s.coefficient <= 0) throw Error(Errc::invalid_argument, "coefficient must be positive");
    sum -= s.coefficient * property_of(find_record(records, s.label), p);
  }
  return hartree_to_kcal(sum, c);
}

double pka_from_delta_g(double dg_kcal, const Constants& c) { return dg_kcal / c.pka_denominator(); }

double deprotonation_delta_g(double g_acid, double g_anion, double g_proton, const Constants& c) {
  return hartree_to_kcal(g_anion + g_proton - g_acid, c);
}

Calibration calibrate_proton_correction(const std::vector<std::pair<double, double>>& refs, const Constants& c) {
  if (refs.empty()) throw Error(Errc::invalid_argument, "calibration needs at least one reference acid");
  Calibration out;
  for (const auto& [dg_raw, pka] : refs) out.corrections.push_back(pka * c.pka_denominator() - dg_raw);
  out.mean = std::accumulate(out.corrections.begin(), out.corrections.end(), 0.0) /
             static_cast<double>(out.corrections.size());
  return out;
}

Prediction predict_pka(double dg_raw_target, const std::vector<double>& corrections, const Constants& c) {
  if (corrections.empty()) throw Error(Errc::invalid_argument, "prediction needs at least one correction");
  Prediction out;
  for (double corr : corrections) out.predictions.push_back((dg_raw_target + corr) / c.pka_denominator());
  out.mean = std::accumulate(out.predictions.begin(), out.predictions.end(), 0.0) /
             static_cast<double>(out.predictions.size());
  return out;
}

std::map<int, RingPair> ring_series_from_records(const std::vector<ThermoRecord>& records) {
  std::map<int, RingPair> series;
  for (const auto& r : records) {
    auto name = text::lower(r.label);
    if (text::starts_with(name, "methylcyclo")) {
      if (auto n = ring_size(std::string_view(name).substr(11))) series[*n + 1].methylcyclo = r;
    } else if (text::starts_with(name, "cyclo")) {
      if (auto n = ring_size(std::string_view(name).substr(5))) series[*n].cyclo = r;
    }
  }
  return series;
}

std::vector<StrainRow> ring_strain(const std::map<int, RingPair>& series, int reference_n, Property p,
                                   const Constants& c) {
  std::vector<int> sizes;
  for (const auto& [n, pair] : series) {
    if (pair.cyclo) sizes.push_back(n);
  }
  if (sizes.empty()) throw Error(Errc::invalid_argument, "ring series has no cycloalkanes");
  int lo = sizes.front();
  int hi = sizes.back();
  if (static_cast<int>(sizes.size()) != hi - lo + 1) {
    throw Error(Errc::invalid_argument, "ring series has gaps between " + std::to_string(lo) + " and " +
                                            std::to_string(hi));
  }
  if (reference_n < lo || reference_n > hi) {
    throw Error(Errc::invalid_argument, "reference ring size " + std::to_string(reference_n) + " not in series");
  }

  std::map<int, double> delta;
  for (int n = lo + 1; n <= hi; ++n) {
    const auto& pair = series.at(n);
    if (!pair.methylcyclo) {
      throw Error(Errc::invalid_argument, "ring series missing methyl analogue for n=" + std::to_string(n));
    }
    delta[n] = hartree_to_kcal(property_of(*pair.methylcyclo, p) - property_of(*pair.cyclo, p), c);
  }

  std::map<int, double> strain;
  strain[reference_n] = 0.0;
  for (int n = reference_n; n > lo; --n) strain[n - 1] = delta[n] + strain[n];
  for (int n = reference_n + 1; n <= hi; ++n) strain[n] = strain[n - 1] - delta[n];

  std::vector<StrainRow> rows;
  for (int n = lo; n <= hi; ++n) {
    StrainRow row;
    row.n = n;
    if (auto it = delta.find(n); it != delta.end()) row.delta = it->second;
    row.strain = strain[n];
    rows.push_back(row);
  }
  return rows;
}

std::vector<RelativeEnergy> relative_energies(const std::vector<std::pair<std::string, double>>& conformers,
                                              const Constants& c) {
  if (conformers.empty()) throw Error(Errc::invalid_argument, "no conformers given");
  double lowest = conformers.front().second;
  for (const auto& [label, v] : conformers) lowest = std::min(lowest, v);
  std::vector<RelativeEnergy> out;
  for (const auto& [label, v] : conformers) out.push_back({label, hartree_to_kcal(v - lowest, c)});
  return out;
}

std::optional<std::size_t> Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (text::iequals(header[i], name)) return i;
  }
  return std::nullopt;
}

Table parse_table(std::string_view input) {
  Table t;
  char delim = 0;
  for (const auto& raw : text::lines(input)) {
    auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (!delim) {
      if (text::contains(line, "\t")) delim = '\t';
      else if (text::contains(line, ",")) delim = ',';
      else delim = ' ';
    }
    std::vector<std::string> cells;
    if (delim == ' ') {
      cells = text::split_ws(line);
    } else {
      for (auto& cell : text::split(line, delim)) cells.emplace_back(text::trim(cell));
    }
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      cells.resize(t.header.size());
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw Error(Errc::parse, "table is empty");
  return t;
}

std::vector<ThermoRecord> parse_energy_table(std::string_view input) {
  auto t = parse_table(input);
  auto label = t.column("label");
  if (!label) throw Error(Errc::parse, "energy table needs a 'label' column");
  auto e = t.column("E");
  auto h = t.column("H");
  auto g = t.column("G");
  if (!e && !h && !g) throw Error(Errc::parse, "energy table needs at least one of E, H, G");
  std::vector<ThermoRecord> out;
  for (const auto& row : t.rows) {
    ThermoRecord r;
    r.label = row[*label];
    if (e) r.electronic_energy = optional_energy(row[*e]);
    if (h) r.enthalpy = optional_energy(row[*h]);
    if (g) r.gibbs = optional_energy(row[*g]);
    if (!r.electronic_energy && !r.enthalpy && !r.gibbs) {
      throw Error(Errc::parse, "record '" + r.label + "' has no energies");
    }
    out.push_back(std::move(r));
  }
  if (out.empty()) throw Error(Errc::parse, "energy table has no rows");
  return out;
}

std::vector<AcidRecord> parse_acid_table(std::string_view input) {
  auto t = parse_table(input);
  auto label = t.column("label");
  auto acid = t.column("G_acid");
  auto anion = t.column("G_anion");
  auto pka = t.column("pKa");
  if (!label || !acid || !anion) throw Error(Errc::parse, "acid table needs label, G_acid and G_anion columns");
  std::vector<AcidRecord> out;
  for (const auto& row : t.rows) {
    AcidRecord r;
    r.label = row[*label];
    r.g_acid = Energy::parse(row[*acid]);
    r.g_anion = Energy::parse(row[*anion]);
    if (pka) {
      auto cell = text::trim(row[*pka]);
      if (!cell.empty() && cell != "-") {
        auto v = text::parse_double(cell);
        if (!v) throw Error(Errc::parse, "bad pKa '" + std::string(cell) + "'");
        r.pka_exp = *v;
      }
    }
    out.push_back(std::move(r));
  }
  if (out.empty()) throw Error(Errc::parse, "acid table has no rows");
  return out;
}

}  // namespace chemflow::thermo
