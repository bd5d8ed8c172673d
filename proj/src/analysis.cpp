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

#include "chemflow/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "chemflow/error.hpp"
#include "chemflow/text.hpp"

namespace chemflow::analysis {

using thermo::Property;

namespace {

std::string f2(double v) { return text::fixed(std::abs(v) < 0.005 ? 0.0 : v, 2); }

}  // namespace

Report pka(double dg, const thermo::Constants& c) {
  Report r;
  double value = thermo::pka_from_delta_g(dg, c);
  r.data = {{"delta_g_kcal", dg}, {"pka", value}, {"denominator", c.pka_denominator()}};
  r.table = "delta_g_kcal\tpKa\n" + f2(dg) + "\t" + f2(value) + "\n";
  return r;
}

Report pka_table(std::string_view table_text, double g_proton, const thermo::Constants& c) {
  auto acids = thermo::parse_acid_table(table_text);
  if (acids.empty()) throw Error(Errc::invalid_argument, "acid table has no rows");
  Report r;
  r.data = {{"g_proton", g_proton}, {"rows", nlohmann::json::array()}};
  r.table = "label\tdelta_g_kcal\tpKa\n";
  for (const auto& a : acids) {
    double dg = thermo::deprotonation_delta_g(a.g_acid.value, a.g_anion.value, g_proton, c);
    double value = thermo::pka_from_delta_g(dg, c);
    r.data["rows"].push_back({{"label", a.label}, {"delta_g_kcal", dg}, {"pka", value}});
    r.table += a.label + "\t" + f2(dg) + "\t" + f2(value) + "\n";
  }
  return r;
}

Report calibrate_pka(std::string_view table_text, double g_proton, const thermo::Constants& c) {
  auto acids = thermo::parse_acid_table(table_text);
  std::vector<std::pair<double, double>> refs;
  std::vector<std::string> ref_labels;
  std::vector<const thermo::AcidRecord*> targets;
  for (const auto& a : acids) {
    if (a.pka_exp) {
      refs.emplace_back(thermo::deprotonation_delta_g(a.g_acid.value, a.g_anion.value, g_proton, c), *a.pka_exp);
      ref_labels.push_back(a.label);
    } else {
      targets.push_back(&a);
    }
  }
  if (refs.empty()) throw Error(Errc::invalid_argument, "no reference acids with an experimental pKa");
  auto cal = thermo::calibrate_proton_correction(refs, c);

  Report r;
  nlohmann::json jrefs = nlohmann::json::array();
  std::ostringstream os;
  os << "reference\tpKa_exp\tcorrection_kcal\n";
  for (std::size_t i = 0; i < refs.size(); ++i) {
    jrefs.push_back({{"label", ref_labels[i]},
                     {"delta_g_raw_kcal", refs[i].first},
                     {"pka_exp", refs[i].second},
                     {"correction_kcal", cal.corrections[i]}});
    os << ref_labels[i] << "\t" << f2(refs[i].second) << "\t" << f2(cal.corrections[i]) << "\n";
  }
  os << "mean\t-\t" << f2(cal.mean) << "\n";
  nlohmann::json jt = nlohmann::json::array();
  for (const auto* t : targets) {
    double raw = thermo::deprotonation_delta_g(t->g_acid.value, t->g_anion.value, g_proton, c);
    auto pred = thermo::predict_pka(raw, cal.corrections, c);
    jt.push_back({{"label", t->label}, {"delta_g_raw_kcal", raw}, {"predictions", pred.predictions},
                  {"mean", pred.mean}});
    os << "\ntarget " << t->label << "\nreference\tpKa_pred\n";
    for (std::size_t i = 0; i < pred.predictions.size(); ++i)
      os << ref_labels[i] << "\t" << f2(pred.predictions[i]) << "\n";
    os << "mean\t" << f2(pred.mean) << "\n";
  }
  r.data = {{"g_proton", g_proton}, {"references", jrefs}, {"mean_correction_kcal", cal.mean}, {"targets", jt}};
  r.table = os.str();
  return r;
}

Report ring_strain(std::string_view table_text, int reference_n, Property p, const thermo::Constants& c) {
  auto records = thermo::parse_energy_table(table_text);
  auto series = thermo::ring_series_from_records(records);
  auto rows = thermo::ring_strain(series, reference_n, p, c);
  Report r;
  r.data = {{"reference_n", reference_n}, {"property", thermo::to_string(p)}, {"rows", nlohmann::json::array()}};
  r.table = "n\tdelta_kcal\tstrain_kcal\n";
  for (const auto& row : rows) {
    nlohmann::json j = {{"n", row.n}, {"strain_kcal", row.strain}};
    j["delta_kcal"] = row.delta ? nlohmann::json(*row.delta) : nlohmann::json();
    r.data["rows"].push_back(j);
    r.table += std::to_string(row.n) + "\t" + (row.delta ? f2(*row.delta) : "-") + "\t" + f2(row.strain) + "\n";
  }
  return r;
}

Report reaction(std::string_view table_text, const std::vector<std::string>& reactions, Property p,
                const thermo::Constants& c) {
  if (reactions.empty()) throw Error(Errc::invalid_argument, "no reactions given");
  auto records = thermo::parse_energy_table(table_text);
  Report r;
  r.data = {{"property", thermo::to_string(p)}, {"rows", nlohmann::json::array()}};
  r.table = "reaction\tdelta_kcal\n";
  for (const auto& rx : reactions) {
    double d = thermo::reaction_delta(records, thermo::parse_reaction(rx), p, c);
    r.data["rows"].push_back({{"reaction", rx}, {"delta_kcal", d}});
    r.table += rx + "\t" + f2(d) + "\n";
  }
  return r;
}

Report relative(const std::vector<std::pair<std::string, double>>& energies, const thermo::Constants& c) {
  auto rel = thermo::relative_energies(energies, c);
  std::stable_sort(rel.begin(), rel.end(), [](const auto& a, const auto& b) { return a.kcal < b.kcal; });
  Report r;
  r.data = {{"most_stable", rel.front().label}, {"rows", nlohmann::json::array()}};
  r.table = "label\trelative_kcal\n";
  for (const auto& e : rel) {
    r.data["rows"].push_back({{"label", e.label}, {"relative_kcal", e.kcal}});
    r.table += e.label + "\t" + f2(e.kcal) + "\n";
  }
  return r;
}

Report relative_table(std::string_view table_text, Property p, const thermo::Constants& c) {
  auto records = thermo::parse_energy_table(table_text);
  std::vector<std::pair<std::string, double>> energies;
  for (const auto& rec : records) {
    const auto& v = rec.get(p);
    if (!v) throw Error(Errc::invalid_argument, "row " + rec.label + " has no " + thermo::to_string(p) + " value");
    energies.emplace_back(rec.label, v->value);
  }
  return relative(energies, c);
}

}  // namespace chemflow::analysis
