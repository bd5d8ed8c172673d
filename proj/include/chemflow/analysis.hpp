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

#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "chemflow/thermo.hpp"

namespace chemflow::analysis {

// A computed result as structured data plus a tab-separated table with two decimals.
struct Report {
  nlohmann::json data;
  std::string table;
};

Report pka(double delta_g_kcal, const thermo::Constants& c = {});

// One pKa per row of an acid table (label, G_acid, G_anion).
Report pka_table(std::string_view table_text, double g_proton = thermo::kProtonGibbsAqueous,
                 const thermo::Constants& c = {});

// Rows with an experimental pKa calibrate; rows without one are predicted.
Report calibrate_pka(std::string_view table_text, double g_proton = thermo::kProtonGibbsCalibration,
                     const thermo::Constants& c = {});

Report ring_strain(std::string_view table_text, int reference_n = 6, thermo::Property p = thermo::Property::H,
                   const thermo::Constants& c = {});

Report reaction(std::string_view table_text, const std::vector<std::string>& reactions,
                thermo::Property p = thermo::Property::G, const thermo::Constants& c = {});

// Rows sorted from most to least stable.
Report relative(const std::vector<std::pair<std::string, double>>& energies, const thermo::Constants& c = {});
Report relative_table(std::string_view table_text, thermo::Property p = thermo::Property::E,
                      const thermo::Constants& c = {});

}  // namespace chemflow::analysis
