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

#include <filesystem>
#include <string>

#include "chemflow/tools.hpp"

namespace chemflow::tools {

// Resolves `rel` inside `root`. Absolute paths and anything that escapes the root (including
// through symlinks) throw Error(invalid_argument).
std::filesystem::path resolve_path(const std::string& root, const std::string& rel);

// read_file_content, parse_xyz, write_input, validate_input, submit_slurm_jobs,
// extract_properties_from_orca_outputfile, check_imaginary_frequency, displace_and_resubmit,
// relative_energies, pka, calibrate_pka, ring_strain, reaction_energy, update_global_memory,
// recommend_cores
void register_builtin_tools(Registry& registry);

}  // namespace chemflow::tools
