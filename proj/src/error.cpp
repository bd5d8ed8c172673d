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

#include "chemflow/error.hpp"

namespace chemflow {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::parse: return "parse";
    case Errc::protocol: return "protocol";
    case Errc::action_space: return "action_space";
    case Errc::not_found: return "not_found";
    case Errc::io: return "io";
    case Errc::config: return "config";
    case Errc::conflict: return "conflict";
    case Errc::unavailable: return "unavailable";
  }
  return "unknown";
}

}  // namespace chemflow
