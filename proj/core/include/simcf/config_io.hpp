// SPDX-License-Identifier: Apache-2.0
//
// simcf: uplink simulation and optimization for SIM-enhanced cell-free massive MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <string>

#include "simcf/scenario.hpp"

namespace simcf {

/// Parse a JSON object naming SystemConfig fields. Fields that are absent
/// keep their defaults; d_meta and atom_size default to wavelength / 2 and
/// T_sim to 5 * wavelength. Unknown keys are
/// rejected so that typos do not silently fall back to defaults.
SystemConfig config_from_json(const std::string& text);

SystemConfig load_config(const std::string& path);

std::string config_to_json(const SystemConfig& cfg);

}  // namespace simcf
