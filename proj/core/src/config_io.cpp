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

#include "simcf/config_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace simcf {

namespace {

using nlohmann::json;

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) out = it->get<T>();
}

}  // namespace

SystemConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "config must be a JSON object");

  static const char* const kKnown[] = {
      "L", "K", "U", "M", "N", "grid_nx", "tau_c", "tau_p", "sigma2", "p_max", "p_hat", "area_side", "h_ap",
      "h_ue", "wavelength", "d_meta", "atom_size", "T_sim", "delta_f", "delta_sf", "d_dc"};
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : kKnown) known = known || item.key() == k;
    if (!known) throw Error(ErrorCode::kInvalidConfig, "unknown config field: " + item.key());
  }

  SystemConfig cfg;
  try {
    take(j, "L", cfg.L);
    take(j, "K", cfg.K);
    take(j, "U", cfg.U);
    take(j, "M", cfg.M);
    take(j, "N", cfg.N);
    take(j, "grid_nx", cfg.grid_nx);
    take(j, "tau_c", cfg.tau_c);
    take(j, "tau_p", cfg.tau_p);
    take(j, "sigma2", cfg.sigma2);
    take(j, "p_max", cfg.p_max);
    take(j, "p_hat", cfg.p_hat);
    take(j, "area_side", cfg.area_side);
    take(j, "h_ap", cfg.h_ap);
    take(j, "h_ue", cfg.h_ue);
    take(j, "wavelength", cfg.wavelength);
    cfg.d_meta = cfg.wavelength / 2.0;
    cfg.atom_size = cfg.wavelength / 2.0;
    cfg.T_sim = 5.0 * cfg.wavelength;
    take(j, "d_meta", cfg.d_meta);
    take(j, "atom_size", cfg.atom_size);
    take(j, "T_sim", cfg.T_sim);
    take(j, "delta_f", cfg.delta_f);
    take(j, "delta_sf", cfg.delta_sf);
    take(j, "d_dc", cfg.d_dc);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("config field has wrong type: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

SystemConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return config_from_json(ss.str());
}

std::string config_to_json(const SystemConfig& cfg) {
  json j = {
      {"L", cfg.L},
      {"K", cfg.K},
      {"U", cfg.U},
      {"M", cfg.M},
      {"N", cfg.N},
      {"grid_nx", cfg.grid_nx},
      {"tau_c", cfg.tau_c},
      {"tau_p", cfg.tau_p},
      {"sigma2", cfg.sigma2},
      {"p_max", cfg.p_max},
      {"p_hat", cfg.p_hat},
      {"area_side", cfg.area_side},
      {"h_ap", cfg.h_ap},
      {"h_ue", cfg.h_ue},
      {"wavelength", cfg.wavelength},
      {"d_meta", cfg.d_meta},
      {"atom_size", cfg.atom_size},
      {"T_sim", cfg.T_sim},
      {"delta_f", cfg.delta_f},
      {"delta_sf", cfg.delta_sf},
      {"d_dc", cfg.d_dc},
  };
  return j.dump(2);
}

}  // namespace simcf
