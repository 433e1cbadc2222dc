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

#include "simcf/sim_physics.hpp"

#include <cmath>
#include <algorithm>
#include <fstream>
#include <iomanip>
#include <limits>

namespace simcf {

SimGeometry::SimGeometry(int nx, int ny, int M, int U, double d_meta, double layer_spacing,
                         double antenna_spacing, double atom_size)
    : nx_(nx), ny_(ny), M_(M), U_(U), d_meta_(d_meta), layer_spacing_(layer_spacing),
      antenna_spacing_(antenna_spacing), atom_size_(atom_size > 0.0 ? atom_size : d_meta) {
  if (nx < 1 || ny < 1 || M < 1 || U < 1 || !(d_meta > 0.0) || !(layer_spacing > 0.0) ||
      atom_size < 0.0) {
    throw Error(ErrorCode::kInvalidArgument, "SimGeometry: invalid dimensions or spacings");
  }
}

SimGeometry SimGeometry::from_config(const SystemConfig& cfg) {
  return SimGeometry(cfg.nx(), cfg.ny(), cfg.M, cfg.U, cfg.d_meta, cfg.layer_spacing(),
                     cfg.wavelength / 2.0, cfg.atom_size);
}

std::vector<Vec3> SimGeometry::grid_offsets() const {
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(num_atoms()));
  const double cx = 0.5 * (nx_ - 1);
  const double cy = 0.5 * (ny_ - 1);
  for (int ix = 0; ix < nx_; ++ix) {
    for (int iy = 0; iy < ny_; ++iy) {
      out.push_back({(ix - cx) * d_meta_, (iy - cy) * d_meta_, 0.0});
    }
  }
  return out;
}

std::vector<Vec3> SimGeometry::layer_positions(int m) const {
  auto pos = grid_offsets();
  for (auto& p : pos) p.z = m * layer_spacing_;
  return pos;
}

std::vector<Vec3> SimGeometry::antenna_positions() const {
  std::vector<Vec3> out;
  const double c = 0.5 * (U_ - 1);
  for (int u = 0; u < U_; ++u) out.push_back({(u - c) * antenna_spacing_, 0.0, 0.0});
  return out;
}

cdouble diffraction_coefficient(const Vec3& from, const Vec3& to, double area, double wavelength) {
  const double ddx = to.x - from.x;
  const double ddy = to.y - from.y;
  const double ddz = to.z - from.z;
  const double d = std::sqrt(ddx * ddx + ddy * ddy + ddz * ddz);
  if (!(d > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, "diffraction_coefficient: coincident points");
  }
  const double cos_chi = std::abs(ddz) / d;
  const cdouble bracket(1.0 / (kTwoPi * d), -1.0 / wavelength);
  return (area * cos_chi / d) * bracket * std::polar(1.0, kTwoPi * d / wavelength);
}

DiffractionSet build_diffraction_set(const SimGeometry& geom, double wavelength) {
  const int N = geom.num_atoms();
  const int U = geom.num_antennas();
  const double area = geom.atom_size() * geom.atom_size();
  DiffractionSet ds;

  const auto ant = geom.antenna_positions();
  const auto first = geom.layer_positions(1);
  ds.W1.resize(N, U);
  for (int n = 0; n < N; ++n) {
    for (int u = 0; u < U; ++u) ds.W1(n, u) = diffraction_coefficient(ant[u], first[n], area, wavelength);
  }

  // Every pair of adjacent layers is congruent, so all W_m coincide; they
  // are still stored per layer to keep the cascade general.
  for (int m = 2; m <= geom.num_layers(); ++m) {
    const auto src = geom.layer_positions(m - 1);
    const auto dst = geom.layer_positions(m);
    CMatrix W(N, N);
    for (int n = 0; n < N; ++n) {
      for (int np = 0; np < N; ++np) W(n, np) = diffraction_coefficient(src[np], dst[n], area, wavelength);
    }
    ds.inter.push_back(std::move(W));
  }
  return ds;
}

std::shared_ptr<const DiffractionSet> DiffractionCache::get(const SimGeometry& geom, double wavelength) {
  const Key key{geom.nx(), geom.ny(), geom.num_layers(), geom.num_antennas(), geom.d_meta(),
                geom.layer_spacing(), geom.atom_size(), wavelength};
  std::lock_guard lock(mu_);
  auto it = sets_.find(key);
  if (it != sets_.end()) return it->second;
  auto ds = std::make_shared<const DiffractionSet>(build_diffraction_set(geom, wavelength));
  sets_.emplace(key, ds);
  return ds;
}

std::size_t DiffractionCache::size() const {
  std::lock_guard lock(mu_);
  return sets_.size();
}

DiffractionCache& global_diffraction_cache() {
  static DiffractionCache cache;
  return cache;
}

double wrap_phase(double phi) {
  double w = std::fmod(phi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  if (w >= kTwoPi) w = 0.0;
  return w;
}

PhaseTensor::PhaseTensor(int L, int M, int N, double value)
    : L_(L), M_(M), N_(N),
      data_(static_cast<std::size_t>(L) * M * N, wrap_phase(value)) {
  if (L < 1 || M < 1 || N < 1) throw Error(ErrorCode::kInvalidArgument, "PhaseTensor: empty shape");
}

PhaseTensor PhaseTensor::random(int L, int M, int N, Rng& rng) {
  PhaseTensor t(L, M, N);
  std::uniform_real_distribution<double> u(0.0, kTwoPi);
  for (auto& v : t.data_) v = wrap_phase(u(rng));
  return t;
}

void PhaseTensor::set(int l, int m, int n, double phi) { data_[index(l, m, n)] = wrap_phase(phi); }

std::span<const double> PhaseTensor::ap(int l) const {
  return std::span<const double>(data_).subspan(index(l, 0, 0), static_cast<std::size_t>(M_) * N_);
}

void PhaseTensor::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write phase file: " + path);
  out << std::setprecision(17);
  for (double v : data_) out << v << '\n';
}

PhaseTensor PhaseTensor::read(const std::string& path, int L, int M, int N) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot read phase file: " + path);
  PhaseTensor t(L, M, N);
  std::size_t i = 0;
  double v = 0.0;
  while (in >> v) {
    if (i >= t.data_.size()) throw Error(ErrorCode::kShapeMismatch, "phase file has too many entries");
    t.data_[i++] = wrap_phase(v);
  }
  if (i != t.data_.size()) throw Error(ErrorCode::kShapeMismatch, "phase file has too few entries");
  return t;
}

namespace {

void check_phase_count(const DiffractionSet& ds, std::span<const double> phases) {
  const auto expected = static_cast<std::size_t>(ds.num_layers()) * ds.num_atoms();
  if (phases.size() != expected) {
    throw Error(ErrorCode::kShapeMismatch, "cascade: expected M * N phase entries");
  }
}

CVector unit_phasors(std::span<const double> phases, int m, int N) {
  CVector d(N);
  for (int n = 0; n < N; ++n) d(n) = std::polar(1.0, phases[static_cast<std::size_t>(m) * N + n]);
  return d;
}

}  // namespace

CMatrix cascade(const DiffractionSet& ds, std::span<const double> phases) {
  check_phase_count(ds, phases);
  const int N = ds.num_atoms();
  CMatrix G = unit_phasors(phases, 0, N).asDiagonal();
  for (int m = 2; m <= ds.num_layers(); ++m) {
    G = unit_phasors(phases, m - 1, N).asDiagonal() * (ds.W(m) * G);
  }
  return G;
}

CMatrix cascade_times_w1(const DiffractionSet& ds, std::span<const double> phases) {
  check_phase_count(ds, phases);
  const int N = ds.num_atoms();
  CMatrix T = unit_phasors(phases, 0, N).asDiagonal() * ds.W1;
  for (int m = 2; m <= ds.num_layers(); ++m) {
    T = unit_phasors(phases, m - 1, N).asDiagonal() * (ds.W(m) * T);
  }
  return T;
}

void cascade_partials(const DiffractionSet& ds, std::span<const double> phases, int first_layer,
                      std::vector<CMatrix>& partials) {
  check_phase_count(ds, phases);
  const int N = ds.num_atoms();
  const int M = ds.num_layers();
  if (static_cast<int>(partials.size()) != M) {
    partials.assign(static_cast<std::size_t>(M), CMatrix());
    first_layer = 1;
  }
  first_layer = std::max(first_layer, 1);
  for (int m = first_layer; m <= M; ++m) {
    const CVector d = unit_phasors(phases, m - 1, N);
    if (m == 1) {
      partials[0] = d.asDiagonal() * ds.W1;
    } else {
      partials[m - 1] = d.asDiagonal() * (ds.W(m) * partials[m - 2]);
    }
  }
}

}  // namespace simcf
