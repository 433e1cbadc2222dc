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

#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "simcf/common.hpp"
#include "simcf/scenario.hpp"

namespace simcf {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

/// Local SIM frame: the boresight is +z, the U antennas sit on a line at
/// z = 0 with half-wavelength spacing, and layer m (1-based) is an
/// nx x ny grid at z = m * layer_spacing. Meta-atom n = ix * ny + iy.
class SimGeometry {
 public:
  /// atom_size is the side d_x = d_y entering the diffraction
  /// coefficients; 0 means equal to the spacing d_meta.
  SimGeometry(int nx, int ny, int M, int U, double d_meta, double layer_spacing,
              double antenna_spacing, double atom_size = 0.0);

  static SimGeometry from_config(const SystemConfig& cfg);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int num_atoms() const { return nx_ * ny_; }
  int num_layers() const { return M_; }
  int num_antennas() const { return U_; }
  double d_meta() const { return d_meta_; }
  double atom_size() const { return atom_size_; }
  double layer_spacing() const { return layer_spacing_; }

  /// Atom positions of layer m, 1 <= m <= M.
  std::vector<Vec3> layer_positions(int m) const;
  /// Offsets of the output-layer atoms from the grid center (z = 0).
  std::vector<Vec3> grid_offsets() const;
  std::vector<Vec3> antenna_positions() const;

 private:
  int nx_, ny_, M_, U_;
  double d_meta_, layer_spacing_, antenna_spacing_, atom_size_;
};

/// Rayleigh-Sommerfeld coefficient between a radiating element at `from`
/// and a receiving element at `to` on a plane normal to z. `area` is the
/// meta-atom aperture d_x * d_y. Throws if the points coincide.
cdouble diffraction_coefficient(const Vec3& from, const Vec3& to, double area, double wavelength);

/// Fixed propagation matrices of one SIM. W1 is N x U (antenna u to
/// layer-1 atom n); inter[m - 2] is the N x N matrix from layer m - 1 to
/// layer m for m = 2..M.
struct DiffractionSet {
  CMatrix W1;
  std::vector<CMatrix> inter;

  int num_atoms() const { return static_cast<int>(W1.rows()); }
  int num_antennas() const { return static_cast<int>(W1.cols()); }
  int num_layers() const { return static_cast<int>(inter.size()) + 1; }
  const CMatrix& W(int m) const { return inter.at(static_cast<std::size_t>(m - 2)); }
};

DiffractionSet build_diffraction_set(const SimGeometry& geom, double wavelength);

/// Process-wide memo of diffraction sets; every AP of a drop shares one.
class DiffractionCache {
 public:
  std::shared_ptr<const DiffractionSet> get(const SimGeometry& geom, double wavelength);
  std::size_t size() const;

 private:
  using Key = std::tuple<int, int, int, int, double, double, double, double>;
  mutable std::mutex mu_;
  std::map<Key, std::shared_ptr<const DiffractionSet>> sets_;
};

DiffractionCache& global_diffraction_cache();

/// Phase angles phi[l][m][n] stored flat in l-major, then m, then n order.
/// Values are kept in [0, 2*pi).
class PhaseTensor {
 public:
  PhaseTensor() = default;
  PhaseTensor(int L, int M, int N, double value = 0.0);

  static PhaseTensor random(int L, int M, int N, Rng& rng);

  int L() const { return L_; }
  int M() const { return M_; }
  int N() const { return N_; }

  double operator()(int l, int m, int n) const { return data_[index(l, m, n)]; }
  /// Stores the angle wrapped into [0, 2*pi).
  void set(int l, int m, int n, double phi);

  /// The M x N block of AP l, layer-major.
  std::span<const double> ap(int l) const;
  std::span<const double> flat() const { return data_; }

  void write(const std::string& path) const;
  static PhaseTensor read(const std::string& path, int L, int M, int N);

  friend bool operator==(const PhaseTensor&, const PhaseTensor&) = default;

 private:
  std::size_t index(int l, int m, int n) const {
    return (static_cast<std::size_t>(l) * M_ + m) * N_ + n;
  }
  int L_ = 0, M_ = 0, N_ = 0;
  std::vector<double> data_;
};

double wrap_phase(double phi);

/// Wave-based beamforming matrix G = Phi_M W_M ... Phi_2 W_2 Phi_1 for one
/// AP. `phases` holds M x N angles, layer-major (index m * N + n, 0-based m).
CMatrix cascade(const DiffractionSet& ds, std::span<const double> phases);

/// G * W1 (N x U), computed by propagating the antenna columns layer by
/// layer instead of forming G.
CMatrix cascade_times_w1(const DiffractionSet& ds, std::span<const double> phases);

/// partials[m-1] = Phi_m W_m ... Phi_1 W_1. Layers below first_layer are
/// taken as already current; partials.back() equals cascade_times_w1.
void cascade_partials(const DiffractionSet& ds, std::span<const double> phases, int first_layer,
                      std::vector<CMatrix>& partials);

}  // namespace simcf
