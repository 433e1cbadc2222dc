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

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "simcf/common.hpp"

namespace simcf {

/// Global constants of one simulated system. Every field has a default
/// taken from the reference simulation setup (2 GHz carrier, 500 m square,
/// 200 mW UEs, -94 dBm noise, tau_c = 200, tau_p = 4).
struct SystemConfig {
  int L = 10;  ///< access points
  int K = 5;   ///< user equipments
  int U = 2;   ///< antennas per AP
  int M = 5;   ///< metasurface layers per SIM
  int N = 64;  ///< meta-atoms per layer, N = Nx * Nx
  int grid_nx = 0;  ///< 0: square grid; otherwise Nx, with Ny = N / Nx

  int tau_c = 200;
  int tau_p = 4;

  double sigma2 = 3.981071705534973e-13;  ///< -94 dBm in W
  double p_max = 0.2;                     ///< W
  std::vector<double> p_hat;              ///< per-UE pilot power; empty = p_max for all

  double area_side = 500.0;
  double h_ap = 15.0;
  double h_ue = 1.65;

  double wavelength = 0.15;
  double d_meta = 0.075;     ///< meta-atom spacing
  double atom_size = 0.075;  ///< meta-atom side d_x = d_y; 0 = d_meta
  double T_sim = 0.75;    ///< SIM thickness; layer spacing is T_sim / M

  double delta_f = 0.5;
  double delta_sf = 8.0;  ///< shadowing standard deviation (dB)
  double d_dc = 100.0;    ///< decorrelation distance (m)

  /// Throws Error(kInvalidConfig) describing the first violated invariant.
  void validate() const;

  int nx() const;  ///< meta-atoms along x
  int ny() const { return N / nx(); }
  double layer_spacing() const { return T_sim / M; }
  double pilot_power(int k) const;
  int tau_u() const { return tau_c - tau_p; }
};

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline constexpr int kUnassignedPilot = -1;

/// One network realization. Large-scale matrices are L x K.
struct Drop {
  std::vector<Point2> ap_pos;
  std::vector<Point2> ue_pos;

  RMatrix dx;        ///< wrapped planar displacement AP -> UE, x component
  RMatrix dy;        ///< wrapped planar displacement AP -> UE, y component
  RMatrix distance;  ///< 3-D distance including the AP/UE height difference

  RMatrix F;  ///< shadow fading (dB)
  RMatrix beta;
  RMatrix kappa;
  RMatrix beta_los;
  RMatrix beta_nlos;

  std::vector<int> pilot_of;
  RVector p;  ///< data powers (W)

  int num_aps() const { return static_cast<int>(ap_pos.size()); }
  int num_ues() const { return static_cast<int>(ue_pos.size()); }
  bool pilots_assigned() const;
};

/// Shortest displacement from a to b on a torus of the given side.
Point2 torus_displacement(const Point2& a, const Point2& b, double side);

double torus_distance(const Point2& a, const Point2& b, double side);

/// COST-321 Walfish-Ikegami pathloss plus shadowing, in dB.
double pathloss_db(double distance_m, double shadowing_db = 0.0);

/// Distance-dependent Rician factor (linear).
double rician_kappa(double distance_m);

struct RicianSplit {
  RMatrix los;
  RMatrix nlos;
};

RicianSplit rician_split(const RMatrix& beta, const RMatrix& kappa);

/// Matrix of exponentially decaying correlations 2^(-d / d_dc) between
/// planar positions (plain Euclidean distance inside the square).
RMatrix shadowing_correlation(const std::vector<Point2>& pos, double d_dc);

/// Symmetric square root of a correlation matrix via eigendecomposition.
/// Negative eigenvalues above -tol * max_eig are clipped to zero; larger
/// violations throw Error(kNotPsd).
RMatrix psd_sqrt(const RMatrix& corr, double tol = 1e-9);

/// Shadow fading F (L x K, dB) with AP and UE components drawn jointly
/// Gaussian with covariance 2^(-d / d_dc) * delta_sf^2.
RMatrix correlated_shadowing(const SystemConfig& cfg, const std::vector<Point2>& ap_pos,
                             const std::vector<Point2>& ue_pos, std::uint64_t seed);

/// Large-scale quantities for the given positions and shadowing.
Drop make_drop(const SystemConfig& cfg, std::vector<Point2> ap_pos, std::vector<Point2> ue_pos,
               const RMatrix& F);

/// Uniform placement, correlated shadowing, pathloss and Rician split.
/// Pilots are left unassigned and every UE gets p_max.
Drop generate_drop(const SystemConfig& cfg, std::uint64_t seed);

}  // namespace simcf
