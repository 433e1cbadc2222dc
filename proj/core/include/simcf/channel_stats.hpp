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

#include <memory>

#include "simcf/common.hpp"
#include "simcf/sim_physics.hpp"

namespace simcf {

/// Isotropic-scattering correlation of the output layer,
/// R(n, n') = sinc(2 d(n, n') / lambda), with its PSD square root.
struct SpatialCorrelation {
  RMatrix R;
  RMatrix sqrt_R;              ///< symmetric square root after eigenvalue clipping
  double clipped_mass = 0.0;   ///< sum of |negative eigenvalues| set to zero
};

/// sin(pi x) / (pi x), with sinc(0) = 1.
double sinc(double x);

SpatialCorrelation sinc_correlation(const SimGeometry& geom, double wavelength);

/// Statistics of the channel between the last SIM layer of one AP and one UE.
struct SimUeChannelStats {
  CVector h_bar_sim;   ///< LoS component, entries of modulus sqrt(beta_los)
  double beta_nlos = 0.0;
  std::shared_ptr<const SpatialCorrelation> corr;

  RMatrix R_sim() const { return beta_nlos * corr->R; }
};

/// Planar-wavefront LoS response of the output layer toward a UE seen in
/// direction (dir_x, dir_y, dir_z) of the SIM frame. Entry n carries the
/// phase 2*pi*(range difference of atom n w.r.t. the grid center)/lambda.
CVector los_vector(const SimGeometry& geom, double dir_x, double dir_y, double dir_z,
                   double beta_los, double wavelength);

/// Statistics of the aggregate U-antenna channel h = W1^H G^H h_sim.
struct EffectiveChannelStats {
  CVector h_bar;  ///< W1^H G^H h_bar_sim
  CMatrix R;      ///< W1^H G^H R_sim G W1
};

EffectiveChannelStats effective_stats(const DiffractionSet& ds, const CMatrix& G,
                                      const SimUeChannelStats& sim_ue);

/// Same as above with the product T = G * W1 already formed.
EffectiveChannelStats effective_stats(const CMatrix& T, const SimUeChannelStats& sim_ue);

/// Hermitian T^H R T for a real symmetric R.
CMatrix sandwich(const CMatrix& T, const RMatrix& R);

/// Same as effective_stats(T, sim_ue) with T^H R T precomputed; the
/// correlation shape is shared by all UEs of an AP.
EffectiveChannelStats effective_stats(const CMatrix& T, const CMatrix& TRT, const SimUeChannelStats& sim_ue);

struct ChannelDraw {
  CVector h;           ///< N-dimensional channel at the output layer
  double phase = 0.0;  ///< common LoS phase of this coherence block
};

/// h = h_bar_sim * exp(j phase) + sqrt(R_sim) z, phase ~ U[-pi, pi).
ChannelDraw sample_channel(const SimUeChannelStats& stats, Rng& rng);

}  // namespace simcf
