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

#include <span>

#include "simcf/channel_stats.hpp"
#include "simcf/common.hpp"

namespace simcf {

/// Phase-aware MMSE estimation statistics of one (AP, UE) link.
struct EstimationStats {
  CMatrix Psi;      ///< sum_{j in P_k} p_hat_j tau_p R_j + sigma2 I
  CMatrix Psi_inv;
  CMatrix Omega;    ///< R_k Psi^-1 R_k
  CMatrix C;        ///< R_k - p_hat_k tau_p Omega, error covariance
  CMatrix gain;     ///< sqrt(p_hat_k) R_k Psi^-1, applied to y - y_bar
};

struct PilotContribution {
  const CMatrix* R = nullptr;  ///< effective NLoS covariance of a co-pilot UE
  double p_hat = 0.0;
};

/// Psi for one pilot at one AP. The order of `copilots` does not matter.
CMatrix pilot_covariance(std::span<const PilotContribution> copilots, int tau_p, double sigma2);

/// Statistics for the UE with covariance R_k sharing the pilot whose
/// covariance is Psi. Throws Error(kNumerical) if Psi is not positive definite.
EstimationStats estimation_stats(const CMatrix& R_k, double p_hat_k, const CMatrix& Psi, int tau_p);

EstimationStats estimation_stats(const CMatrix& R_k, double p_hat_k,
                                 std::span<const PilotContribution> copilots, int tau_p,
                                 double sigma2);

/// Despread pilot noise n * conj(phi_k): CN(0, tau_p sigma2 I_U).
CVector despread_noise(int U, int tau_p, double sigma2, Rng& rng);

struct ChannelEstimate {
  CVector h_hat;
  CVector h_tilde;
};

/// MMSE estimate of h_k from the despread observation y and its LoS mean
/// y_bar = sum_{j in P_k} sqrt(p_hat_j) tau_p h_bar_j exp(j phase_j).
ChannelEstimate sample_estimate(const EstimationStats& stats, const CVector& h_bar_k, double phase_k,
                                const CVector& y, const CVector& y_bar, const CVector& h_true);

}  // namespace simcf
