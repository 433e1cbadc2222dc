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

#include "simcf/estimation.hpp"

#include <cmath>

namespace simcf {

CMatrix pilot_covariance(std::span<const PilotContribution> copilots, int tau_p, double sigma2) {
  if (copilots.empty()) throw Error(ErrorCode::kInvalidArgument, "pilot_covariance: empty co-pilot set");
  const auto U = copilots.front().R->rows();
  CMatrix Psi = sigma2 * CMatrix::Identity(U, U);
  for (const auto& c : copilots) {
    if (c.R->rows() != U || c.R->cols() != U) {
      throw Error(ErrorCode::kShapeMismatch, "pilot_covariance: covariance sizes differ");
    }
    Psi += (c.p_hat * tau_p) * (*c.R);
  }
  return Psi;
}

EstimationStats estimation_stats(const CMatrix& R_k, double p_hat_k, const CMatrix& Psi, int tau_p) {
  if (R_k.rows() != Psi.rows() || R_k.cols() != Psi.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "estimation_stats: R and Psi sizes differ");
  }
  const auto U = Psi.rows();
  Eigen::LLT<CMatrix> llt(Psi);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumerical, "estimation_stats: Psi is not positive definite");
  }
  EstimationStats s;
  s.Psi = Psi;
  s.Psi_inv = llt.solve(CMatrix::Identity(U, U));
  s.Psi_inv = 0.5 * (s.Psi_inv + s.Psi_inv.adjoint()).eval();
  const CMatrix RPi = R_k * s.Psi_inv;
  s.Omega = RPi * R_k;
  s.Omega = 0.5 * (s.Omega + s.Omega.adjoint()).eval();
  s.C = R_k - (p_hat_k * tau_p) * s.Omega;
  s.gain = std::sqrt(p_hat_k) * RPi;
  return s;
}

EstimationStats estimation_stats(const CMatrix& R_k, double p_hat_k,
                                 std::span<const PilotContribution> copilots, int tau_p,
                                 double sigma2) {
  return estimation_stats(R_k, p_hat_k, pilot_covariance(copilots, tau_p, sigma2), tau_p);
}

CVector despread_noise(int U, int tau_p, double sigma2, Rng& rng) {
  const double s = std::sqrt(tau_p * sigma2);
  CVector n(U);
  for (int u = 0; u < U; ++u) n(u) = s * complex_normal(rng);
  return n;
}

ChannelEstimate sample_estimate(const EstimationStats& stats, const CVector& h_bar_k, double phase_k,
                                const CVector& y, const CVector& y_bar, const CVector& h_true) {
  ChannelEstimate e;
  e.h_hat = h_bar_k * std::polar(1.0, phase_k) + stats.gain * (y - y_bar);
  e.h_tilde = h_true - e.h_hat;
  return e;
}

}  // namespace simcf
