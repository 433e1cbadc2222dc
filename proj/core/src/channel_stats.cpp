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

#include "simcf/channel_stats.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

namespace simcf {

double sinc(double x) {
  if (x == 0.0) return 1.0;
  const double px = kPi * x;
  return std::sin(px) / px;
}

SpatialCorrelation sinc_correlation(const SimGeometry& geom, double wavelength) {
  const auto pos = geom.grid_offsets();
  const auto N = static_cast<Eigen::Index>(pos.size());
  SpatialCorrelation sc;
  sc.R.resize(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j < N; ++j) {
      const double d = std::hypot(pos[i].x - pos[j].x, pos[i].y - pos[j].y);
      sc.R(i, j) = sinc(2.0 * d / wavelength);
    }
  }

  Eigen::SelfAdjointEigenSolver<RMatrix> es(sc.R);
  RVector ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < N; ++i) {
    if (ev(i) < 0.0) {
      if (ev(i) < -1e-10 * N) {
        throw Error(ErrorCode::kNotPsd, "sinc correlation has a significantly negative eigenvalue");
      }
      sc.clipped_mass += -ev(i);
      ev(i) = 0.0;
    }
  }
  if (sc.clipped_mass > 0.0) {
    spdlog::debug("sinc_correlation: clipped {:.3e} of negative eigenvalue mass (N = {})",
                  sc.clipped_mass, N);
  }
  sc.sqrt_R = es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  return sc;
}

CVector los_vector(const SimGeometry& geom, double dir_x, double dir_y, double dir_z,
                   double beta_los, double wavelength) {
  const double norm = std::sqrt(dir_x * dir_x + dir_y * dir_y + dir_z * dir_z);
  if (!(norm > 0.0)) throw Error(ErrorCode::kInvalidArgument, "los_vector: zero direction");
  const double ux = dir_x / norm;
  const double uy = dir_y / norm;
  const double uz = dir_z / norm;
  const auto off = geom.grid_offsets();
  CVector h(static_cast<Eigen::Index>(off.size()));
  const double amp = std::sqrt(beta_los);
  for (std::size_t n = 0; n < off.size(); ++n) {
    // Far field: the atom at offset p is closer to the UE by u . p.
    const double range_diff = -(ux * off[n].x + uy * off[n].y + uz * off[n].z);
    h(static_cast<Eigen::Index>(n)) = std::polar(amp, kTwoPi * range_diff / wavelength);
  }
  return h;
}

EffectiveChannelStats effective_stats(const DiffractionSet& ds, const CMatrix& G,
                                      const SimUeChannelStats& sim_ue) {
  if (G.rows() != ds.num_atoms() || G.cols() != ds.num_atoms()) {
    throw Error(ErrorCode::kShapeMismatch, "effective_stats: G must be N x N");
  }
  return effective_stats(CMatrix(G * ds.W1), sim_ue);
}

EffectiveChannelStats effective_stats(const CMatrix& T, const SimUeChannelStats& sim_ue) {
  if (T.rows() != sim_ue.h_bar_sim.size() || T.rows() != sim_ue.corr->R.rows()) {
    throw Error(ErrorCode::kShapeMismatch, "effective_stats: T rows must match N");
  }
  EffectiveChannelStats out;
  out.h_bar = T.adjoint() * sim_ue.h_bar_sim;
  out.R = sim_ue.beta_nlos * sandwich(T, sim_ue.corr->R);
  return out;
}

EffectiveChannelStats effective_stats(const CMatrix& T, const CMatrix& TRT, const SimUeChannelStats& sim_ue) {
  if (T.rows() != sim_ue.h_bar_sim.size() || TRT.rows() != T.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "effective_stats: inconsistent T and T^H R T");
  }
  EffectiveChannelStats out;
  out.h_bar = T.adjoint() * sim_ue.h_bar_sim;
  out.R = sim_ue.beta_nlos * TRT;
  return out;
}

CMatrix sandwich(const CMatrix& T, const RMatrix& R) {
  // R is real: multiply real and imaginary parts separately.
  CMatrix RT(R.rows(), T.cols());
  RT.real() = R * T.real();
  RT.imag() = R * T.imag();
  CMatrix S = T.adjoint() * RT;
  return 0.5 * (S + S.adjoint());
}

ChannelDraw sample_channel(const SimUeChannelStats& stats, Rng& rng) {
  const auto N = stats.h_bar_sim.size();
  std::uniform_real_distribution<double> uphase(-kPi, kPi);
  ChannelDraw d;
  d.phase = uphase(rng);
  RVector zr(N), zi(N);
  for (Eigen::Index i = 0; i < N; ++i) {
    const cdouble z = complex_normal(rng);
    zr(i) = z.real();
    zi(i) = z.imag();
  }
  const double s = std::sqrt(stats.beta_nlos);
  d.h = stats.h_bar_sim * std::polar(1.0, d.phase);
  d.h.real() += s * (stats.corr->sqrt_R * zr);
  d.h.imag() += s * (stats.corr->sqrt_R * zi);
  return d;
}

}  // namespace simcf
