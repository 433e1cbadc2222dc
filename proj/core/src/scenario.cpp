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

#include "simcf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>


namespace simcf {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::kInvalidConfig, what);
}

}  // namespace

void SystemConfig::validate() const {
  require(L >= 1 && K >= 1 && U >= 1 && M >= 1 && N >= 1, "L, K, U, M, N must all be >= 1");
  require(tau_p >= 1, "tau_p must be >= 1");
  require(tau_p <= tau_c, "tau_p must not exceed tau_c");
  if (grid_nx > 0) {
    require(N % grid_nx == 0, "grid_nx must divide N");
  } else {
    const int side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(N))));
    require(side * side == N, "N must be a perfect square (Nx = Ny) unless grid_nx is set");
  }
  require(sigma2 >= 0.0 && p_max >= 0.0, "powers must be non-negative");
  require(p_hat.empty() || static_cast<int>(p_hat.size()) == K, "p_hat must be empty or have K entries");
  for (double v : p_hat) require(v >= 0.0, "pilot powers must be non-negative");
  require(wavelength > 0.0, "wavelength must be positive");
  require(d_meta > 0.0, "d_meta must be positive");
  require(atom_size >= 0.0, "atom_size must be non-negative");
  require(T_sim > 0.0, "T_sim must be positive");
  require(area_side > 0.0, "area_side must be positive");
  require(delta_f >= 0.0 && delta_f <= 1.0, "delta_f must lie in [0, 1]");
  require(delta_sf >= 0.0, "delta_sf must be non-negative");
  require(d_dc > 0.0, "d_dc must be positive");
}

int SystemConfig::nx() const {
  if (grid_nx > 0) return grid_nx;
  return static_cast<int>(std::lround(std::sqrt(static_cast<double>(N))));
}

double SystemConfig::pilot_power(int k) const {
  return p_hat.empty() ? p_max : p_hat.at(static_cast<std::size_t>(k));
}

bool Drop::pilots_assigned() const {
  return !pilot_of.empty() &&
         std::none_of(pilot_of.begin(), pilot_of.end(), [](int t) { return t < 0; });
}

Point2 torus_displacement(const Point2& a, const Point2& b, double side) {
  // The 9 translated copies separate per axis; wrapping each axis on its own
  // keeps d(a, b) = -d(b, a) exactly.
  const auto wrap = [side](double d) {
    double best = d;
    for (double c : {d - side, d + side}) {
      if (std::abs(c) < std::abs(best)) best = c;
    }
    return best;
  };
  return {wrap(b.x - a.x), wrap(b.y - a.y)};
}

double torus_distance(const Point2& a, const Point2& b, double side) {
  const Point2 d = torus_displacement(a, b, side);
  return std::hypot(d.x, d.y);
}

double pathloss_db(double distance_m, double shadowing_db) {
  return -30.18 - 26.0 * std::log10(distance_m) + shadowing_db;
}

double rician_kappa(double distance_m) { return std::pow(10.0, 1.3 - 0.003 * distance_m); }

RicianSplit rician_split(const RMatrix& beta, const RMatrix& kappa) {
  if (beta.rows() != kappa.rows() || beta.cols() != kappa.cols()) {
    throw Error(ErrorCode::kShapeMismatch, "rician_split: beta and kappa shapes differ");
  }
  RicianSplit out{RMatrix(beta.rows(), beta.cols()), RMatrix(beta.rows(), beta.cols())};
  for (Eigen::Index i = 0; i < beta.size(); ++i) {
    const double k = kappa(i);
    out.los(i) = k / (k + 1.0) * beta(i);
    out.nlos(i) = beta(i) / (k + 1.0);
  }
  return out;
}

RMatrix shadowing_correlation(const std::vector<Point2>& pos, double d_dc) {
  const auto n = static_cast<Eigen::Index>(pos.size());
  RMatrix c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double d = std::hypot(pos[i].x - pos[j].x, pos[i].y - pos[j].y);
      c(i, j) = std::pow(2.0, -d / d_dc);
    }
  }
  return c;
}

RMatrix psd_sqrt(const RMatrix& corr, double tol) {
  Eigen::SelfAdjointEigenSolver<RMatrix> es(corr);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::kNumerical, "psd_sqrt: eigendecomposition failed");
  }
  RVector ev = es.eigenvalues();
  const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1.0);
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < 0.0) {
      if (ev(i) < -tol * scale) {
        std::ostringstream os;
        os << "correlation matrix is not PSD: eigenvalue " << ev(i) << " (max |eig| " << scale << ")";
        throw Error(ErrorCode::kNotPsd, os.str());
      }
      ev(i) = 0.0;
    }
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

RMatrix correlated_shadowing(const SystemConfig& cfg, const std::vector<Point2>& ap_pos,
                             const std::vector<Point2>& ue_pos, std::uint64_t seed) {
  const auto L = static_cast<Eigen::Index>(ap_pos.size());
  const auto K = static_cast<Eigen::Index>(ue_pos.size());
  const RMatrix sa = psd_sqrt(shadowing_correlation(ap_pos, cfg.d_dc));
  const RMatrix sb = psd_sqrt(shadowing_correlation(ue_pos, cfg.d_dc));

  Rng rng(seed);
  std::normal_distribution<double> n01(0.0, 1.0);
  RVector wa(L), wb(K);
  for (Eigen::Index i = 0; i < L; ++i) wa(i) = n01(rng);
  for (Eigen::Index i = 0; i < K; ++i) wb(i) = n01(rng);
  const RVector a = cfg.delta_sf * (sa * wa);
  const RVector b = cfg.delta_sf * (sb * wb);

  RMatrix F(L, K);
  const double wf = std::sqrt(cfg.delta_f);
  const double wg = std::sqrt(1.0 - cfg.delta_f);
  for (Eigen::Index l = 0; l < L; ++l) {
    for (Eigen::Index k = 0; k < K; ++k) F(l, k) = wf * a(l) + wg * b(k);
  }
  return F;
}

Drop make_drop(const SystemConfig& cfg, std::vector<Point2> ap_pos, std::vector<Point2> ue_pos,
               const RMatrix& F) {
  const auto L = static_cast<Eigen::Index>(ap_pos.size());
  const auto K = static_cast<Eigen::Index>(ue_pos.size());
  if (F.rows() != L || F.cols() != K) {
    throw Error(ErrorCode::kShapeMismatch, "make_drop: shadowing matrix must be L x K");
  }
  Drop d;
  d.ap_pos = std::move(ap_pos);
  d.ue_pos = std::move(ue_pos);
  d.dx.resize(L, K);
  d.dy.resize(L, K);
  d.distance.resize(L, K);
  d.beta.resize(L, K);
  d.kappa.resize(L, K);
  d.F = F;
  const double dh = cfg.h_ap - cfg.h_ue;
  for (Eigen::Index l = 0; l < L; ++l) {
    for (Eigen::Index k = 0; k < K; ++k) {
      const Point2 disp = torus_displacement(d.ap_pos[l], d.ue_pos[k], cfg.area_side);
      d.dx(l, k) = disp.x;
      d.dy(l, k) = disp.y;
      const double dist = std::sqrt(disp.x * disp.x + disp.y * disp.y + dh * dh);
      d.distance(l, k) = dist;
      d.beta(l, k) = std::pow(10.0, pathloss_db(dist, F(l, k)) / 10.0);
      d.kappa(l, k) = rician_kappa(dist);
    }
  }
  auto split = rician_split(d.beta, d.kappa);
  d.beta_los = std::move(split.los);
  d.beta_nlos = std::move(split.nlos);
  d.pilot_of.assign(static_cast<std::size_t>(K), kUnassignedPilot);
  d.p = RVector::Constant(K, cfg.p_max);
  return d;
}

Drop generate_drop(const SystemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng = make_rng(seed, Stream::kDrop);
  std::uniform_real_distribution<double> u(0.0, cfg.area_side);
  std::vector<Point2> ap(static_cast<std::size_t>(cfg.L));
  std::vector<Point2> ue(static_cast<std::size_t>(cfg.K));
  for (auto& p : ap) {
    p.x = u(rng);
    p.y = u(rng);
  }
  for (auto& p : ue) {
    p.x = u(rng);
    p.y = u(rng);
  }
  const RMatrix F = correlated_shadowing(cfg, ap, ue, derive_seed(seed, Stream::kShadowing));
  return make_drop(cfg, std::move(ap), std::move(ue), F);
}

}  // namespace simcf
