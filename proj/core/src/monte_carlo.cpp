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

#include "simcf/monte_carlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

namespace simcf {

void sample_trial(const MonteCarloModel& m, Rng& rng, TrialSample& out) {
  const int L = m.L;
  const int K = m.K;
  const auto& pc = *m.pilots;
  const int U = static_cast<int>(m.T[0].cols());

  std::vector<CVector> h(static_cast<std::size_t>(L) * K);
  std::vector<double> phase(static_cast<std::size_t>(L) * K);
  for (int l = 0; l < L; ++l) {
    for (int k = 0; k < K; ++k) {
      const auto idx = static_cast<std::size_t>(l) * K + k;
      ChannelDraw d = sample_channel(m.sim[idx], rng);
      h[idx] = m.T[l].adjoint() * d.h;
      phase[idx] = d.phase;
    }
  }

  out.X.resize(static_cast<std::size_t>(L));
  out.estimate_power.resize(L, K);
  std::vector<CVector> h_hat(static_cast<std::size_t>(K));
  for (int l = 0; l < L; ++l) {
    std::vector<CVector> noise;
    noise.reserve(static_cast<std::size_t>(pc.tau_p));
    for (int t = 0; t < pc.tau_p; ++t) noise.push_back(despread_noise(U, pc.tau_p, pc.sigma2, rng));

    for (int k = 0; k < K; ++k) {
      CVector y = noise[pc.pilot_of[k]];
      CVector y_bar = CVector::Zero(U);
      for (int j = 0; j < K; ++j) {
        if (!pc.shares_pilot(k, j)) continue;
        const auto idx = static_cast<std::size_t>(l) * K + j;
        const double s = std::sqrt(pc.p_hat(j)) * pc.tau_p;
        y += s * h[idx];
        y_bar += s * m.links->at(l, j).eff.h_bar * std::polar(1.0, phase[idx]);
      }
      const auto idx = static_cast<std::size_t>(l) * K + k;
      const auto& link = m.links->at(l, k);
      h_hat[k] = sample_estimate(link.est, link.eff.h_bar, phase[idx], y, y_bar, h[idx]).h_hat;
      out.estimate_power(l, k) = h_hat[k].squaredNorm();
    }
    CMatrix& X = out.X[l];
    X.resize(K, K);
    for (int k = 0; k < K; ++k) {
      for (int j = 0; j < K; ++j) X(k, j) = h_hat[k].dot(h[static_cast<std::size_t>(l) * K + j]);
    }
  }
}

namespace {

std::atomic<std::uint64_t> g_invocations{0};

constexpr int kStats = 4;  // Re S, Im S, interference energy, noise energy

void run_trials(const MonteCarloModel& m, std::span<const CVector> weights, const RVector& p,
                std::uint64_t seed, int begin, int end, std::vector<double>& samples) {
  const int K = m.K;
  TrialSample ts;
  for (int t = begin; t < end; ++t) {
    Rng rng = make_rng(seed, Stream::kMonteCarlo, static_cast<std::uint64_t>(t));
    sample_trial(m, rng, ts);
    for (int k = 0; k < K; ++k) {
      const CVector& a = weights[k];
      cdouble S = 0.0;
      double interference = 0.0;
      double noise = 0.0;
      for (int j = 0; j < K; ++j) {
        cdouble Y = 0.0;
        for (int l = 0; l < m.L; ++l) Y += std::conj(a(l)) * ts.X[l](k, j);
        interference += p(j) * std::norm(Y);
        if (j == k) S = Y;
      }
      for (int l = 0; l < m.L; ++l) noise += std::norm(a(l)) * ts.estimate_power(l, k);
      double* row = &samples[(static_cast<std::size_t>(t) * K + k) * kStats];
      row[0] = S.real();
      row[1] = S.imag();
      row[2] = interference;
      row[3] = noise;
    }
  }
}

}  // namespace

UatfEstimate uatf_monte_carlo(const MonteCarloModel& m, std::span<const CVector> weights,
                              const RVector& p, int n_trials, std::uint64_t seed, int threads) {
  if (n_trials < 1) throw Error(ErrorCode::kInvalidArgument, "uatf_monte_carlo: n_trials must be >= 1");
  if (static_cast<int>(weights.size()) != m.K) {
    throw Error(ErrorCode::kShapeMismatch, "uatf_monte_carlo: one weight vector per UE expected");
  }
  ++g_invocations;
  const int K = m.K;
  std::vector<double> samples(static_cast<std::size_t>(n_trials) * K * kStats);

  threads = std::clamp(threads, 1, n_trials);
  if (threads == 1) {
    run_trials(m, weights, p, seed, 0, n_trials, samples);
  } else {
    std::vector<std::thread> pool;
    const int chunk = (n_trials + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
      const int b = w * chunk;
      const int e = std::min(n_trials, b + chunk);
      if (b >= e) break;
      pool.emplace_back([&, b, e] { run_trials(m, weights, p, seed, b, e, samples); });
    }
    for (auto& th : pool) th.join();
  }

  const double sigma2 = m.pilots->sigma2;
  UatfEstimate est;
  est.n_trials = n_trials;
  est.sinr.resize(K);
  est.std_error.resize(K);
  for (int k = 0; k < K; ++k) {
    Eigen::Matrix<double, kStats, 1> mean = Eigen::Matrix<double, kStats, 1>::Zero();
    for (int t = 0; t < n_trials; ++t) {
      mean += Eigen::Map<const Eigen::Matrix<double, kStats, 1>>(
          &samples[(static_cast<std::size_t>(t) * K + k) * kStats]);
    }
    mean /= n_trials;
    Eigen::Matrix<double, kStats, kStats> cov = Eigen::Matrix<double, kStats, kStats>::Zero();
    for (int t = 0; t < n_trials; ++t) {
      const Eigen::Matrix<double, kStats, 1> d =
          Eigen::Map<const Eigen::Matrix<double, kStats, 1>>(
              &samples[(static_cast<std::size_t>(t) * K + k) * kStats]) - mean;
      cov += d * d.transpose();
    }
    cov /= std::max(1, n_trials - 1);

    const double A = p(k) * (mean(0) * mean(0) + mean(1) * mean(1));
    const double D = mean(2) - A + sigma2 * mean(3);
    Eigen::Matrix<double, kStats, 1> g;
    g(0) = 2.0 * p(k) * mean(0) * (D + A) / (D * D);
    g(1) = 2.0 * p(k) * mean(1) * (D + A) / (D * D);
    g(2) = -A / (D * D);
    g(3) = -A * sigma2 / (D * D);
    est.sinr(k) = A / D;
    est.std_error(k) = std::sqrt(std::max(0.0, g.dot(cov * g)) / n_trials);
  }
  return est;
}

std::uint64_t monte_carlo_invocations() { return g_invocations.load(); }

}  // namespace simcf
