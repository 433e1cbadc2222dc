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

#include "simcf/optimizers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include <spdlog/spdlog.h>

namespace simcf {

std::vector<std::vector<int>> PilotAssignment::users_of_pilot() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(tau_p));
  for (int k = 0; k < static_cast<int>(pilot_of.size()); ++k) out[pilot_of[k]].push_back(k);
  return out;
}

std::vector<int> PilotAssignment::copilot_set(int k) const {
  std::vector<int> out;
  for (int j = 0; j < static_cast<int>(pilot_of.size()); ++j) {
    if (pilot_of[j] == pilot_of[k]) out.push_back(j);
  }
  return out;
}

namespace {

double pair_interference(const Drop& drop, int k, int j, UiMetric metric, const LinkGrid* links) {
  double s = 0.0;
  if (metric == UiMetric::kBetaProduct) {
    for (int l = 0; l < drop.num_aps(); ++l) s += drop.beta(l, k) * drop.beta(l, j);
    return s;
  }
  if (links == nullptr) throw Error(ErrorCode::kInvalidArgument, "trace UI metric needs link statistics");
  for (int l = 0; l < drop.num_aps(); ++l) {
    const CMatrix& Rk = links->at(l, k).eff.R;
    const CMatrix& Rj = links->at(l, j).eff.R;
    const double tk = Rk.trace().real();
    const double tj = Rj.trace().real();
    if (tk > 0.0 && tj > 0.0) s += (Rk.cwiseProduct(Rj.transpose())).sum().real() / std::sqrt(tk * tj);
  }
  return s;
}

}  // namespace

double pilot_interference(const Drop& drop, const std::vector<int>& pilot_of, int k, int t, UiMetric metric,
                          const LinkGrid* links) {
  double s = 0.0;
  for (int j = 0; j < static_cast<int>(pilot_of.size()); ++j) {
    if (j != k && pilot_of[j] == t) s += pair_interference(drop, k, j, metric, links);
  }
  return s;
}

PilotAssignment allocate_pilots(const Drop& drop, int tau_p, UiMetric metric, const LinkGrid* links) {
  if (tau_p < 1) throw Error(ErrorCode::kInvalidArgument, "allocate_pilots: tau_p must be >= 1");
  const int K = drop.num_ues();
  PilotAssignment pa;
  pa.tau_p = tau_p;
  pa.pilot_of.assign(static_cast<std::size_t>(K), kUnassignedPilot);
  for (int k = 0; k < std::min(K, tau_p); ++k) pa.pilot_of[k] = k;

  for (int k = tau_p; k < K; ++k) {
    int best = -1;
    double best_ui = 0.0;
    for (int t = 0; t < tau_p; ++t) {
      const double ui = pilot_interference(drop, pa.pilot_of, k, t, metric, links);
      if (best < 0 || ui < best_ui) {
        best = t;
        best_ui = ui;
      }
    }
    pa.pilot_of[k] = best;
  }
  return pa;
}

double max_pilot_interference(const Drop& drop, const std::vector<int>& pilot_of, UiMetric metric,
                              const LinkGrid* links) {
  double m = 0.0;
  for (int k = 0; k < static_cast<int>(pilot_of.size()); ++k) {
    m = std::max(m, pilot_interference(drop, pilot_of, k, pilot_of[k], metric, links));
  }
  return m;
}

void BeamformingConfig::validate() const {
  if (!(step_size > 0.0 && step_size < kTwoPi)) {
    throw Error(ErrorCode::kInvalidConfig, "beamforming: step_size must lie in (0, 2*pi)");
  }
  if (J < 1) throw Error(ErrorCode::kInvalidConfig, "beamforming: J must be >= 1");
  if (!(xi >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "beamforming: xi must be >= 0");
  if (N_selection < 1) throw Error(ErrorCode::kInvalidConfig, "beamforming: N_selection must be >= 1");
  if (sweeps < 1) throw Error(ErrorCode::kInvalidConfig, "beamforming: sweeps must be >= 1");
}

BeamformingResult optimize_beamforming(SystemModel& model, const BeamformingConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int L = model.config().L;
  const int MN = model.config().M * model.config().N;
  const RVector p = model.drop().p;

  BeamformingResult res;
  double best = model.sum_se(cfg.objective, p);
  res.initial_objective = best;
  int iteration = 0;

  const auto try_candidate = [&](int l, const std::vector<double>& phases) {
    SystemModel::ApCandidate cand = model.propose(l, phases);
    const double value = model.sum_se_with(cand, p, cfg.objective);
    const bool accept = value > best + cfg.xi;
    if (accept) {
      best = value;
      model.commit(std::move(cand));
      ++res.accepted;
    }
    res.trace.push_back({iteration++, best, value, accept});
    return accept;
  };

  for (int sweep = 0; sweep < cfg.sweeps; ++sweep) {
    for (int l = 0; l < L; ++l) {
      std::vector<int> order(static_cast<std::size_t>(MN));
      std::iota(order.begin(), order.end(), 0);
      Rng rng = make_rng(seed, Stream::kBeamformingOrder, static_cast<std::uint64_t>(sweep) * L + l);
      std::shuffle(order.begin(), order.end(), rng);

      for (int b = 0; b < MN; b += cfg.N_selection) {
        const int e = std::min(MN, b + cfg.N_selection);
        const auto base_span = model.phases().ap(l);
        const std::vector<double> base(base_span.begin(), base_span.end());
        std::vector<double> cand = base;
        for (int j = 1; j <= cfg.J; ++j) {
          for (int i = b; i < e; ++i) cand[order[i]] = base[order[i]] + j * cfg.step_size;
          if (try_candidate(l, cand)) break;
          if (cfg.symmetric_probe) {
            for (int i = b; i < e; ++i) cand[order[i]] = base[order[i]] - j * cfg.step_size;
            if (try_candidate(l, cand)) break;
          }
        }
      }
    }
  }
  res.phases = model.phases();
  res.final_objective = best;
  return res;
}

std::string trace_csv(const std::vector<TraceEntry>& trace) {
  std::string out = "iteration,objective,candidate,accepted\n";
  char buf[128];
  for (const auto& t : trace) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%d\n", t.iteration, t.objective, t.candidate,
                  t.accepted ? 1 : 0);
    out += buf;
  }
  return out;
}

LinearSinr linear_sinr(const ClosedFormTerms& t, int k, const CVector& a) {
  const int L = t.L();
  const int K = t.K();
  const auto& pc = t.pilots;
  LinearSinr lin;
  lin.c = RVector::Zero(K);
  cdouble az = 0.0;
  for (int l = 0; l < L; ++l) {
    const double w = std::norm(a(l));
    const auto& at = t.ap[l];
    az += std::conj(a(l)) * at.z(k);
    for (int j = 0; j < K; ++j) lin.c(j) += w * at.xi(k, j);
    lin.c(k) -= w * at.lambda(k) * at.lambda(k);
    lin.n += pc.sigma2 * w * at.z(k);
  }
  lin.S = std::norm(az);
  for (int j : pc.copilots(k)) {
    cdouble ad = 0.0;
    for (int l = 0; l < L; ++l) ad += std::conj(a(l)) * t.ap[l].delta(k, j);
    lin.c(j) += pc.p_hat(k) * pc.p_hat(j) * pc.tau_p * pc.tau_p * std::norm(ad);
  }
  return lin;
}

bool maxmin_feasible(const std::vector<LinearSinr>& lin, double t, double p_max, const MaxMinConfig& cfg,
                     RVector& p) {
  const int K = static_cast<int>(lin.size());
  p = RVector::Zero(K);
  if (t <= 0.0) return true;
  RVector req(K);
  for (int it = 0; it < cfg.max_fixed_point_iterations; ++it) {
    for (int k = 0; k < K; ++k) req(k) = t * (lin[k].c.dot(p) + lin[k].n) / lin[k].S;
    if ((req.array() > p_max * (1.0 + cfg.tol)).any()) return false;
    const double change = (req - p).cwiseAbs().maxCoeff();
    p = req;
    if (change <= cfg.tol * std::max(p.maxCoeff(), 1e-300)) return true;
  }
  spdlog::debug("maxmin_feasible: no fixed point within {} iterations at t = {}", cfg.max_fixed_point_iterations,
                t);
  return false;
}

std::vector<CVector> fixed_weights(const ClosedFormTerms& t, Decoder decoder, double p_max) {
  const RVector full = RVector::Constant(t.K(), p_max);
  std::vector<CVector> w;
  for (int k = 0; k < t.K(); ++k) {
    w.push_back(decoder == Decoder::kLsfd ? lsfd_weights(t, k, full) : egcd_weights(t.L()));
  }
  return w;
}

PowerSolution maxmin_power(const ClosedFormTerms& t, const std::vector<CVector>& weights, double p_max,
                           const MaxMinConfig& cfg) {
  const int K = t.K();
  if (static_cast<int>(weights.size()) != K) {
    throw Error(ErrorCode::kShapeMismatch, "maxmin_power: one weight vector per UE expected");
  }
  if (!(cfg.eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "maxmin_power: eps must be > 0");
  std::vector<LinearSinr> lin;
  for (int k = 0; k < K; ++k) lin.push_back(linear_sinr(t, k, weights[k]));
  for (const auto& l : lin) {
    if (!(l.S > 0.0)) throw Error(ErrorCode::kNumerical, "maxmin_power: zero signal coefficient");
  }

  const RVector full = RVector::Constant(K, p_max);
  double gmax = 0.0;
  for (int k = 0; k < K; ++k) gmax = std::max(gmax, lin[k].sinr(k, full));

  PowerSolution sol;
  sol.t_max_initial = cfg.t_max > 0.0 ? cfg.t_max : 2.0 * gmax;
  double lo = 0.0;
  double hi = sol.t_max_initial;
  RVector best = full;
  RVector p;
  if (!maxmin_feasible(lin, 0.0, p_max, cfg, p)) {
    throw Error(ErrorCode::kInternal, "maxmin_power: t = 0 reported infeasible");
  }
  while (hi - lo >= cfg.eps) {
    const double mid = 0.5 * (lo + hi);
    ++sol.iterations;
    if (maxmin_feasible(lin, mid, p_max, cfg, p)) {
      lo = mid;
      best = p;
    } else {
      hi = mid;
    }
  }
  const double peak = best.maxCoeff();
  if (peak > 0.0) best *= p_max / peak;
  sol.p = best.cwiseMin(p_max).cwiseMax(0.0);
  sol.t_lo = lo;
  sol.t_hi = hi;
  sol.t_star = lin[0].sinr(0, sol.p);
  for (int k = 1; k < K; ++k) sol.t_star = std::min(sol.t_star, lin[k].sinr(k, sol.p));
  return sol;
}

}  // namespace simcf
