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

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "simcf/scenario.hpp"
#include "simcf/se_engine.hpp"
#include "simcf/system_model.hpp"

namespace simcf {

// ---------------------------------------------------------------------------
// Pilot allocation

enum class UiMetric {
  kBetaProduct,   ///< sum_j sum_l beta_lk beta_lj
  kTraceOverlap,  ///< sum_j sum_l tr(R_lk R_lj) / sqrt(tr R_lk tr R_lj)
};

struct PilotAssignment {
  std::vector<int> pilot_of;
  int tau_p = 0;
  /// UEs holding pilot t.
  std::vector<std::vector<int>> users_of_pilot() const;
  /// P_k, including k.
  std::vector<int> copilot_set(int k) const;
};

/// Interference that UE k would see on pilot t, counting only UEs already
/// holding t in `pilot_of` (entries equal to kUnassignedPilot are ignored).
/// The trace metric needs the effective statistics in `links`.
double pilot_interference(const Drop& drop, const std::vector<int>& pilot_of, int k, int t,
                          UiMetric metric = UiMetric::kBetaProduct, const LinkGrid* links = nullptr);

/// The first tau_p UEs get pilots 0..tau_p-1. The others, in index order,
/// each take the pilot of least interference given the assignments so far
/// (ties to the lower index). Pilot loads are not balanced.
PilotAssignment allocate_pilots(const Drop& drop, int tau_p, UiMetric metric = UiMetric::kBetaProduct,
                                const LinkGrid* links = nullptr);

/// max_k of the interference each UE sees from its own co-pilot UEs.
double max_pilot_interference(const Drop& drop, const std::vector<int>& pilot_of,
                              UiMetric metric = UiMetric::kBetaProduct, const LinkGrid* links = nullptr);

// ---------------------------------------------------------------------------
// SIM wave-based beamforming

struct BeamformingConfig {
  double step_size = kPi / 8.0;
  int J = 16;
  double xi = 1e-3;  ///< bit/s/Hz; +infinity disables every update
  int N_selection = 4;
  int sweeps = 1;
  bool symmetric_probe = false;  ///< also try -step when +step fails
  Decoder objective = Decoder::kLsfd;

  void validate() const;
};

struct TraceEntry {
  int iteration = 0;
  double objective = 0.0;  ///< best sum SE after this proposal
  double candidate = 0.0;  ///< sum SE of the proposal
  bool accepted = false;
};

struct BeamformingResult {
  PhaseTensor phases;
  std::vector<TraceEntry> trace;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  int accepted = 0;
};

/// Greedy block-coordinate search over the phase tensor. Each AP visits its
/// M*N meta-atoms in a random order (stream kBeamformingOrder, index l) in
/// blocks of N_selection; a block is shifted by j * step_size, j = 1..J,
/// and the first shift raising the sum SE by more than xi is kept. The
/// model is updated in place and ends at the returned phases.
BeamformingResult optimize_beamforming(SystemModel& model, const BeamformingConfig& cfg, std::uint64_t seed);

std::string trace_csv(const std::vector<TraceEntry>& trace);

// ---------------------------------------------------------------------------
// Max-min power control

/// SINR of UE k for fixed weights, written as
/// p_k S / (sum_j c_j p_j + n).
struct LinearSinr {
  double S = 0.0;
  RVector c;
  double n = 0.0;

  double sinr(int k, const RVector& p) const { return p(k) * S / (c.dot(p) + n); }
};

LinearSinr linear_sinr(const ClosedFormTerms& t, int k, const CVector& a);

struct MaxMinConfig {
  double eps = 1e-3;
  double t_max = 0.0;  ///< 0: twice the largest SINR at full power
  double tol = 1e-9;
  int max_fixed_point_iterations = 500;
};

struct PowerSolution {
  RVector p;
  double t_star = 0.0;  ///< min_k SINR at p with the fixed weights
  double t_lo = 0.0;
  double t_hi = 0.0;
  double t_max_initial = 0.0;
  int iterations = 0;
};

/// Feasibility of min_k SINR_k >= t under p <= p_max, by the iteration
/// p <- min(p_max, t (C p + n) / S) from p = 0. Returns the fixed point if
/// it satisfies every constraint.
bool maxmin_feasible(const std::vector<LinearSinr>& lin, double t, double p_max, const MaxMinConfig& cfg,
                     RVector& p);

/// Bisection on t for fixed weights. The returned powers are rescaled so
/// the largest equals p_max, which can only raise every SINR.
PowerSolution maxmin_power(const ClosedFormTerms& t, const std::vector<CVector>& weights, double p_max,
                           const MaxMinConfig& cfg = {});

/// Weights used by maxmin_power: LSFD at full power or all ones.
std::vector<CVector> fixed_weights(const ClosedFormTerms& t, Decoder decoder, double p_max);

}  // namespace simcf
