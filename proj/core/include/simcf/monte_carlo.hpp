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
#include <span>
#include <vector>

#include "simcf/se_engine.hpp"

namespace simcf {

/// Everything the Monte-Carlo oracle needs: SIM-level channel statistics
/// (sampled in the N-dimensional meta-atom domain), the per-AP products
/// G_l W1 that map them to the antennas, and the estimator of each link.
struct MonteCarloModel {
  int L = 0;
  int K = 0;
  std::span<const SimUeChannelStats> sim;  ///< (l, k) at l * K + k
  std::span<const CMatrix> T;              ///< G_l W1, one per AP
  const LinkGrid* links = nullptr;
  const PilotContext* pilots = nullptr;
};

/// One coherence block: X[l](k, j) = h_hat_lk^H h_lj and the estimate
/// energies ||h_hat_lk||^2.
struct TrialSample {
  std::vector<CMatrix> X;
  RMatrix estimate_power;  ///< L x K
};

/// Draws channels, LoS phases, despread pilot noise (shared by co-pilot
/// UEs at each AP) and forms the MMSE estimates of every link.
void sample_trial(const MonteCarloModel& model, Rng& rng, TrialSample& out);

struct UatfEstimate {
  RVector sinr;
  RVector std_error;  ///< delta-method standard error of sinr
  int n_trials = 0;
};

/// Plug-in estimate of the use-and-then-forget SINR of every UE with the
/// given LSFD weights (one L-vector per UE) and data powers. Trial t uses
/// the generator derive_seed(seed, kMonteCarlo, t), so results do not
/// depend on the thread count.
UatfEstimate uatf_monte_carlo(const MonteCarloModel& model, std::span<const CVector> weights,
                              const RVector& p, int n_trials, std::uint64_t seed, int threads = 1);

/// Number of uatf_monte_carlo calls in this process.
std::uint64_t monte_carlo_invocations();

}  // namespace simcf
