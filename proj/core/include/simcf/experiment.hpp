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
#include <string>
#include <vector>

#include "simcf/optimizers.hpp"
#include "simcf/scenario.hpp"
#include "simcf/se_engine.hpp"

namespace simcf {

/// Phase and power handling of one evaluated configuration.
enum class Scheme {
  kRandom,        ///< random phases, full power
  kOptPhase,      ///< optimized phases, full power
  kMaxMin,        ///< random phases, max-min power control
  kOptPhaseMaxMin ///< optimized phases, max-min power control
};

const char* to_string(Scheme s);
Scheme scheme_from_string(const std::string& s);

/// Parameters a sweep can vary. kLBudget sets L and derives
/// N = atom_budget / (L * M) on the most nearly square grid.
enum class SweepVariable { kNone, kL, kK, kU, kM, kN, kDMeta, kLBudget };

const char* to_string(SweepVariable v);
SweepVariable sweep_variable_from_string(const std::string& s);

struct ExperimentSpec {
  std::string name = "experiment";
  SystemConfig config;
  SweepVariable variable = SweepVariable::kNone;
  std::vector<double> values{0.0};
  int n_drops = 20;
  int n_mc_trials = 0;  ///< 0: closed form only
  std::uint64_t seed = 1;
  std::vector<Scheme> schemes{Scheme::kRandom};
  std::vector<Decoder> decoders{Decoder::kLsfd, Decoder::kEgcd};
  BeamformingConfig beamforming;
  MaxMinConfig maxmin;
  UiMetric pilot_metric = UiMetric::kBetaProduct;
  int atom_budget = 0;
  int threads = 1;

  void validate() const;
};

ExperimentSpec experiment_spec_from_json(const std::string& text);
ExperimentSpec load_experiment_spec(const std::string& path);
std::string experiment_spec_to_json(const ExperimentSpec& spec);

/// The configuration of sweep point `value`.
SystemConfig apply_sweep(const ExperimentSpec& spec, double value);

/// Nx of the most nearly square Nx x Ny factorization of N (Nx <= Ny).
int squarest_factor(int N);

struct ResultRow {
  double sweep_value = 0.0;
  int drop = 0;
  int ue = 0;
  Decoder decoder = Decoder::kLsfd;
  Scheme scheme = Scheme::kRandom;
  double sinr = 0.0;
  double se = 0.0;
  double mc_sinr = -1.0;  ///< negative when no Monte-Carlo run was made
  double mc_std_error = -1.0;
};

struct CdfReport {
  std::vector<double> se;   ///< 100 evenly spaced points
  std::vector<double> cdf;  ///< fraction of samples <= se
  double p5 = 0.0;          ///< 95%-likely SE
};

/// Requires at least 20 samples; the 5th percentile interpolates linearly
/// between order statistics at position 0.05 (n - 1).
CdfReport cdf_report(std::vector<double> samples);

struct AggregateResult {
  double sweep_value = 0.0;
  Decoder decoder = Decoder::kLsfd;
  Scheme scheme = Scheme::kRandom;
  double mean_se = 0.0;   ///< per UE, pooled over drops
  double std_error = 0.0;
  double p5_se = 0.0;
  std::vector<double> samples;  ///< sorted
  CdfReport cdf;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;  ///< sorted by (sweep value index, drop, scheme, decoder, ue)
  std::vector<AggregateResult> aggregates;
  int failed_drops = 0;
  std::vector<std::string> failures;

  const AggregateResult& aggregate(double sweep_value, Decoder d, Scheme s) const;
};

/// Everything computed for one drop at one sweep point.
std::vector<ResultRow> run_drop(const ExperimentSpec& spec, const SystemConfig& cfg, double sweep_value,
                                int drop_index);

ExperimentResult run_experiment(const ExperimentSpec& spec);

/// Pools per-UE SE by (sweep value, scheme, decoder). Samples are sorted
/// first, so the result does not depend on row order.
std::vector<AggregateResult> aggregate_rows(const ExperimentSpec& spec, const std::vector<ResultRow>& rows);

std::string rows_csv(const ExperimentResult& r);
std::string aggregates_csv(const ExperimentResult& r);
std::string cdf_csv(const ExperimentResult& r);
/// Writes rows.csv, aggregates.csv and cdf.csv into out_dir.
void write_experiment(const ExperimentResult& r, const std::string& out_dir);

/// Canned specs at desk scale.
ExperimentSpec table1_spec();
ExperimentSpec fig3_spec();

}  // namespace simcf
