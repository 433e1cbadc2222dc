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
#include <string>
#include <vector>

#include "simcf/channel_stats.hpp"
#include "simcf/common.hpp"
#include "simcf/estimation.hpp"

namespace simcf {

struct LinkStats {
  EffectiveChannelStats eff;
  EstimationStats est;
};

/// L x K grid of link statistics for one phase configuration.
class LinkGrid {
 public:
  LinkGrid() = default;
  LinkGrid(int L, int K) : L_(L), K_(K), links_(static_cast<std::size_t>(L) * K) {}

  int L() const { return L_; }
  int K() const { return K_; }
  LinkStats& at(int l, int k) { return links_[static_cast<std::size_t>(l) * K_ + k]; }
  const LinkStats& at(int l, int k) const { return links_[static_cast<std::size_t>(l) * K_ + k]; }
  std::span<LinkStats> ap(int l) {
    return std::span<LinkStats>(links_).subspan(static_cast<std::size_t>(l) * K_, K_);
  }
  std::span<const LinkStats> ap(int l) const {
    return std::span<const LinkStats>(links_).subspan(static_cast<std::size_t>(l) * K_, K_);
  }

 private:
  int L_ = 0, K_ = 0;
  std::vector<LinkStats> links_;
};

/// Pilot bookkeeping shared by the estimator and the SINR expressions.
struct PilotContext {
  std::vector<int> pilot_of;
  RVector p_hat;
  int tau_p = 1;
  double sigma2 = 0.0;

  int K() const { return static_cast<int>(pilot_of.size()); }
  bool shares_pilot(int k, int j) const { return pilot_of[k] == pilot_of[j]; }
  /// P_k \ {k}
  std::vector<int> copilots(int k) const;
  void validate() const;
};

/// Estimation statistics of every link at AP l (K entries in `links`,
/// `eff` already filled). Psi is formed once per pilot.
void fill_estimation(std::span<LinkStats> links, const PilotContext& pc);

/// Closed-form expectation terms contributed by one AP. Indices (k, j)
/// are (intended UE, interfering UE).
struct ApTerms {
  RVector z;       ///< p_hat_k tau_p tr(Omega_k) + ||h_bar_k||^2
  RVector lambda;  ///< ||h_bar_k||^2
  RMatrix xi;      ///< non-coherent interference xi_{kj}
  CMatrix delta;   ///< tr(R_j Psi_k^-1 R_k)
};

ApTerms ap_terms(std::span<const LinkStats> links, const PilotContext& pc);

/// All closed-form terms of one network, stored per AP so a single AP can
/// be replaced without touching the others.
struct ClosedFormTerms {
  PilotContext pilots;
  std::vector<ApTerms> ap;

  int L() const { return static_cast<int>(ap.size()); }
  int K() const { return pilots.K(); }

  RVector z(int k) const;
  RVector lambda(int k) const;
  RVector xi(int k, int j) const;
  CVector delta(int k, int j) const;
  RMatrix gamma(int k) const { return z(k).asDiagonal(); }
};

ClosedFormTerms closed_form_terms(const LinkGrid& links, const PilotContext& pc);

/// Denominator matrix D_k of the generalized Rayleigh quotient
/// gamma_k = p_k |a^H z_k|^2 / (a^H D_k a):
///   sum_j p_j Xi_kj + sum_{j in P_k \ k} p_j p_hat_k p_hat_j tau_p^2 Delta Delta^H
///   - p_k diag(Lambda_k)^2 + sigma2 Gamma_k.
/// The LoS self term enters only on the diagonal; the l != l' products of
/// the desired-signal mean cancel against the numerator.
CMatrix denominator_matrix(const ClosedFormTerms& t, int k, const RVector& p);

enum class Decoder { kLsfd, kEgcd };

const char* to_string(Decoder d);
Decoder decoder_from_string(const std::string& s);

/// a_k = D_k^-1 z_k. Falls back to a pseudo-inverse (logged) if D_k is
/// numerically singular.
CVector lsfd_weights(const ClosedFormTerms& t, int k, const RVector& p);

CVector egcd_weights(int L);

struct SinrBreakdown {
  double signal = 0.0;        ///< p_k |a^H z|^2
  double noncoherent = 0.0;   ///< sum_j p_j a^H Xi_kj a
  double coherent = 0.0;      ///< pilot-contamination term
  double los_self = 0.0;      ///< p_k sum_l |a_l|^2 Lambda_l^2 (subtracted)
  double noise = 0.0;         ///< sigma2 a^H Gamma a
  double denominator() const { return noncoherent + coherent - los_self + noise; }
  double sinr() const;
};

/// Evaluates the bilinear closed form for arbitrary weights. Throws
/// Error(kInternal) with a term dump if the denominator is not positive.
SinrBreakdown sinr_closed_form(const ClosedFormTerms& t, int k, const CVector& a, const RVector& p);

/// p_k z_k^H D_k^-1 z_k, the SINR reached by LSFD weights.
double sinr_lsfd_quadratic(const ClosedFormTerms& t, int k, const RVector& p);

double se_from_sinr(double sinr, int tau_c, int tau_p);

struct UeResult {
  int k = 0;
  double sinr = 0.0;
  double se = 0.0;
  SinrBreakdown terms;
  CVector a;
};

struct SEReport {
  Decoder decoder = Decoder::kLsfd;
  std::vector<UeResult> ue;

  double sum_se() const;
  double min_se() const;
  double mean_se() const { return ue.empty() ? 0.0 : sum_se() / static_cast<double>(ue.size()); }
};

SEReport evaluate_se(const ClosedFormTerms& t, const RVector& p, Decoder decoder, int tau_c);

/// Sum SE under the given decoder without building the full report.
double sum_se(const ClosedFormTerms& t, const RVector& p, Decoder decoder, int tau_c);

/// One CSV row per UE: scenario_id,decoder,k,sinr,se,signal,noncoherent,coherent,los_self,noise
std::string se_report_csv_header();
std::string se_report_csv_rows(const SEReport& r, const std::string& scenario_id);

// ---------------------------------------------------------------------------
// Individual expectations behind the closed form.

/// The six (AP pair, UE pair) configurations of
/// E{ (h_hat_lk^H h_lj)^* (h_hat_l'k^H h_l'j) }.
enum class MomentCase {
  kCrossApNonCopilot,   ///< l != l', j not in P_k  -> 0
  kCrossApCopilot,      ///< l != l', j in P_k \ k
  kCrossApSelf,         ///< l != l', j = k
  kSameApSelf,          ///< l = l', j = k
  kSameApNonCopilot,    ///< l = l', j not in P_k
  kSameApCopilot,       ///< l = l', j in P_k \ k
};

const char* to_string(MomentCase c);

MomentCase classify_moment(int l, int lp, int k, int j, const PilotContext& pc);

/// Closed-form E{ (h_hat_lk^H h_lj)^* (h_hat_l'k^H h_l'j) }.
cdouble expected_cross_moment(const LinkGrid& links, const PilotContext& pc, int l, int lp, int k, int j);

/// E{ h_hat_lk^H h_lk } = z_lk.
double expected_signal(const LinkGrid& links, const PilotContext& pc, int l, int k);

/// E{ ||h_hat_lk||^2 }.
double expected_estimate_power(const LinkGrid& links, const PilotContext& pc, int l, int k);

}  // namespace simcf
