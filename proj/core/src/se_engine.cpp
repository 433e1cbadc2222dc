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

#include "simcf/se_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include <spdlog/spdlog.h>

namespace simcf {

std::vector<int> PilotContext::copilots(int k) const {
  std::vector<int> out;
  for (int j = 0; j < K(); ++j) {
    if (j != k && pilot_of[j] == pilot_of[k]) out.push_back(j);
  }
  return out;
}

void PilotContext::validate() const {
  if (static_cast<int>(p_hat.size()) != K()) {
    throw Error(ErrorCode::kShapeMismatch, "pilot context: p_hat must have one entry per UE");
  }
  for (int t : pilot_of) {
    if (t < 0 || t >= tau_p) {
      throw Error(ErrorCode::kInvalidArgument, "pilot context: every UE needs a pilot in [0, tau_p)");
    }
  }
}

void fill_estimation(std::span<LinkStats> links, const PilotContext& pc) {
  const int K = pc.K();
  if (static_cast<int>(links.size()) != K) {
    throw Error(ErrorCode::kShapeMismatch, "fill_estimation: one link per UE expected");
  }
  std::map<int, CMatrix> psi;
  for (int t = 0; t < pc.tau_p; ++t) {
    std::vector<PilotContribution> set;
    for (int j = 0; j < K; ++j) {
      if (pc.pilot_of[j] == t) set.push_back({&links[j].eff.R, pc.p_hat(j)});
    }
    if (!set.empty()) psi.emplace(t, pilot_covariance(set, pc.tau_p, pc.sigma2));
  }
  for (int k = 0; k < K; ++k) {
    links[k].est = estimation_stats(links[k].eff.R, pc.p_hat(k), psi.at(pc.pilot_of[k]), pc.tau_p);
  }
}

ApTerms ap_terms(std::span<const LinkStats> links, const PilotContext& pc) {
  const int K = pc.K();
  ApTerms t;
  t.z.resize(K);
  t.lambda.resize(K);
  t.xi.resize(K, K);
  t.delta.resize(K, K);
  for (int k = 0; k < K; ++k) {
    const auto& lk = links[k];
    const double q = pc.p_hat(k) * pc.tau_p;
    const double hh = lk.eff.h_bar.squaredNorm();
    t.lambda(k) = hh;
    t.z(k) = q * lk.est.Omega.trace().real() + hh;
    const CMatrix PiRk = lk.est.Psi_inv * lk.eff.R;
    for (int j = 0; j < K; ++j) {
      const auto& lj = links[j];
      const double cross = std::norm(lk.eff.h_bar.dot(lj.eff.h_bar));
      t.xi(k, j) = q * (lj.eff.R.cwiseProduct(lk.est.Omega.transpose())).sum().real() +
                   lk.eff.h_bar.dot(lj.eff.R * lk.eff.h_bar).real() +
                   q * lj.eff.h_bar.dot(lk.est.Omega * lj.eff.h_bar).real() + cross;
      // tr(R_j Psi_k^-1 R_k) = sum_{ab} R_j(a,b) (Psi^-1 R_k)(b,a)
      t.delta(k, j) = lj.eff.R.cwiseProduct(PiRk.transpose()).sum();
    }
  }
  return t;
}

RVector ClosedFormTerms::z(int k) const {
  RVector v(L());
  for (int l = 0; l < L(); ++l) v(l) = ap[l].z(k);
  return v;
}

RVector ClosedFormTerms::lambda(int k) const {
  RVector v(L());
  for (int l = 0; l < L(); ++l) v(l) = ap[l].lambda(k);
  return v;
}

RVector ClosedFormTerms::xi(int k, int j) const {
  RVector v(L());
  for (int l = 0; l < L(); ++l) v(l) = ap[l].xi(k, j);
  return v;
}

CVector ClosedFormTerms::delta(int k, int j) const {
  CVector v(L());
  for (int l = 0; l < L(); ++l) v(l) = ap[l].delta(k, j);
  return v;
}

ClosedFormTerms closed_form_terms(const LinkGrid& links, const PilotContext& pc) {
  pc.validate();
  if (links.K() != pc.K()) throw Error(ErrorCode::kShapeMismatch, "closed_form_terms: UE count mismatch");
  ClosedFormTerms t;
  t.pilots = pc;
  t.ap.reserve(static_cast<std::size_t>(links.L()));
  for (int l = 0; l < links.L(); ++l) t.ap.push_back(ap_terms(links.ap(l), pc));
  return t;
}

CMatrix denominator_matrix(const ClosedFormTerms& t, int k, const RVector& p) {
  const int L = t.L();
  const int K = t.K();
  const auto& pc = t.pilots;
  CMatrix D = CMatrix::Zero(L, L);
  for (int l = 0; l < L; ++l) {
    const auto& a = t.ap[l];
    double d = 0.0;
    for (int j = 0; j < K; ++j) d += p(j) * a.xi(k, j);
    d -= p(k) * a.lambda(k) * a.lambda(k);
    d += pc.sigma2 * a.z(k);
    D(l, l) = d;
  }
  for (int j : pc.copilots(k)) {
    const CVector dv = t.delta(k, j);
    D += (p(j) * pc.p_hat(k) * pc.p_hat(j) * pc.tau_p * pc.tau_p) * (dv * dv.adjoint());
  }
  return D;
}

const char* to_string(Decoder d) { return d == Decoder::kLsfd ? "LSFD" : "EGCD"; }

Decoder decoder_from_string(const std::string& s) {
  if (s == "LSFD" || s == "lsfd") return Decoder::kLsfd;
  if (s == "EGCD" || s == "egcd") return Decoder::kEgcd;
  throw Error(ErrorCode::kInvalidArgument, "unknown decoder: " + s);
}

CVector lsfd_weights(const ClosedFormTerms& t, int k, const RVector& p) {
  const CMatrix D = denominator_matrix(t, k, p);
  const CVector z = t.z(k).cast<cdouble>();
  Eigen::LDLT<CMatrix> ldlt(D);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() && ldlt.rcond() > 1e-15) {
    if (ldlt.rcond() < 1e-12) {
      spdlog::debug("lsfd_weights: UE {} denominator condition estimate {:.3e}", k, 1.0 / ldlt.rcond());
    }
    CVector a = ldlt.solve(z);
    if (a.allFinite()) return a;
  }
  spdlog::warn("lsfd_weights: UE {} denominator singular, using pseudo-inverse", k);
  return Eigen::CompleteOrthogonalDecomposition<CMatrix>(D).solve(z);
}

CVector egcd_weights(int L) { return CVector::Ones(L); }

double SinrBreakdown::sinr() const { return signal / denominator(); }

SinrBreakdown sinr_closed_form(const ClosedFormTerms& t, int k, const CVector& a, const RVector& p) {
  const int L = t.L();
  const auto& pc = t.pilots;
  if (a.size() != L) throw Error(ErrorCode::kShapeMismatch, "sinr_closed_form: weight length must be L");
  SinrBreakdown b;
  cdouble az = 0.0;
  for (int l = 0; l < L; ++l) {
    const double w = std::norm(a(l));
    const auto& at = t.ap[l];
    az += std::conj(a(l)) * at.z(k);
    for (int j = 0; j < t.K(); ++j) b.noncoherent += p(j) * w * at.xi(k, j);
    b.los_self += p(k) * w * at.lambda(k) * at.lambda(k);
    b.noise += pc.sigma2 * w * at.z(k);
  }
  b.signal = p(k) * std::norm(az);
  for (int j : pc.copilots(k)) {
    cdouble ad = 0.0;
    for (int l = 0; l < L; ++l) ad += std::conj(a(l)) * t.ap[l].delta(k, j);
    b.coherent += p(j) * pc.p_hat(k) * pc.p_hat(j) * pc.tau_p * pc.tau_p * std::norm(ad);
  }
  const double den = b.denominator();
  if (!(den > 0.0)) {
    std::ostringstream os;
    os << "sinr_closed_form: non-positive denominator for UE " << k << " (noncoherent=" << b.noncoherent
       << " coherent=" << b.coherent << " los_self=" << b.los_self << " noise=" << b.noise << ")";
    throw Error(ErrorCode::kInternal, os.str());
  }
  return b;
}

double sinr_lsfd_quadratic(const ClosedFormTerms& t, int k, const RVector& p) {
  const CMatrix D = denominator_matrix(t, k, p);
  const CVector z = t.z(k).cast<cdouble>();
  Eigen::LDLT<CMatrix> ldlt(D);
  CVector x = ldlt.solve(z);
  if (ldlt.info() != Eigen::Success || !x.allFinite()) {
    x = Eigen::CompleteOrthogonalDecomposition<CMatrix>(D).solve(z);
  }
  return p(k) * z.dot(x).real();
}

double se_from_sinr(double sinr, int tau_c, int tau_p) {
  if (sinr < 0.0) throw Error(ErrorCode::kInvalidArgument, "se_from_sinr: negative SINR");
  return static_cast<double>(tau_c - tau_p) / tau_c * std::log2(1.0 + sinr);
}

double SEReport::sum_se() const {
  double s = 0.0;
  for (const auto& u : ue) s += u.se;
  return s;
}

double SEReport::min_se() const {
  double m = ue.empty() ? 0.0 : ue.front().se;
  for (const auto& u : ue) m = std::min(m, u.se);
  return m;
}

SEReport evaluate_se(const ClosedFormTerms& t, const RVector& p, Decoder decoder, int tau_c) {
  SEReport r;
  r.decoder = decoder;
  for (int k = 0; k < t.K(); ++k) {
    UeResult u;
    u.k = k;
    u.a = decoder == Decoder::kLsfd ? lsfd_weights(t, k, p) : egcd_weights(t.L());
    u.terms = sinr_closed_form(t, k, u.a, p);
    u.sinr = u.terms.sinr();
    u.se = se_from_sinr(u.sinr, tau_c, t.pilots.tau_p);
    r.ue.push_back(std::move(u));
  }
  return r;
}

double sum_se(const ClosedFormTerms& t, const RVector& p, Decoder decoder, int tau_c) {
  double s = 0.0;
  for (int k = 0; k < t.K(); ++k) {
    const CVector a = decoder == Decoder::kLsfd ? lsfd_weights(t, k, p) : egcd_weights(t.L());
    s += se_from_sinr(sinr_closed_form(t, k, a, p).sinr(), tau_c, t.pilots.tau_p);
  }
  return s;
}

std::string se_report_csv_header() {
  return "scenario_id,decoder,k,sinr,se,signal,noncoherent,coherent,los_self,noise\n";
}

std::string se_report_csv_rows(const SEReport& r, const std::string& scenario_id) {
  std::string out;
  char buf[512];
  for (const auto& u : r.ue) {
    std::snprintf(buf, sizeof(buf), "%s,%s,%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                  scenario_id.c_str(), to_string(r.decoder), u.k, u.sinr, u.se, u.terms.signal,
                  u.terms.noncoherent, u.terms.coherent, u.terms.los_self, u.terms.noise);
    out += buf;
  }
  return out;
}

const char* to_string(MomentCase c) {
  switch (c) {
    case MomentCase::kCrossApNonCopilot: return "l!=l', j not in P_k";
    case MomentCase::kCrossApCopilot: return "l!=l', j in P_k\\{k}";
    case MomentCase::kCrossApSelf: return "l!=l', j=k";
    case MomentCase::kSameApSelf: return "l=l', j=k";
    case MomentCase::kSameApNonCopilot: return "l=l', j not in P_k";
    case MomentCase::kSameApCopilot: return "l=l', j in P_k\\{k}";
  }
  return "?";
}

MomentCase classify_moment(int l, int lp, int k, int j, const PilotContext& pc) {
  const bool same_ap = l == lp;
  if (j == k) return same_ap ? MomentCase::kSameApSelf : MomentCase::kCrossApSelf;
  if (pc.shares_pilot(k, j)) return same_ap ? MomentCase::kSameApCopilot : MomentCase::kCrossApCopilot;
  return same_ap ? MomentCase::kSameApNonCopilot : MomentCase::kCrossApNonCopilot;
}

namespace {

cdouble coherent_mean(const LinkGrid& links, const PilotContext& pc, int l, int k, int j) {
  const auto& lk = links.at(l, k);
  const auto& lj = links.at(l, j);
  const cdouble tr = lj.eff.R.cwiseProduct((lk.est.Psi_inv * lk.eff.R).transpose()).sum();
  return std::sqrt(pc.p_hat(k) * pc.p_hat(j)) * static_cast<double>(pc.tau_p) * tr;
}

double xi_single(const LinkGrid& links, const PilotContext& pc, int l, int k, int j) {
  const auto& lk = links.at(l, k);
  const auto& lj = links.at(l, j);
  const double q = pc.p_hat(k) * pc.tau_p;
  return q * (lj.eff.R * lk.est.Omega).trace().real() +
         lk.eff.h_bar.dot(lj.eff.R * lk.eff.h_bar).real() +
         q * lj.eff.h_bar.dot(lk.est.Omega * lj.eff.h_bar).real() +
         std::norm(lk.eff.h_bar.dot(lj.eff.h_bar));
}

}  // namespace

double expected_signal(const LinkGrid& links, const PilotContext& pc, int l, int k) {
  const auto& lk = links.at(l, k);
  return pc.p_hat(k) * pc.tau_p * lk.est.Omega.trace().real() + lk.eff.h_bar.squaredNorm();
}

double expected_estimate_power(const LinkGrid& links, const PilotContext& pc, int l, int k) {
  return expected_signal(links, pc, l, k);
}

cdouble expected_cross_moment(const LinkGrid& links, const PilotContext& pc, int l, int lp, int k, int j) {
  switch (classify_moment(l, lp, k, j, pc)) {
    case MomentCase::kCrossApNonCopilot:
      return 0.0;
    case MomentCase::kCrossApCopilot:
      return std::conj(coherent_mean(links, pc, l, k, j)) * coherent_mean(links, pc, lp, k, j);
    case MomentCase::kCrossApSelf:
      return expected_signal(links, pc, l, k) * expected_signal(links, pc, lp, k);
    case MomentCase::kSameApSelf: {
      const auto& lk = links.at(l, k);
      const double q = pc.p_hat(k) * pc.tau_p;
      const double a = lk.eff.h_bar.squaredNorm();
      const double trq = q * lk.est.Omega.trace().real();
      return a * a + 2.0 * a * trq + trq * trq + q * (lk.est.Omega * lk.eff.R).trace().real() +
             lk.eff.h_bar.dot(lk.eff.R * lk.eff.h_bar).real() +
             q * lk.eff.h_bar.dot(lk.est.Omega * lk.eff.h_bar).real();
    }
    case MomentCase::kSameApNonCopilot:
      return xi_single(links, pc, l, k, j);
    case MomentCase::kSameApCopilot:
      return xi_single(links, pc, l, k, j) + std::norm(coherent_mean(links, pc, l, k, j));
  }
  return 0.0;
}

}  // namespace simcf
