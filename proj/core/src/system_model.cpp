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

#include "simcf/system_model.hpp"

#include <algorithm>
#include <string>

namespace simcf {

SimUeChannelStats sim_link_stats(const SystemConfig& cfg, const SimGeometry& geom, const Drop& drop,
                                 std::shared_ptr<const SpatialCorrelation> corr, int l, int k) {
  SimUeChannelStats s;
  s.h_bar_sim = los_vector(geom, drop.dx(l, k), drop.dy(l, k), cfg.h_ap - cfg.h_ue,
                           drop.beta_los(l, k), cfg.wavelength);
  s.beta_nlos = drop.beta_nlos(l, k);
  s.corr = std::move(corr);
  return s;
}

SystemModel::SystemModel(const SystemConfig& cfg, Drop drop, PhaseTensor phases,
                         std::shared_ptr<const DiffractionSet> ds)
    : cfg_(cfg), drop_(std::move(drop)), phases_(std::move(phases)), geom_(SimGeometry::from_config(cfg)) {
  cfg_.validate();
  if (drop_.num_aps() != cfg_.L || drop_.num_ues() != cfg_.K) {
    throw Error(ErrorCode::kShapeMismatch, "SystemModel: drop does not match L x K");
  }
  if (phases_.L() != cfg_.L || phases_.M() != cfg_.M || phases_.N() != cfg_.N) {
    throw Error(ErrorCode::kShapeMismatch, "SystemModel: phase tensor does not match L x M x N");
  }
  ds_ = ds ? std::move(ds) : global_diffraction_cache().get(geom_, cfg_.wavelength);
  if (ds_->num_atoms() != cfg_.N || ds_->num_layers() != cfg_.M || ds_->num_antennas() != cfg_.U) {
    throw Error(ErrorCode::kShapeMismatch, "SystemModel: diffraction set does not match config");
  }
  corr_ = std::make_shared<const SpatialCorrelation>(sinc_correlation(geom_, cfg_.wavelength));

  sim_.reserve(static_cast<std::size_t>(cfg_.L) * cfg_.K);
  for (int l = 0; l < cfg_.L; ++l) {
    for (int k = 0; k < cfg_.K; ++k) sim_.push_back(sim_link_stats(cfg_, geom_, drop_, corr_, l, k));
  }

  pilots_.p_hat.resize(cfg_.K);
  for (int k = 0; k < cfg_.K; ++k) pilots_.p_hat(k) = cfg_.pilot_power(k);
  pilots_.tau_p = cfg_.tau_p;
  pilots_.sigma2 = cfg_.sigma2;
  pilots_.pilot_of = drop_.pilot_of;

  T_.resize(static_cast<std::size_t>(cfg_.L));
  partials_.resize(static_cast<std::size_t>(cfg_.L));
  links_ = LinkGrid(cfg_.L, cfg_.K);
  for (int l = 0; l < cfg_.L; ++l) rebuild_ap(l);
  rebuild_terms();
}

const ClosedFormTerms& SystemModel::terms() const {
  if (!has_terms_) throw Error(ErrorCode::kInvalidArgument, "SystemModel: pilots not assigned");
  return terms_;
}

void SystemModel::fill_links(int l, const CMatrix& T, std::span<LinkStats> links) const {
  const CMatrix TRT = sandwich(T, corr_->R);
  for (int k = 0; k < cfg_.K; ++k) links[k].eff = effective_stats(T, TRT, sim_stats(l, k));
}

void SystemModel::rebuild_ap(int l) {
  cascade_partials(*ds_, phases_.ap(l), 1, partials_[l]);
  T_[l] = partials_[l].back();
  fill_links(l, T_[l], links_.ap(l));
}

void SystemModel::rebuild_terms() {
  has_terms_ = drop_.pilots_assigned();
  if (!has_terms_) return;
  pilots_.pilot_of = drop_.pilot_of;
  pilots_.validate();
  for (int l = 0; l < cfg_.L; ++l) fill_estimation(links_.ap(l), pilots_);
  terms_ = closed_form_terms(links_, pilots_);
}

void SystemModel::set_pilots(const std::vector<int>& pilot_of) {
  if (static_cast<int>(pilot_of.size()) != cfg_.K) {
    throw Error(ErrorCode::kShapeMismatch, "set_pilots: one pilot per UE expected");
  }
  drop_.pilot_of = pilot_of;
  rebuild_terms();
}

void SystemModel::set_powers(const RVector& p) {
  if (p.size() != cfg_.K) throw Error(ErrorCode::kShapeMismatch, "set_powers: K powers expected");
  for (int k = 0; k < cfg_.K; ++k) {
    if (!(p(k) >= 0.0) || p(k) > cfg_.p_max * (1.0 + 1e-12)) {
      throw Error(ErrorCode::kInvalidArgument, "set_powers: power outside [0, p_max]");
    }
  }
  drop_.p = p;
}

void SystemModel::set_phases(const PhaseTensor& phases) {
  if (phases.L() != cfg_.L || phases.M() != cfg_.M || phases.N() != cfg_.N) {
    throw Error(ErrorCode::kShapeMismatch, "set_phases: shape mismatch");
  }
  phases_ = phases;
  for (int l = 0; l < cfg_.L; ++l) rebuild_ap(l);
  rebuild_terms();
}

void SystemModel::set_ap_phases(int l, std::span<const double> phases_l) {
  commit(propose(l, phases_l));
}

SystemModel::ApCandidate SystemModel::propose(int l, std::span<const double> phases_l) const {
  if (l < 0 || l >= cfg_.L) throw Error(ErrorCode::kInvalidArgument, "propose: AP index out of range");
  if (static_cast<int>(phases_l.size()) != cfg_.M * cfg_.N) {
    throw Error(ErrorCode::kShapeMismatch, "propose: expected M * N phases");
  }
  ApCandidate c;
  c.l = l;
  c.phases.assign(phases_l.begin(), phases_l.end());
  for (double& v : c.phases) v = wrap_phase(v);
  const auto current = phases_.ap(l);
  const auto diff = std::mismatch(c.phases.begin(), c.phases.end(), current.begin());
  const int first_layer = static_cast<int>(diff.first - c.phases.begin()) / cfg_.N + 1;
  if (first_layer > cfg_.M) {
    c.partials = partials_[l];
    c.T = T_[l];
    c.links.assign(links_.ap(l).begin(), links_.ap(l).end());
    if (has_terms_) c.terms = terms_.ap[l];
    return c;
  }
  c.partials = partials_[l];
  cascade_partials(*ds_, c.phases, first_layer, c.partials);
  c.T = c.partials.back();
  c.links.resize(static_cast<std::size_t>(cfg_.K));
  fill_links(l, c.T, c.links);
  if (has_terms_) {
    fill_estimation(c.links, pilots_);
    c.terms = ap_terms(c.links, pilots_);
  }
  return c;
}

double SystemModel::sum_se_with(const ApCandidate& cand, const RVector& p, Decoder decoder) const {
  ClosedFormTerms t = terms();
  t.ap[cand.l] = cand.terms;
  return simcf::sum_se(t, p, decoder, cfg_.tau_c);
}

void SystemModel::commit(ApCandidate&& c) {
  const int l = c.l;
  for (int m = 0; m < cfg_.M; ++m) {
    for (int n = 0; n < cfg_.N; ++n) phases_.set(l, m, n, c.phases[static_cast<std::size_t>(m) * cfg_.N + n]);
  }
  T_[l] = std::move(c.T);
  partials_[l] = std::move(c.partials);
  auto row = links_.ap(l);
  std::move(c.links.begin(), c.links.end(), row.begin());
  if (has_terms_) terms_.ap[l] = std::move(c.terms);
}

SEReport SystemModel::evaluate(Decoder decoder, const RVector& p) const {
  return evaluate_se(terms(), p, decoder, cfg_.tau_c);
}

double SystemModel::sum_se(Decoder decoder, const RVector& p) const {
  return simcf::sum_se(terms(), p, decoder, cfg_.tau_c);
}

MonteCarloModel SystemModel::mc_model() const {
  if (!has_terms_) throw Error(ErrorCode::kInvalidArgument, "mc_model: pilots not assigned");
  MonteCarloModel m;
  m.L = cfg_.L;
  m.K = cfg_.K;
  m.sim = sim_;
  m.T = T_;
  m.links = &links_;
  m.pilots = &pilots_;
  return m;
}

}  // namespace simcf
