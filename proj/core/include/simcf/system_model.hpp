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

#include <memory>
#include <span>
#include <vector>

#include "simcf/monte_carlo.hpp"
#include "simcf/scenario.hpp"
#include "simcf/se_engine.hpp"
#include "simcf/sim_physics.hpp"

namespace simcf {

/// One drop together with the SIM state of every AP and all statistics that
/// depend on it. Phase changes are applied per AP so that optimizers only
/// pay for the AP they touch.
class SystemModel {
 public:
  /// Pilots are taken from drop.pilot_of; while any is unassigned only the
  /// effective channel statistics are available.
  SystemModel(const SystemConfig& cfg, Drop drop, PhaseTensor phases,
              std::shared_ptr<const DiffractionSet> ds = nullptr);

  const SystemConfig& config() const { return cfg_; }
  const Drop& drop() const { return drop_; }
  const PhaseTensor& phases() const { return phases_; }
  const SimGeometry& geometry() const { return geom_; }
  const DiffractionSet& diffraction() const { return *ds_; }
  const SpatialCorrelation& correlation() const { return *corr_; }
  const SimUeChannelStats& sim_stats(int l, int k) const {
    return sim_[static_cast<std::size_t>(l) * cfg_.K + k];
  }
  const CMatrix& T(int l) const { return T_[static_cast<std::size_t>(l)]; }
  /// Phi_m W_m ... Phi_1 W_1 for m = 1..M at AP l.
  const std::vector<CMatrix>& partials(int l) const { return partials_[static_cast<std::size_t>(l)]; }
  const LinkGrid& links() const { return links_; }
  const PilotContext& pilots() const { return pilots_; }
  /// Throws Error(kInvalidArgument) if pilots are not assigned.
  const ClosedFormTerms& terms() const;
  bool has_terms() const { return has_terms_; }

  void set_pilots(const std::vector<int>& pilot_of);
  void set_powers(const RVector& p);
  void set_phases(const PhaseTensor& phases);
  void set_ap_phases(int l, std::span<const double> phases_l);

  /// Statistics of AP l under trial phases, not yet committed.
  struct ApCandidate {
    int l = -1;
    std::vector<double> phases;
    std::vector<CMatrix> partials;
    CMatrix T;
    std::vector<LinkStats> links;
    ApTerms terms;
  };
  ApCandidate propose(int l, std::span<const double> phases_l) const;
  /// Sum SE with AP cand.l replaced by the candidate.
  double sum_se_with(const ApCandidate& cand, const RVector& p, Decoder decoder) const;
  void commit(ApCandidate&& cand);

  SEReport evaluate(Decoder decoder) const { return evaluate(decoder, drop_.p); }
  SEReport evaluate(Decoder decoder, const RVector& p) const;
  double sum_se(Decoder decoder, const RVector& p) const;

  MonteCarloModel mc_model() const;

 private:
  void fill_links(int l, const CMatrix& T, std::span<LinkStats> links) const;
  void rebuild_ap(int l);
  void rebuild_terms();

  SystemConfig cfg_;
  Drop drop_;
  PhaseTensor phases_;
  SimGeometry geom_;
  std::shared_ptr<const DiffractionSet> ds_;
  std::shared_ptr<const SpatialCorrelation> corr_;
  std::vector<SimUeChannelStats> sim_;
  std::vector<std::vector<CMatrix>> partials_;
  std::vector<CMatrix> T_;
  LinkGrid links_;
  PilotContext pilots_;
  ClosedFormTerms terms_;
  bool has_terms_ = false;
};

/// SIM-level statistics of link (l, k): LoS array response along the
/// AP -> UE direction (local z axis pointing down toward the ground) and
/// the shared sinc correlation scaled by beta_nlos.
SimUeChannelStats sim_link_stats(const SystemConfig& cfg, const SimGeometry& geom, const Drop& drop,
                                 std::shared_ptr<const SpatialCorrelation> corr, int l, int k);

}  // namespace simcf
