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

#include <cmath>
#include <complex>

#include "simcf/common.hpp"
#include "simcf/optimizers.hpp"
#include "simcf/scenario.hpp"
#include "simcf/system_model.hpp"

namespace simcf::test {

/// Random Hermitian PSD matrix of rank `rank` (full rank by default).
inline CMatrix random_psd(int n, Rng& rng, double scale = 1.0, int rank = -1) {
  if (rank < 0) rank = n;
  CMatrix A(n, rank);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < rank; ++j) A(i, j) = complex_normal(rng);
  }
  CMatrix R = scale * (A * A.adjoint()) / static_cast<double>(rank);
  return 0.5 * (R + R.adjoint());
}

inline CVector random_cvector(int n, Rng& rng, double scale = 1.0) {
  CVector v(n);
  for (int i = 0; i < n; ++i) v(i) = scale * complex_normal(rng);
  return v;
}

inline SystemConfig small_config(int L, int K, int U, int N, int M, int tau_p) {
  SystemConfig c;
  c.L = L;
  c.K = K;
  c.U = U;
  c.N = N;
  c.M = M;
  c.tau_p = tau_p;
  c.validate();
  return c;
}

/// Drop with random phases and the default pilot allocation.
inline SystemModel make_model(const SystemConfig& c, std::uint64_t seed) {
  Drop d = generate_drop(c, seed);
  Rng r = make_rng(seed, Stream::kPhaseInit, 0);
  SystemModel m(c, std::move(d), PhaseTensor::random(c.L, c.M, c.N, r));
  m.set_pilots(allocate_pilots(m.drop(), c.tau_p).pilot_of);
  return m;
}

inline double rel_diff(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

inline double max_abs(const CMatrix& A) { return A.cwiseAbs().maxCoeff(); }

}  // namespace simcf::test
