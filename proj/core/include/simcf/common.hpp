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

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace simcf {

using cdouble = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Error categories used by simcf::Error. The CLI maps them onto its
/// machine-readable error record.
enum class ErrorCode {
  kInvalidConfig,
  kShapeMismatch,
  kNumerical,
  kNotPsd,
  kInvalidArgument,
  kIo,
  kInternal,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

using Rng = std::mt19937_64;

/// Stream identifiers. Every random quantity in a run is drawn from a
/// generator seeded by (base seed, stream, index), so adding Monte-Carlo
/// trials never perturbs drop generation or phase initialization.
enum class Stream : std::uint64_t {
  kDrop = 1,
  kShadowing = 2,
  kPhaseInit = 3,
  kBeamformingOrder = 4,
  kMonteCarlo = 5,
  kPilotInit = 6,
  kTest = 99,
};

/// SplitMix64-derived seed for an independent stream.
std::uint64_t derive_seed(std::uint64_t base, Stream stream, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t base, Stream stream, std::uint64_t index = 0) {
  return Rng(derive_seed(base, stream, index));
}

/// Draw a circularly-symmetric standard complex Gaussian, E|z|^2 = 1.
cdouble complex_normal(Rng& rng);

}  // namespace simcf
