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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "simcf/monte_carlo.hpp"
#include "test_support.hpp"

using namespace simcf;
using Catch::Approx;

namespace
{

std::vector<CVector> weights_for(const SystemModel& m, Decoder d, const RVector& p)
{
    std::vector<CVector> w;
    for (int k = 0; k < m.config().K; ++k)
        w.push_back(d == Decoder::kLsfd ? lsfd_weights(m.terms(), k, p) : egcd_weights(m.config().L));
    return w;
}

} // namespace

TEST_CASE("Monte Carlo agrees with the closed form without interferers")
{
    auto cfg = test::small_config(3, 3, 2, 16, 2, 2);
    SystemModel m = test::make_model(cfg, 17);
    for (int k = 0; k < cfg.K; ++k)
    {
        RVector p = RVector::Zero(cfg.K);
        p(k) = cfg.p_max;
        auto w = weights_for(m, Decoder::kEgcd, p);
        auto est = uatf_monte_carlo(m.mc_model(), w, p, 20000, 5);
        const double cf = sinr_closed_form(m.terms(), k, w[k], p).sinr();
        INFO("k=" << k << " mc=" << est.sinr(k) << " cf=" << cf << " se=" << est.std_error(k));
        CHECK(std::abs(est.sinr(k) - cf) < 4.0 * est.std_error(k));
        // the other UEs transmit nothing and see no signal
        for (int j = 0; j < cfg.K; ++j)
            if (j != k) CHECK(est.sinr(j) == 0.0);
    }
}

TEST_CASE("Monte Carlo standard error and determinism")
{
    auto cfg = test::small_config(3, 3, 2, 16, 2, 2);
    SystemModel m = test::make_model(cfg, 23);
    const RVector p = m.drop().p;
    auto w = weights_for(m, Decoder::kLsfd, p);

    const auto before = monte_carlo_invocations();
    auto a = uatf_monte_carlo(m.mc_model(), w, p, 4000, 9);
    auto b = uatf_monte_carlo(m.mc_model(), w, p, 8000, 9);
    CHECK(monte_carlo_invocations() == before + 2);
    for (int k = 0; k < cfg.K; ++k)
    {
        const double ratio = b.std_error(k) / a.std_error(k);
        CHECK(ratio == Approx(1.0 / std::sqrt(2.0)).epsilon(0.2));
    }

    auto c = uatf_monte_carlo(m.mc_model(), w, p, 4000, 9, 3);
    auto d = uatf_monte_carlo(m.mc_model(), w, p, 4000, 9);
    CHECK(c.n_trials == 4000);
    for (int k = 0; k < cfg.K; ++k)
    {
        CHECK(c.sinr(k) == a.sinr(k));
        CHECK(c.std_error(k) == a.std_error(k));
        CHECK(d.sinr(k) == a.sinr(k));
    }
    auto e = uatf_monte_carlo(m.mc_model(), w, p, 4000, 10);
    CHECK(e.sinr(0) != a.sinr(0));

    CHECK_THROWS_AS(uatf_monte_carlo(m.mc_model(), w, p, 0, 9), Error);
    std::vector<CVector> short_w(w.begin(), w.end() - 1);
    CHECK_THROWS_AS(uatf_monte_carlo(m.mc_model(), short_w, p, 10, 9), Error);
}

TEST_CASE("sampled estimate power")
{
    auto cfg = test::small_config(2, 4, 2, 16, 2, 2);
    SystemModel m = test::make_model(cfg, 31);
    auto model = m.mc_model();
    Rng rng = make_rng(4, Stream::kTest);
    TrialSample ts;
    const int n = 20000;
    RMatrix acc = RMatrix::Zero(cfg.L, cfg.K);
    RMatrix sig = RMatrix::Zero(cfg.L, cfg.K);
    for (int i = 0; i < n; ++i)
    {
        sample_trial(model, rng, ts);
        REQUIRE(ts.X.size() == 2);
        acc += ts.estimate_power;
        for (int l = 0; l < cfg.L; ++l)
            for (int k = 0; k < cfg.K; ++k) sig(l, k) += ts.X[l](k, k).real();
    }
    for (int l = 0; l < cfg.L; ++l)
        for (int k = 0; k < cfg.K; ++k)
        {
            const double e = expected_estimate_power(m.links(), m.pilots(), l, k);
            CHECK(acc(l, k) / n == Approx(e).epsilon(0.05));
            CHECK(sig(l, k) / n == Approx(expected_signal(m.links(), m.pilots(), l, k)).epsilon(0.05));
        }
}
