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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "simcf/experiment.hpp"
#include "simcf/monte_carlo.hpp"
#include "test_support.hpp"

using namespace simcf;
using Catch::Approx;

namespace
{

ExperimentSpec tiny_spec()
{
    ExperimentSpec s;
    s.name = "tiny";
    s.config = test::small_config(3, 4, 2, 16, 2, 2);
    s.n_drops = 3;
    s.schemes = {Scheme::kRandom, Scheme::kOptPhase, Scheme::kMaxMin, Scheme::kOptPhaseMaxMin};
    s.beamforming.J = 2;
    s.beamforming.N_selection = 16;
    s.seed = 77;
    return s;
}

std::string slurp(const std::filesystem::path& p)
{
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("cdf report")
{
    CHECK_THROWS_AS(cdf_report(std::vector<double>(19, 1.0)), Error);

    auto c = cdf_report(std::vector<double>(25, 2.5));
    REQUIRE(c.se.size() == 100);
    CHECK(c.p5 == 2.5);
    for (double v : c.cdf) CHECK(v == 1.0);

    std::vector<double> u;
    for (int i = 100; i >= 0; --i) u.push_back(i / 100.0);
    auto r = cdf_report(u);
    CHECK(r.p5 == Approx(0.05).epsilon(1e-12));
    CHECK(r.se.front() == 0.0);
    CHECK(r.se.back() == 1.0);
    CHECK(r.cdf.back() == 1.0);
    for (std::size_t i = 1; i < r.cdf.size(); ++i) CHECK(r.cdf[i] >= r.cdf[i - 1]);
    CHECK(r.cdf[50] == Approx(51.0 / 101.0).margin(0.011));

    // interpolation between order statistics
    std::vector<double> v(21);
    for (int i = 0; i < 21; ++i) v[i] = i * i;
    CHECK(cdf_report(v).p5 == Approx(1.0));
    v.push_back(500.0);
    // pos = 0.05 * 21 = 1.05
    CHECK(cdf_report(v).p5 == Approx(1.0 + 0.05 * 3.0));

    Rng rng(5);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> big(10000);
    for (double& x : big) x = unif(rng);
    CHECK(cdf_report(big).p5 == Approx(0.05).margin(0.01));
}

TEST_CASE("sweeps")
{
    CHECK(squarest_factor(48) == 6);
    CHECK(squarest_factor(24) == 4);
    CHECK(squarest_factor(16) == 4);
    CHECK(squarest_factor(7) == 1);

    auto f = fig3_spec();
    const std::vector<int> expect_n{48, 24, 16, 12, 8, 6};
    for (std::size_t i = 0; i < f.values.size(); ++i)
    {
        auto c = apply_sweep(f, f.values[i]);
        CHECK(c.L == static_cast<int>(f.values[i]));
        CHECK(c.N == expect_n[i]);
        CHECK(c.L * c.M * c.N == f.atom_budget);
        CHECK(c.nx() * c.ny() == c.N);
    }
    auto t = table1_spec();
    CHECK(apply_sweep(t, t.values[3]).d_meta == t.values[3]);

    ExperimentSpec s = tiny_spec();
    s.variable = SweepVariable::kK;
    CHECK(apply_sweep(s, 6).K == 6);
    CHECK_THROWS_AS(apply_sweep(s, 2.5), Error);
    CHECK_THROWS_AS(apply_sweep(s, 0), Error);
    s.variable = SweepVariable::kLBudget;
    s.atom_budget = 100;
    CHECK_THROWS_AS(apply_sweep(s, 3), Error);
}

TEST_CASE("spec files")
{
    auto s = experiment_spec_from_json(R"({"name": "x", "config": {"L": 4, "K": 3, "N": 16, "M": 2},
        "sweep": {"variable": "L", "values": [2, 4]}, "n_drops": 2, "schemes": ["random", "opt_maxmin"],
        "decoders": ["LSFD"], "beamforming": {"J": 3, "objective": "EGCD"}, "maxmin": {"eps": 0.01},
        "pilot_metric": "trace", "threads": 2})");
    CHECK(s.config.L == 4);
    CHECK(s.variable == SweepVariable::kL);
    CHECK(s.values == std::vector<double>{2, 4});
    CHECK(s.schemes == std::vector<Scheme>{Scheme::kRandom, Scheme::kOptPhaseMaxMin});
    CHECK(s.decoders == std::vector<Decoder>{Decoder::kLsfd});
    CHECK(s.beamforming.J == 3);
    CHECK(s.beamforming.objective == Decoder::kEgcd);
    CHECK(s.maxmin.eps == 0.01);
    CHECK(s.pilot_metric == UiMetric::kTraceOverlap);

    auto back = experiment_spec_from_json(experiment_spec_to_json(s));
    CHECK(experiment_spec_to_json(back) == experiment_spec_to_json(s));

    CHECK_THROWS_AS(experiment_spec_from_json("{"), Error);
    CHECK_THROWS_AS(experiment_spec_from_json("[]"), Error);
    CHECK_THROWS_AS(experiment_spec_from_json(R"({"n_drop": 3})"), Error);
    CHECK_THROWS_AS(experiment_spec_from_json(R"({"n_drops": 0})"), Error);
    CHECK_THROWS_AS(experiment_spec_from_json(R"({"n_drops": "many"})"), Error);
    CHECK_THROWS_AS(experiment_spec_from_json(R"({"schemes": ["best"]})"), Error);
    CHECK_THROWS_AS(experiment_spec_from_json(R"({"schemes": []})"), Error);
    CHECK_THROWS_AS(experiment_spec_from_json(R"({"pilot_metric": "gram"})"), Error);
    CHECK_THROWS_AS(experiment_spec_from_json(R"({"sweep": {"variable": "Q", "values": [1]}})"), Error);
    CHECK_THROWS_AS(experiment_spec_from_json(R"({"sweep": {"variable": "L_budget", "values": [5]}})"), Error);
    CHECK_THROWS_AS(load_experiment_spec("/nonexistent/spec.json"), Error);
}

TEST_CASE("experiment runs are reproducible")
{
    ExperimentSpec s = tiny_spec();
    const auto mc_before = monte_carlo_invocations();
    auto a = run_experiment(s);
    CHECK(monte_carlo_invocations() == mc_before);
    CHECK(a.failed_drops == 0);
    CHECK(a.rows.size() == static_cast<std::size_t>(3 * 4 * 4 * 2));
    CHECK(a.aggregates.size() == 8);

    s.threads = 3;
    auto b = run_experiment(s);
    CHECK(rows_csv(a) == rows_csv(b));
    CHECK(aggregates_csv(a) == aggregates_csv(b));

    // rows of one drop do not depend on the other drops
    auto single = run_drop(s, s.config, 0.0, 1);
    std::vector<ResultRow> from_a;
    for (const auto& r : a.rows)
        if (r.drop == 1) from_a.push_back(r);
    REQUIRE(single.size() == from_a.size());
    for (std::size_t i = 0; i < single.size(); ++i) CHECK(single[i].se == from_a[i].se);

    std::vector<ResultRow> shuffled = a.rows;
    std::reverse(shuffled.begin(), shuffled.end());
    auto agg = aggregate_rows(s, shuffled);
    for (std::size_t i = 0; i < agg.size(); ++i)
    {
        CHECK(agg[i].mean_se == a.aggregates[i].mean_se);
        CHECK(agg[i].std_error == a.aggregates[i].std_error);
    }

    for (const auto& r : a.rows)
    {
        CHECK(r.se >= 0.0);
        CHECK(r.mc_sinr == -1.0);
        CHECK(r.se == Approx(se_from_sinr(r.sinr, s.config.tau_c, s.config.tau_p)).epsilon(1e-12));
    }
    const auto& rnd = a.aggregate(0.0, Decoder::kLsfd, Scheme::kRandom);
    const auto& opt = a.aggregate(0.0, Decoder::kLsfd, Scheme::kOptPhase);
    CHECK(rnd.samples.size() == 12);
    CHECK(opt.mean_se >= rnd.mean_se);
    CHECK(std::is_sorted(rnd.samples.begin(), rnd.samples.end()));
    CHECK_THROWS_AS(a.aggregate(1.0, Decoder::kLsfd, Scheme::kRandom), Error);

    s.seed = 78;
    CHECK(rows_csv(run_experiment(s)) != rows_csv(a));
}

TEST_CASE("experiment output files and Monte Carlo columns")
{
    ExperimentSpec s = tiny_spec();
    s.n_drops = 1;
    s.schemes = {Scheme::kRandom};
    s.decoders = {Decoder::kEgcd};
    s.n_mc_trials = 200;
    const auto mc_before = monte_carlo_invocations();
    auto r = run_experiment(s);
    CHECK(monte_carlo_invocations() == mc_before + 1);
    for (const auto& row : r.rows)
    {
        CHECK(row.mc_sinr >= 0.0);
        CHECK(row.mc_std_error > 0.0);
    }
    const auto dir = std::filesystem::temp_directory_path() / "simcf_experiment_test";
    std::filesystem::remove_all(dir);
    write_experiment(r, dir.string());
    CHECK(slurp(dir / "rows.csv") == rows_csv(r));
    CHECK(slurp(dir / "aggregates.csv") == aggregates_csv(r));
    CHECK(slurp(dir / "cdf.csv") == cdf_csv(r));
    CHECK(rows_csv(r).rfind("sweep_value,drop,ue,decoder,scheme,sinr,se,mc_sinr,mc_std_error\n", 0) == 0);
    std::filesystem::remove_all(dir);
}
