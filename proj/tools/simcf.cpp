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

// simcf command line: run experiment specs, the canned spacing and AP-count
// sweeps, and a quick closed-form vs Monte-Carlo check.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include "simcf/config_io.hpp"
#include "simcf/experiment.hpp"
#include "simcf/monte_carlo.hpp"
#include "simcf/optimizers.hpp"
#include "simcf/system_model.hpp"

namespace {

using namespace simcf;

struct RunOptions {
  std::string spec_path;
  std::string out_dir = "simcf_out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = 0;
  int drops = 0;
};

void print_error(const std::string& code, const std::string& message) {
  nlohmann::json j;
  j["error"] = {{"code", code}, {"message", message}};
  std::cerr << j.dump() << "\n";
}

int run_spec(ExperimentSpec spec, const RunOptions& o) {
  if (o.seed_set) spec.seed = o.seed;
  if (o.threads > 0) spec.threads = o.threads;
  if (o.drops > 0) spec.n_drops = o.drops;
  spec.validate();
  spdlog::info("{}: {} sweep values x {} drops, seed {}, {} thread(s)", spec.name, spec.values.size(),
               spec.n_drops, spec.seed, spec.threads);
  const ExperimentResult r = run_experiment(spec);
  write_experiment(r, o.out_dir);
  std::cout << aggregates_csv(r);
  if (r.failed_drops > 0) {
    spdlog::warn("{} drop(s) failed; first: {}", r.failed_drops, r.failures.front());
  }
  return 0;
}

int validate(const std::string& config_path, int trials, std::uint64_t seed) {
  SystemConfig cfg;
  if (config_path.empty()) {
    cfg.L = 4;
    cfg.K = 3;
    cfg.U = 2;
    cfg.N = 16;
    cfg.M = 2;
    cfg.tau_p = 2;
  } else {
    cfg = load_config(config_path);
  }
  cfg.validate();
  const std::uint64_t drop_seed = derive_seed(seed, Stream::kDrop, 0);
  Drop drop = generate_drop(cfg, drop_seed);
  Rng rng = make_rng(drop_seed, Stream::kPhaseInit, 0);
  SystemModel m(cfg, std::move(drop), PhaseTensor::random(cfg.L, cfg.M, cfg.N, rng));
  m.set_pilots(allocate_pilots(m.drop(), cfg.tau_p).pilot_of);

  bool ok = true;
  std::printf("decoder,k,sinr_closed_form,sinr_monte_carlo,std_error,z\n");
  for (Decoder d : {Decoder::kLsfd, Decoder::kEgcd}) {
    const SEReport rep = m.evaluate(d);
    std::vector<CVector> w;
    for (const auto& u : rep.ue) w.push_back(u.a);
    const UatfEstimate mc = uatf_monte_carlo(m.mc_model(), w, m.drop().p, trials, seed);
    for (const auto& u : rep.ue) {
      const double z = (mc.sinr(u.k) - u.sinr) / mc.std_error(u.k);
      ok = ok && std::abs(z) <= 3.0;
      std::printf("%s,%d,%.8g,%.8g,%.3g,%.3f\n", to_string(d), u.k, u.sinr, mc.sinr(u.k), mc.std_error(u.k), z);
    }
  }
  if (!ok) {
    print_error("validation_failed", "closed form and Monte-Carlo differ by more than 3 standard errors");
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"simcf: uplink SE of SIM-enhanced cell-free massive MIMO"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error or off")->capture_default_str();

  RunOptions o;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out-dir", o.out_dir, "directory for rows.csv, aggregates.csv, cdf.csv")->capture_default_str();
    sub->add_option_function<std::uint64_t>(
        "--seed", [&](const std::uint64_t& s) { o.seed = s; o.seed_set = true; }, "base seed (overrides the spec)");
    sub->add_option("--threads", o.threads, "worker threads for drops")->check(CLI::PositiveNumber);
    sub->add_option("--drops", o.drops, "number of drops (overrides the spec)")->check(CLI::PositiveNumber);
  };

  CLI::App* run = app.add_subcommand("run", "run an experiment spec (JSON)");
  run->add_option("--spec", o.spec_path, "experiment spec file")->required()->check(CLI::ExistingFile);
  add_common(run);

  CLI::App* table1 = app.add_subcommand("table1", "meta-atom spacing sweep (lambda .. lambda/8)");
  add_common(table1);
  CLI::App* fig3 = app.add_subcommand("fig3", "AP sweep with 1200 meta-atoms in total");
  add_common(fig3);

  CLI::App* val = app.add_subcommand("validate", "closed-form SINR against Monte-Carlo UatF");
  std::string val_config;
  int trials = 20000;
  std::uint64_t val_seed = 1;
  val->add_option("--config", val_config, "system config (default: L=4 K=3 U=2 N=16 M=2 tau_p=2)")
      ->check(CLI::ExistingFile);
  val->add_option("--trials", trials, "Monte-Carlo realizations")->capture_default_str()->check(CLI::PositiveNumber);
  val->add_option("--seed", val_seed, "seed")->capture_default_str();

  CLI::App* spec_dump = app.add_subcommand("spec", "print a canned spec as JSON");
  std::string which = "table1";
  spec_dump->add_option("name", which, "table1 or fig3")->check(CLI::IsMember({"table1", "fig3"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    print_error("usage", e.what());
    return 2;
  }

  try {
    spdlog::set_level(spdlog::level::from_str(log_level));
    if (*run) return run_spec(load_experiment_spec(o.spec_path), o);
    if (*table1) return run_spec(table1_spec(), o);
    if (*fig3) return run_spec(fig3_spec(), o);
    if (*val) return validate(val_config, trials, val_seed);
    if (*spec_dump) {
      std::cout << experiment_spec_to_json(which == "fig3" ? fig3_spec() : table1_spec()) << "\n";
      return 0;
    }
  } catch (const Error& e) {
    print_error(to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}
