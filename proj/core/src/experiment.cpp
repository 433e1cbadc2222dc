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

#include "simcf/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>
#include <spdlog/spdlog.h>

#include "simcf/config_io.hpp"
#include "simcf/monte_carlo.hpp"
#include "simcf/system_model.hpp"

namespace simcf {

using nlohmann::json;

const char* to_string(Scheme s) {
  switch (s) {
    case Scheme::kRandom: return "random";
    case Scheme::kOptPhase: return "opt";
    case Scheme::kMaxMin: return "maxmin";
    case Scheme::kOptPhaseMaxMin: return "opt_maxmin";
  }
  return "?";
}

Scheme scheme_from_string(const std::string& s) {
  for (Scheme c : {Scheme::kRandom, Scheme::kOptPhase, Scheme::kMaxMin, Scheme::kOptPhaseMaxMin}) {
    if (s == to_string(c)) return c;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown scheme: " + s);
}

const char* to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::kNone: return "none";
    case SweepVariable::kL: return "L";
    case SweepVariable::kK: return "K";
    case SweepVariable::kU: return "U";
    case SweepVariable::kM: return "M";
    case SweepVariable::kN: return "N";
    case SweepVariable::kDMeta: return "d_meta";
    case SweepVariable::kLBudget: return "L_budget";
  }
  return "?";
}

SweepVariable sweep_variable_from_string(const std::string& s) {
  for (SweepVariable v : {SweepVariable::kNone, SweepVariable::kL, SweepVariable::kK, SweepVariable::kU,
                          SweepVariable::kM, SweepVariable::kN, SweepVariable::kDMeta, SweepVariable::kLBudget}) {
    if (s == to_string(v)) return v;
  }
  throw Error(ErrorCode::kInvalidConfig, "unknown sweep variable: " + s);
}

int squarest_factor(int N) {
  int best = 1;
  for (int a = 1; a * a <= N; ++a) {
    if (N % a == 0) best = a;
  }
  return best;
}

namespace {

int as_count(double v, const char* what) {
  const long r = std::lround(v);
  if (std::abs(v - static_cast<double>(r)) > 1e-9 || r < 1) {
    throw Error(ErrorCode::kInvalidConfig, std::string("sweep value for ") + what + " must be a positive integer");
  }
  return static_cast<int>(r);
}

}  // namespace

SystemConfig apply_sweep(const ExperimentSpec& spec, double v) {
  SystemConfig c = spec.config;
  switch (spec.variable) {
    case SweepVariable::kNone: break;
    case SweepVariable::kL: c.L = as_count(v, "L"); break;
    case SweepVariable::kK: c.K = as_count(v, "K"); c.p_hat.clear(); break;
    case SweepVariable::kU: c.U = as_count(v, "U"); break;
    case SweepVariable::kM: c.M = as_count(v, "M"); break;
    case SweepVariable::kN: c.N = as_count(v, "N"); c.grid_nx = 0; break;
    case SweepVariable::kDMeta: c.d_meta = v; break;
    case SweepVariable::kLBudget: {
      c.L = as_count(v, "L");
      if (spec.atom_budget % (c.L * c.M) != 0) {
        throw Error(ErrorCode::kInvalidConfig, "atom_budget must be divisible by L * M");
      }
      c.N = spec.atom_budget / (c.L * c.M);
      const int nx = squarest_factor(c.N);
      c.grid_nx = nx * nx == c.N ? 0 : nx;
      break;
    }
  }
  c.validate();
  return c;
}

void ExperimentSpec::validate() const {
  if (values.empty()) throw Error(ErrorCode::kInvalidConfig, "sweep value list must not be empty");
  if (n_drops < 1) throw Error(ErrorCode::kInvalidConfig, "n_drops must be >= 1");
  if (n_mc_trials < 0) throw Error(ErrorCode::kInvalidConfig, "n_mc_trials must be >= 0");
  if (schemes.empty() || decoders.empty()) {
    throw Error(ErrorCode::kInvalidConfig, "schemes and decoders must not be empty");
  }
  if (threads < 1) throw Error(ErrorCode::kInvalidConfig, "threads must be >= 1");
  if (variable == SweepVariable::kLBudget && atom_budget < 1) {
    throw Error(ErrorCode::kInvalidConfig, "L_budget sweep needs atom_budget");
  }
  beamforming.validate();
  config.validate();
  for (double v : values) apply_sweep(*this, v);
}

ExperimentSpec experiment_spec_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("spec is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kInvalidConfig, "spec must be a JSON object");
  static const char* const kKnown[] = {"name",    "config",       "sweep",       "n_drops",      "n_mc_trials",
                                       "seed",    "schemes",      "decoders",    "beamforming",  "maxmin",
                                       "pilot_metric", "atom_budget", "threads"};
  for (const auto& item : j.items()) {
    if (std::none_of(std::begin(kKnown), std::end(kKnown), [&](const char* k) { return item.key() == k; })) {
      throw Error(ErrorCode::kInvalidConfig, "unknown spec field: " + item.key());
    }
  }

  ExperimentSpec s;
  try {
    s.name = j.value("name", s.name);
    if (j.contains("config")) s.config = config_from_json(j.at("config").dump());
    if (j.contains("sweep")) {
      const auto& sw = j.at("sweep");
      s.variable = sweep_variable_from_string(sw.value("variable", std::string("none")));
      if (sw.contains("values")) s.values = sw.at("values").get<std::vector<double>>();
    }
    s.n_drops = j.value("n_drops", s.n_drops);
    s.n_mc_trials = j.value("n_mc_trials", s.n_mc_trials);
    s.seed = j.value("seed", s.seed);
    if (j.contains("schemes")) {
      s.schemes.clear();
      for (const auto& x : j.at("schemes")) s.schemes.push_back(scheme_from_string(x.get<std::string>()));
    }
    if (j.contains("decoders")) {
      s.decoders.clear();
      for (const auto& x : j.at("decoders")) s.decoders.push_back(decoder_from_string(x.get<std::string>()));
    }
    if (j.contains("beamforming")) {
      const auto& b = j.at("beamforming");
      s.beamforming.step_size = b.value("step_size", s.beamforming.step_size);
      s.beamforming.J = b.value("J", s.beamforming.J);
      s.beamforming.xi = b.value("xi", s.beamforming.xi);
      s.beamforming.N_selection = b.value("N_selection", s.beamforming.N_selection);
      s.beamforming.sweeps = b.value("sweeps", s.beamforming.sweeps);
      s.beamforming.symmetric_probe = b.value("symmetric_probe", s.beamforming.symmetric_probe);
      if (b.contains("objective")) s.beamforming.objective = decoder_from_string(b.at("objective").get<std::string>());
    }
    if (j.contains("maxmin")) {
      const auto& m = j.at("maxmin");
      s.maxmin.eps = m.value("eps", s.maxmin.eps);
      s.maxmin.t_max = m.value("t_max", s.maxmin.t_max);
    }
    if (j.contains("pilot_metric")) {
      const auto m = j.at("pilot_metric").get<std::string>();
      if (m == "beta") {
        s.pilot_metric = UiMetric::kBetaProduct;
      } else if (m == "trace") {
        s.pilot_metric = UiMetric::kTraceOverlap;
      } else {
        throw Error(ErrorCode::kInvalidConfig, "pilot_metric must be beta or trace");
      }
    }
    s.atom_budget = j.value("atom_budget", s.atom_budget);
    s.threads = j.value("threads", s.threads);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string("spec field has wrong type: ") + e.what());
  }
  s.validate();
  return s;
}

ExperimentSpec load_experiment_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open spec file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return experiment_spec_from_json(ss.str());
}

std::string experiment_spec_to_json(const ExperimentSpec& s) {
  json j;
  j["name"] = s.name;
  j["config"] = json::parse(config_to_json(s.config));
  j["sweep"] = {{"variable", to_string(s.variable)}, {"values", s.values}};
  j["n_drops"] = s.n_drops;
  j["n_mc_trials"] = s.n_mc_trials;
  j["seed"] = s.seed;
  j["schemes"] = json::array();
  for (auto x : s.schemes) j["schemes"].push_back(to_string(x));
  j["decoders"] = json::array();
  for (auto x : s.decoders) j["decoders"].push_back(to_string(x));
  j["beamforming"] = {{"step_size", s.beamforming.step_size},
                      {"J", s.beamforming.J},
                      {"xi", s.beamforming.xi},
                      {"N_selection", s.beamforming.N_selection},
                      {"sweeps", s.beamforming.sweeps},
                      {"symmetric_probe", s.beamforming.symmetric_probe},
                      {"objective", to_string(s.beamforming.objective)}};
  j["maxmin"] = {{"eps", s.maxmin.eps}, {"t_max", s.maxmin.t_max}};
  j["pilot_metric"] = s.pilot_metric == UiMetric::kBetaProduct ? "beta" : "trace";
  j["atom_budget"] = s.atom_budget;
  j["threads"] = s.threads;
  return j.dump(2);
}

CdfReport cdf_report(std::vector<double> samples) {
  if (samples.size() < 20) throw Error(ErrorCode::kInvalidArgument, "cdf_report: at least 20 samples required");
  std::sort(samples.begin(), samples.end());
  const auto n = samples.size();
  CdfReport r;
  const double lo = samples.front();
  const double hi = samples.back();
  constexpr int kPoints = 100;
  for (int i = 0; i < kPoints; ++i) {
    const double x = lo + (hi - lo) * i / (kPoints - 1);
    const auto cnt = std::upper_bound(samples.begin(), samples.end(), x) - samples.begin();
    r.se.push_back(x);
    r.cdf.push_back(static_cast<double>(cnt) / static_cast<double>(n));
  }
  const double pos = 0.05 * static_cast<double>(n - 1);
  const auto i0 = static_cast<std::size_t>(std::floor(pos));
  const auto i1 = std::min(i0 + 1, n - 1);
  r.p5 = samples[i0] + (pos - static_cast<double>(i0)) * (samples[i1] - samples[i0]);
  return r;
}

const AggregateResult& ExperimentResult::aggregate(double v, Decoder d, Scheme s) const {
  for (const auto& a : aggregates) {
    if (a.sweep_value == v && a.decoder == d && a.scheme == s) return a;
  }
  throw Error(ErrorCode::kInvalidArgument, "no aggregate for the requested point");
}

namespace {

bool wants(const ExperimentSpec& spec, Scheme s) {
  return std::find(spec.schemes.begin(), spec.schemes.end(), s) != spec.schemes.end();
}

void append_rows(const ExperimentSpec& spec, const SystemModel& model, Scheme scheme, double sweep_value,
                 int drop_index, std::uint64_t drop_seed, std::vector<ResultRow>& out) {
  const double p_max = model.config().p_max;
  const bool power_control = scheme == Scheme::kMaxMin || scheme == Scheme::kOptPhaseMaxMin;
  for (Decoder d : spec.decoders) {
    RVector p = model.drop().p;
    if (power_control) {
      const auto w = fixed_weights(model.terms(), d, p_max);
      p = maxmin_power(model.terms(), w, p_max, spec.maxmin).p;
    }
    const SEReport rep = model.evaluate(d, p);
    UatfEstimate mc;
    if (spec.n_mc_trials > 0) {
      std::vector<CVector> w;
      for (const auto& u : rep.ue) w.push_back(u.a);
      const std::uint64_t mc_seed =
          derive_seed(drop_seed, Stream::kMonteCarlo, static_cast<std::uint64_t>(scheme) * 8 + static_cast<int>(d));
      mc = uatf_monte_carlo(model.mc_model(), w, p, spec.n_mc_trials, mc_seed);
    }
    for (const auto& u : rep.ue) {
      ResultRow r;
      r.sweep_value = sweep_value;
      r.drop = drop_index;
      r.ue = u.k;
      r.decoder = d;
      r.scheme = scheme;
      r.sinr = u.sinr;
      r.se = u.se;
      if (spec.n_mc_trials > 0) {
        r.mc_sinr = mc.sinr(u.k);
        r.mc_std_error = mc.std_error(u.k);
      }
      out.push_back(r);
    }
  }
}

}  // namespace

std::vector<ResultRow> run_drop(const ExperimentSpec& spec, const SystemConfig& cfg, double sweep_value,
                                int drop_index) {
  const std::uint64_t drop_seed = derive_seed(spec.seed, Stream::kDrop, static_cast<std::uint64_t>(drop_index));
  Drop drop = generate_drop(cfg, drop_seed);
  Rng phase_rng = make_rng(drop_seed, Stream::kPhaseInit, 0);
  PhaseTensor phases = PhaseTensor::random(cfg.L, cfg.M, cfg.N, phase_rng);
  SystemModel model(cfg, std::move(drop), std::move(phases));
  const PilotAssignment pa = allocate_pilots(model.drop(), cfg.tau_p, spec.pilot_metric, &model.links());
  model.set_pilots(pa.pilot_of);

  std::vector<ResultRow> rows;
  for (Scheme s : {Scheme::kRandom, Scheme::kMaxMin}) {
    if (wants(spec, s)) append_rows(spec, model, s, sweep_value, drop_index, drop_seed, rows);
  }
  if (wants(spec, Scheme::kOptPhase) || wants(spec, Scheme::kOptPhaseMaxMin)) {
    optimize_beamforming(model, spec.beamforming, drop_seed);
    for (Scheme s : {Scheme::kOptPhase, Scheme::kOptPhaseMaxMin}) {
      if (wants(spec, s)) append_rows(spec, model, s, sweep_value, drop_index, drop_seed, rows);
    }
  }
  const auto order = [&](const ResultRow& a, const ResultRow& b) {
    return std::tuple(static_cast<int>(a.scheme), static_cast<int>(a.decoder), a.ue) <
           std::tuple(static_cast<int>(b.scheme), static_cast<int>(b.decoder), b.ue);
  };
  std::stable_sort(rows.begin(), rows.end(), order);
  return rows;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const int V = static_cast<int>(spec.values.size());
  const int tasks = V * spec.n_drops;
  std::vector<SystemConfig> configs;
  for (double v : spec.values) configs.push_back(apply_sweep(spec, v));

  std::vector<std::vector<ResultRow>> per_task(static_cast<std::size_t>(tasks));
  std::vector<std::string> errors(static_cast<std::size_t>(tasks));
  std::atomic<int> next{0};
  const auto worker = [&] {
    for (int t = next++; t < tasks; t = next++) {
      const int vi = t / spec.n_drops;
      const int d = t % spec.n_drops;
      try {
        per_task[t] = run_drop(spec, configs[vi], spec.values[vi], d);
      } catch (const std::exception& e) {
        errors[t] = e.what();
        spdlog::warn("drop {} at {} = {} failed: {}", d, to_string(spec.variable), spec.values[vi], e.what());
      }
    }
  };
  const int nthreads = std::min(spec.threads, std::max(1, tasks));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ExperimentResult res;
  for (int t = 0; t < tasks; ++t) {
    if (!errors[t].empty()) {
      ++res.failed_drops;
      res.failures.push_back(errors[t]);
      continue;
    }
    res.rows.insert(res.rows.end(), per_task[t].begin(), per_task[t].end());
  }
  res.aggregates = aggregate_rows(spec, res.rows);
  return res;
}

std::vector<AggregateResult> aggregate_rows(const ExperimentSpec& spec, const std::vector<ResultRow>& rows) {
  std::vector<AggregateResult> out;
  for (double v : spec.values) {
    for (Scheme s : spec.schemes) {
      for (Decoder d : spec.decoders) {
        AggregateResult a;
        a.sweep_value = v;
        a.decoder = d;
        a.scheme = s;
        for (const auto& r : rows) {
          if (r.sweep_value == a.sweep_value && r.decoder == d && r.scheme == s) a.samples.push_back(r.se);
        }
        std::sort(a.samples.begin(), a.samples.end());
        const double n = static_cast<double>(a.samples.size());
        if (n > 0) {
          double sum = 0.0;
          for (double x : a.samples) sum += x;
          a.mean_se = sum / n;
          double ss = 0.0;
          for (double x : a.samples) ss += (x - a.mean_se) * (x - a.mean_se);
          a.std_error = n > 1 ? std::sqrt(ss / (n - 1) / n) : 0.0;
        }
        if (a.samples.size() >= 20) {
          a.cdf = cdf_report(a.samples);
          a.p5_se = a.cdf.p5;
        } else if (!a.samples.empty()) {
          a.p5_se = *std::min_element(a.samples.begin(), a.samples.end());
        }
        out.push_back(std::move(a));
      }
    }
  }
  return out;
}

std::string rows_csv(const ExperimentResult& r) {
  std::string out = "sweep_value,drop,ue,decoder,scheme,sinr,se,mc_sinr,mc_std_error\n";
  char buf[256];
  for (const auto& x : r.rows) {
    std::snprintf(buf, sizeof(buf), "%.12g,%d,%d,%s,%s,%.12g,%.12g,", x.sweep_value, x.drop, x.ue,
                  to_string(x.decoder), to_string(x.scheme), x.sinr, x.se);
    out += buf;
    if (x.mc_sinr >= 0.0) {
      std::snprintf(buf, sizeof(buf), "%.12g,%.12g\n", x.mc_sinr, x.mc_std_error);
      out += buf;
    } else {
      out += ",\n";
    }
  }
  return out;
}

std::string aggregates_csv(const ExperimentResult& r) {
  std::string out = "sweep_value,decoder,scheme,n_samples,mean_se,std_error,p5_se,failed_drops\n";
  char buf[256];
  for (const auto& a : r.aggregates) {
    std::snprintf(buf, sizeof(buf), "%.12g,%s,%s,%zu,%.12g,%.12g,%.12g,%d\n", a.sweep_value, to_string(a.decoder),
                  to_string(a.scheme), a.samples.size(), a.mean_se, a.std_error, a.p5_se, r.failed_drops);
    out += buf;
  }
  return out;
}

std::string cdf_csv(const ExperimentResult& r) {
  std::string out = "sweep_value,decoder,scheme,se,cdf\n";
  char buf[256];
  for (const auto& a : r.aggregates) {
    for (std::size_t i = 0; i < a.cdf.se.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.12g,%s,%s,%.12g,%.12g\n", a.sweep_value, to_string(a.decoder),
                    to_string(a.scheme), a.cdf.se[i], a.cdf.cdf[i]);
      out += buf;
    }
  }
  return out;
}

void write_experiment(const ExperimentResult& r, const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create output directory " + out_dir + ": " + ec.message());
  const auto put = [&](const char* name, const std::string& text) {
    const auto path = std::filesystem::path(out_dir) / name;
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::kIo, "cannot write " + path.string());
    f << text;
  };
  put("rows.csv", rows_csv(r));
  put("aggregates.csv", aggregates_csv(r));
  put("cdf.csv", cdf_csv(r));
}

ExperimentSpec table1_spec() {
  ExperimentSpec s;
  s.name = "table1";
  s.variable = SweepVariable::kDMeta;
  const double lambda = s.config.wavelength;
  s.values = {lambda, lambda / 2.0, lambda / 4.0, lambda / 8.0};
  s.schemes = {Scheme::kRandom, Scheme::kOptPhase};
  s.decoders = {Decoder::kLsfd};
  return s;
}

ExperimentSpec fig3_spec() {
  ExperimentSpec s;
  s.name = "fig3";
  s.config.U = 1;
  s.variable = SweepVariable::kLBudget;
  s.atom_budget = 1200;
  s.values = {5, 10, 15, 20, 30, 40};
  s.schemes = {Scheme::kRandom, Scheme::kOptPhase};
  s.decoders = {Decoder::kLsfd, Decoder::kEgcd};
  return s;
}

}  // namespace simcf
