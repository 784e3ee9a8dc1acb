/*
 Copyright 2026 The hybridopt Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "hybridopt/bench/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <thread>

#include "hybridopt/bench/plots.hpp"
#include "hybridopt/envs/benchmarks.hpp"
#include "hybridopt/hjb/hjb.hpp"
#include "hybridopt/hmp/hmp.hpp"

namespace hybridopt::bench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<std::pair<Method, std::string_view>, 5> kMethods = {{
    {Method::kDdpg, "ddpg"},
    {Method::kDdp, "ddp"},
    {Method::kHmp, "hmp"},
    {Method::kHjb, "hjb"},
    {Method::kOpenLoop, "openloop"},
}};

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void reject_unknown(const json& j, std::initializer_list<const char*> keys, const char* where) {
  if (!j.is_object()) throw InvalidInput(std::string("config: ") + where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& item : j.items()) {
    if (!allowed.count(item.key())) {
      throw InvalidInput(std::string("config: unknown key '") + item.key() + "' in " + where);
    }
  }
}

json ddpg_to_json(const ddpg::DdpgConfig& c) {
  return {{"episodes", c.episodes},     {"gamma", c.gamma},
          {"tau", c.tau},               {"lr_actor", c.lr_actor},
          {"lr_critic", c.lr_critic},   {"batch", c.batch},
          {"capacity", c.capacity},     {"warmup", c.warmup},
          {"sigma_start", c.sigma_start}, {"sigma_end", c.sigma_end},
          {"hidden", c.hidden},         {"reward_scale", c.reward_scale},
          {"best_k", c.best_k}};
}

void ddpg_from_json(const json& j, ddpg::DdpgConfig& c) {
  reject_unknown(j,
                 {"episodes", "gamma", "tau", "lr_actor", "lr_critic", "batch", "capacity",
                  "warmup", "sigma_start", "sigma_end", "hidden", "reward_scale", "best_k"},
                 "ddpg");
  take(j, "episodes", c.episodes);
  take(j, "gamma", c.gamma);
  take(j, "tau", c.tau);
  take(j, "lr_actor", c.lr_actor);
  take(j, "lr_critic", c.lr_critic);
  take(j, "batch", c.batch);
  take(j, "capacity", c.capacity);
  take(j, "warmup", c.warmup);
  take(j, "sigma_start", c.sigma_start);
  take(j, "sigma_end", c.sigma_end);
  take(j, "hidden", c.hidden);
  take(j, "reward_scale", c.reward_scale);
  take(j, "best_k", c.best_k);
}

json ddp_to_json(const ddp::DdpConfig& c) {
  return {{"max_iters", c.max_iters},   {"fd_step", c.fd_step},
          {"lambda_init", c.lambda_init}, {"lambda_min", c.lambda_min},
          {"lambda_max", c.lambda_max}, {"lambda_up", c.lambda_up},
          {"lambda_down", c.lambda_down}, {"alphas", c.alphas},
          {"tol", c.tol}};
}

void ddp_from_json(const json& j, ddp::DdpConfig& c) {
  reject_unknown(j,
                 {"max_iters", "fd_step", "lambda_init", "lambda_min", "lambda_max", "lambda_up",
                  "lambda_down", "alphas", "tol"},
                 "ddp");
  take(j, "max_iters", c.max_iters);
  take(j, "fd_step", c.fd_step);
  take(j, "lambda_init", c.lambda_init);
  take(j, "lambda_min", c.lambda_min);
  take(j, "lambda_max", c.lambda_max);
  take(j, "lambda_up", c.lambda_up);
  take(j, "lambda_down", c.lambda_down);
  take(j, "alphas", c.alphas);
  take(j, "tol", c.tol);
}

envs::EnvConfig build_env(const ExperimentConfig& cfg) {
  envs::EnvConfig env = envs::make_env(cfg.env);
  if (cfg.dt) {
    env.integrator.dt = *cfg.dt;
    env.integrator.validate();
    (void)env.horizon_steps();  // dt must divide the horizon
  }
  return env;
}

hjb::GridSpec grid_for(const ExperimentConfig& cfg, const envs::EnvConfig& env) {
  hjb::GridSpec g;
  g.lower = env.box.lower;
  g.upper = env.box.upper;
  const int n = env.system.state_dim();
  g.points = cfg.hjb.points.empty() ? std::vector<int>(static_cast<std::size_t>(n), n == 1 ? 2001 : 201)
                                    : cfg.hjb.points;
  g.nt = cfg.hjb.nt;
  g.n_u_samples = cfg.hjb.n_u_samples;
  return g;
}

template <typename Fn>
std::string write_file(const fs::path& root, const fs::path& rel, Fn&& fn) {
  const fs::path full = root / rel;
  std::ofstream os(full);
  if (!os) throw Error("cannot write " + full.string());
  fn(os);
  if (!os) throw Error("write failed: " + full.string());
  return rel.generic_string();
}

void write_trajectory(const fs::path& root, const fs::path& dir, const sim::Trajectory& traj,
                      std::vector<std::string>& artifacts) {
  artifacts.push_back(write_file(root, dir / "trajectory.csv",
                                 [&](std::ostream& os) { sim::write_trajectory_csv(os, traj); }));
  artifacts.push_back(write_file(root, dir / "events.csv",
                                 [&](std::ostream& os) { sim::write_events_csv(os, traj); }));
}

SeedResult run_seed(const ExperimentConfig& cfg, const envs::EnvConfig& env, std::uint64_t seed,
                    const fs::path& root) {
  SeedResult r;
  r.seed = seed;
  const fs::path dir = "seed_" + std::to_string(seed);
  fs::create_directories(root / dir);
  switch (cfg.method) {
    case Method::kOpenLoop: {
      const std::vector<ControlVector> zeros(static_cast<std::size_t>(env.horizon_steps()),
                                             ControlVector::Zero(env.system.control_dim()));
      const sim::Trajectory traj =
          sim::rollout_open_loop(env.system, env.x0, zeros, env.integrator);
      r.cost = traj.total_cost;
      write_trajectory(root, dir, traj, r.artifacts);
      break;
    }
    case Method::kDdp: {
      const ddp::DdpSolution sol = ddp::solve(env.system, env.x0, env.integrator, cfg.ddp);
      r.cost = sol.cost();
      write_trajectory(root, dir, sol.nominal, r.artifacts);
      r.artifacts.push_back(write_file(root, dir / "iterations.csv", [&](std::ostream& os) {
        ddp::write_iteration_log_csv(os, sol);
      }));
      r.artifacts.push_back(write_file(root, dir / "gains.csv", [&](std::ostream& os) {
        ddp::write_gains_csv(os, sol);
      }));
      break;
    }
    case Method::kDdpg: {
      ddpg::DdpgConfig dc = cfg.ddpg;
      dc.seed = seed;
      const ddpg::TrainResult res = ddpg::train(env, dc);
      r.cost = res.cost;
      const ddpg::Evaluation ev = ddpg::evaluate(res.best_actor, env);
      write_trajectory(root, dir, ev.trajectory, r.artifacts);
      r.artifacts.push_back(write_file(root, dir / "curve.csv", [&](std::ostream& os) {
        ddpg::write_learning_curve_csv(os, res.curve);
      }));
      r.artifacts.push_back(write_file(root, dir / "actor.txt", [&](std::ostream& os) {
        nn::save_mlp(os, res.best_actor);
      }));
      r.artifacts.push_back(write_file(root, dir / "critic.txt", [&](std::ostream& os) {
        nn::save_critic(os, res.nets.critic);
      }));
      break;
    }
    case Method::kHmp: {
      const hmp::HmpProblem problem = hmp::from_env(env);
      const hmp::Extremal ext = hmp::solve(problem, cfg.hmp.lambda_lo, cfg.hmp.lambda_hi,
                                           cfg.hmp.intervals);
      r.cost = ext.cost;
      r.artifacts.push_back(write_file(root, dir / "extremal.csv", [&](std::ostream& os) {
        hmp::write_extremal_csv(os, ext);
      }));
      break;
    }
    case Method::kHjb: {
      hjb::SolveOptions opts;
      opts.integrator = env.integrator;
      // seeds already run concurrently; keep each solve on one thread then
      opts.threads = cfg.seeds.size() > 1 ? 1 : 0;
      const hjb::ValueTable table = hjb::solve_backward(env.system, grid_for(cfg, env), opts);
      const sim::Trajectory traj = hjb::greedy_policy_eval(table, env.system, env.x0, opts);
      r.cost = traj.total_cost;
      write_trajectory(root, dir, traj, r.artifacts);
      const fs::path value = dir / "value.bin";
      table.save(root / value);
      r.artifacts.push_back(value.generic_string());
      r.artifacts.push_back(write_file(root, dir / "value_t0.csv", [&](std::ostream& os) {
        table.write_layer_csv(os, 0);
      }));
      break;
    }
  }
  return r;
}

}  // namespace

std::string_view method_name(Method m) {
  for (const auto& [id, name] : kMethods) {
    if (id == m) return name;
  }
  return "?";
}

Method parse_method(std::string_view name) {
  for (const auto& [id, n] : kMethods) {
    if (n == name) return id;
  }
  throw InvalidInput("unknown method '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  const envs::EnvConfig e = envs::make_env(env);  // throws on unknown names
  if (seeds.empty()) throw InvalidInput("config: at least one seed is required");
  const std::set<std::uint64_t> distinct(seeds.begin(), seeds.end());
  if (distinct.size() != seeds.size()) throw InvalidInput("config: seeds must be distinct");
  if (dt && !(*dt > 0.0)) throw InvalidInput("config: dt must be positive");
  (void)build_env(*this);
  if (workers < 0) throw InvalidInput("config: workers must be non-negative");
  if (method == Method::kDdpg) ddpg.validate();
  if (method == Method::kDdp) ddp.validate();
  if (method == Method::kHmp) {
    if (e.system.state_dim() != 1) throw InvalidInput("config: hmp needs a scalar env");
    if (!(hmp.lambda_lo < hmp.lambda_hi) || hmp.intervals < 1) {
      throw InvalidInput("config: bad hmp scan range");
    }
  }
  if (method == Method::kHjb) {
    if (!hjb.points.empty() && static_cast<int>(hjb.points.size()) != e.system.state_dim()) {
      throw InvalidInput("config: hjb.points needs one entry per state axis");
    }
  }
}

fs::path ExperimentConfig::output_dir() const {
  if (!out.empty()) return out;
  return default_output_root() / (env + "_" + std::string(method_name(method)));
}

fs::path default_output_root() {
  const char* v = std::getenv("HYBRIDOPT_OUT");
  return (v && *v) ? fs::path(v) : fs::path("runs");
}

json config_to_json(const ExperimentConfig& cfg) {
  json j = {{"env", cfg.env},
            {"method", std::string(method_name(cfg.method))},
            {"seeds", cfg.seeds},
            {"out", cfg.out},
            {"workers", cfg.workers},
            {"plots", cfg.plots}};
  j["dt"] = cfg.dt ? json(*cfg.dt) : json(nullptr);
  switch (cfg.method) {
    case Method::kDdpg:
      j["ddpg"] = ddpg_to_json(cfg.ddpg);
      break;
    case Method::kDdp:
      j["ddp"] = ddp_to_json(cfg.ddp);
      break;
    case Method::kHmp:
      j["hmp"] = {{"lambda_lo", cfg.hmp.lambda_lo},
                  {"lambda_hi", cfg.hmp.lambda_hi},
                  {"intervals", cfg.hmp.intervals}};
      break;
    case Method::kHjb:
      j["hjb"] = {{"points", cfg.hjb.points},
                  {"nt", cfg.hjb.nt},
                  {"n_u_samples", cfg.hjb.n_u_samples}};
      break;
    case Method::kOpenLoop:
      break;
  }
  return j;
}

ExperimentConfig config_from_json(const json& j, ExperimentConfig c) {
  try {
    reject_unknown(j,
                   {"env", "method", "seeds", "dt", "out", "workers", "plots", "ddpg", "ddp",
                    "hmp", "hjb"},
                   "top level");
    take(j, "env", c.env);
    if (j.contains("method")) c.method = parse_method(j.at("method").get<std::string>());
    take(j, "seeds", c.seeds);
    if (j.contains("dt")) {
      if (j.at("dt").is_null()) {
        c.dt.reset();
      } else {
        c.dt = j.at("dt").get<double>();
      }
    }
    take(j, "out", c.out);
    take(j, "workers", c.workers);
    take(j, "plots", c.plots);
    if (j.contains("ddpg")) ddpg_from_json(j.at("ddpg"), c.ddpg);
    if (j.contains("ddp")) ddp_from_json(j.at("ddp"), c.ddp);
    if (j.contains("hmp")) {
      const json& h = j.at("hmp");
      reject_unknown(h, {"lambda_lo", "lambda_hi", "intervals"}, "hmp");
      take(h, "lambda_lo", c.hmp.lambda_lo);
      take(h, "lambda_hi", c.hmp.lambda_hi);
      take(h, "intervals", c.hmp.intervals);
    }
    if (j.contains("hjb")) {
      const json& h = j.at("hjb");
      reject_unknown(h, {"points", "nt", "n_u_samples"}, "hjb");
      take(h, "points", c.hjb.points);
      take(h, "nt", c.hjb.nt);
      take(h, "n_u_samples", c.hjb.n_u_samples);
    }
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("config: ") + e.what());
  }
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw InvalidInput("cannot open config " + path.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw InvalidInput("config " + path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

Stats aggregate_stats(const std::vector<double>& values) {
  if (values.empty()) throw InvalidInput("aggregate_stats: no values");
  Stats s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double sq = 0.0;
    for (double v : values) sq += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(values.size() - 1));
  }
  return s;
}

bool RunSummary::ok() const {
  return !seeds.empty() &&
         std::all_of(seeds.begin(), seeds.end(), [](const SeedResult& r) { return r.error.empty(); });
}

std::vector<double> RunSummary::costs() const {
  std::vector<double> out;
  for (const auto& r : seeds) {
    if (r.cost) out.push_back(*r.cost);
  }
  return out;
}

json summary_to_json(const RunSummary& s) {
  json seeds = json::array();
  for (const auto& r : s.seeds) {
    json e = {{"seed", r.seed}, {"artifacts", r.artifacts}};
    e["cost"] = r.cost ? json(*r.cost) : json(nullptr);
    if (!r.error.empty()) e["error"] = r.error;
    seeds.push_back(std::move(e));
  }
  json j = {{"env", s.env},
            {"method", std::string(method_name(s.method))},
            {"seeds", std::move(seeds)},
            {"mean", std::isfinite(s.mean) ? json(s.mean) : json(nullptr)},
            {"std", std::isfinite(s.std) ? json(s.std) : json(nullptr)},
            {"wallclock", s.wallclock},
            {"config", s.config}};
  if (s.reference) j["reference"] = {{"method", "ddp"}, {"cost", *s.reference}};
  return j;
}

RunSummary summary_from_json(const json& j) {
  RunSummary s;
  try {
    s.env = j.at("env").get<std::string>();
    s.method = parse_method(j.at("method").get<std::string>());
    for (const json& e : j.at("seeds")) {
      SeedResult r;
      r.seed = e.at("seed").get<std::uint64_t>();
      if (!e.at("cost").is_null()) r.cost = e.at("cost").get<double>();
      r.artifacts = e.at("artifacts").get<std::vector<std::string>>();
      if (e.contains("error")) r.error = e.at("error").get<std::string>();
      s.seeds.push_back(std::move(r));
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    s.mean = j.at("mean").is_null() ? nan : j.at("mean").get<double>();
    s.std = j.at("std").is_null() ? nan : j.at("std").get<double>();
    s.wallclock = j.at("wallclock").get<double>();
    s.config = j.at("config");
    if (j.contains("reference")) s.reference = j.at("reference").at("cost").get<double>();
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("summary: ") + e.what());
  }
  return s;
}

void save_summary(const RunSummary& s) {
  fs::create_directories(s.root);
  std::ofstream os(s.root / "summary.json");
  if (!os) throw Error("cannot write " + (s.root / "summary.json").string());
  os << summary_to_json(s).dump(2) << '\n';
}

RunSummary load_summary(const fs::path& path) {
  const fs::path file = fs::is_directory(path) ? path / "summary.json" : path;
  std::ifstream is(file);
  if (!is) throw InvalidInput("cannot open summary " + file.string());
  json j;
  try {
    j = json::parse(is);
  } catch (const json::exception& e) {
    throw InvalidInput("summary " + file.string() + ": " + e.what());
  }
  RunSummary s = summary_from_json(j);
  s.root = file.parent_path();
  return s;
}

RunSummary run_suite(const ExperimentConfig& cfg, const ProgressFn& progress) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const envs::EnvConfig env = build_env(cfg);
  RunSummary summary;
  summary.env = cfg.env;
  summary.method = cfg.method;
  summary.config = config_to_json(cfg);
  summary.root = cfg.output_dir();
  fs::create_directories(summary.root);
  summary.seeds.resize(cfg.seeds.size());

  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers =
      std::min(cfg.seeds.size(), cfg.workers > 0 ? static_cast<std::size_t>(cfg.workers) : hw);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cfg.seeds.size(); i = next++) {
      const std::uint64_t seed = cfg.seeds[i];
      SeedResult r;
      try {
        r = run_seed(cfg, env, seed, summary.root);
      } catch (const std::exception& e) {
        r = SeedResult{};
        r.seed = seed;
        r.error = e.what();
      }
      if (progress) {
        std::lock_guard<std::mutex> lock(log_mutex);
        progress(cfg.env + " " + std::string(method_name(cfg.method)) + " seed " +
                 std::to_string(seed) + ": " +
                 (r.cost ? std::to_string(*r.cost) : "error: " + r.error));
      }
      summary.seeds[i] = std::move(r);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  const std::vector<double> costs = summary.costs();
  if (!costs.empty()) {
    const Stats st = aggregate_stats(costs);
    summary.mean = st.mean;
    summary.std = st.std;
  } else {
    summary.mean = std::numeric_limits<double>::quiet_NaN();
    summary.std = std::numeric_limits<double>::quiet_NaN();
  }
  if (cfg.method == Method::kDdpg && env.system.state_dim() == 2) {
    summary.reference = ddp::solve(env.system, env.x0, env.integrator, cfg.ddp).cost();
  }
  summary.wallclock = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  save_summary(summary);
  if (cfg.plots) {
    const PlotOutput plots = emit_plots(summary);
    if (progress) {
      for (const auto& n : plots.notices) progress("plots: " + n);
    }
  }
  return summary;
}

}  // namespace hybridopt::bench
