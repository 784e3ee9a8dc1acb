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

// Command-line front end: one subcommand per method plus compare/check.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "hybridopt/bench/experiment.hpp"
#include "hybridopt/bench/plots.hpp"
#include "hybridopt/bench/report.hpp"

namespace fs = std::filesystem;
using namespace hybridopt;
using namespace hybridopt::bench;

namespace {

struct RunFlags {
  std::string config;
  std::string env;
  std::optional<std::uint64_t> seed;
  std::string seeds;
  std::optional<double> dt;
  std::optional<int> episodes;
  std::string out;
  std::optional<int> workers;
  bool no_plots = false;
  bool check = false;
};

// "1,2,5" or "1-10" or a mix.
std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    try {
      const auto dash = part.find('-');
      if (dash != std::string::npos && dash > 0) {
        const auto lo = std::stoull(part.substr(0, dash));
        const auto hi = std::stoull(part.substr(dash + 1));
        if (hi < lo) throw InvalidInput("bad seed range " + part);
        for (auto s = lo; s <= hi; ++s) out.push_back(s);
      } else {
        out.push_back(std::stoull(part));
      }
    } catch (const std::logic_error&) {
      throw InvalidInput("bad seed list '" + text + "'");
    }
  }
  if (out.empty()) throw InvalidInput("empty seed list");
  return out;
}

void add_run_flags(CLI::App* cmd, RunFlags& f, bool learning) {
  cmd->add_option("--config", f.config, "JSON experiment config; flags override it");
  cmd->add_option("--env", f.env, "ex1, ex2, ex3, analytic1 or analytic2");
  cmd->add_option("--seed", f.seed, "single seed");
  cmd->add_option("--seeds", f.seeds, "seed list such as 1,2,3 or 1-10");
  cmd->add_option("--dt", f.dt, "integration step override");
  if (learning) cmd->add_option("--episodes", f.episodes, "training episodes");
  cmd->add_option("--out", f.out, "output directory (default $HYBRIDOPT_OUT/<env>_<method>)");
  cmd->add_option("--workers", f.workers, "seeds run concurrently");
  cmd->add_flag("--no-plots", f.no_plots, "skip SVG output");
  cmd->add_flag("--check", f.check, "exit non-zero unless the acceptance bands pass");
}

ExperimentConfig resolve(const RunFlags& f, Method method) {
  ExperimentConfig cfg;
  if (!f.config.empty()) {
    cfg = load_config(f.config);
    if (cfg.method != method && cfg.method != Method::kOpenLoop) {
      throw InvalidInput("config method '" + std::string(method_name(cfg.method)) +
                         "' does not match the subcommand");
    }
  }
  cfg.method = method;
  if (!f.env.empty()) cfg.env = f.env;
  if (f.seed && !f.seeds.empty()) throw UsageError("give --seed or --seeds, not both");
  if (f.seed) cfg.seeds = {*f.seed};
  if (!f.seeds.empty()) cfg.seeds = parse_seeds(f.seeds);
  if (f.dt) cfg.dt = f.dt;
  if (f.episodes) cfg.ddpg.episodes = *f.episodes;
  if (!f.out.empty()) cfg.out = f.out;
  if (f.workers) cfg.workers = *f.workers;
  if (f.no_plots) cfg.plots = false;
  return cfg;
}

int run(const RunFlags& f, Method method) {
  const ExperimentConfig cfg = resolve(f, method);
  const RunSummary s =
      run_suite(cfg, [](const std::string& line) { std::cerr << line << '\n'; });
  std::cout << s.env << ' ' << method_name(s.method) << ": mean " << s.mean << " std " << s.std
            << " over " << s.costs().size() << " seed(s), " << s.wallclock << " s\n";
  std::cout << "summary: " << (s.root / "summary.json").string() << '\n';
  int code = s.ok() ? 0 : 1;
  for (const auto& r : s.seeds) {
    if (!r.error.empty()) std::cerr << "seed " << r.seed << " failed: " << r.error << '\n';
  }
  if (f.check) {
    for (const auto& b : check_summary(s)) {
      std::cout << (b.pass ? "PASS " : "FAIL ") << b.name << ": " << b.detail << '\n';
      if (!b.pass) code = 1;
    }
  }
  return code;
}

// Artifacts exist and parse; stored stats match the per-seed costs.
std::vector<std::string> audit(const RunSummary& s) {
  std::vector<std::string> problems;
  for (const auto& r : s.seeds) {
    if (!r.error.empty()) problems.push_back("seed " + std::to_string(r.seed) + ": " + r.error);
    for (const auto& a : r.artifacts) {
      const fs::path p = s.root / a;
      try {
        if (p.extension() == ".csv") {
          read_csv(p);
        } else if (!fs::exists(p)) {
          throw InvalidInput("missing file " + p.string());
        }
      } catch (const std::exception& e) {
        problems.push_back(e.what());
      }
    }
  }
  const auto costs = s.costs();
  if (!costs.empty()) {
    const Stats st = aggregate_stats(costs);
    if (st.mean != s.mean || st.std != s.std) {
      problems.push_back("stored mean/std do not match the per-seed costs");
    }
  }
  return problems;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Optimal control of state-dependent switched systems: DDPG, DDP, HMP and HJB."};
  app.require_subcommand(1);

  RunFlags sim_f, ddp_f, ddpg_f, hmp_f, hjb_f;
  auto* sim_cmd = app.add_subcommand("simulate", "open-loop u = 0 rollout");
  add_run_flags(sim_cmd, sim_f, false);
  auto* ddp_cmd = app.add_subcommand("ddp", "iLQR through the event-aware step");
  add_run_flags(ddp_cmd, ddp_f, false);
  auto* ddpg_cmd = app.add_subcommand("ddpg", "train DDPG agents, one per seed");
  add_run_flags(ddpg_cmd, ddpg_f, true);
  auto* hmp_cmd = app.add_subcommand("hmp", "minimum-principle shooting (scalar envs)");
  add_run_flags(hmp_cmd, hmp_f, false);
  auto* hjb_cmd = app.add_subcommand("hjb", "semi-Lagrangian value grid and greedy rollout");
  add_run_flags(hjb_cmd, hjb_f, false);

  std::vector<std::string> cmp_inputs;
  std::string cmp_out;
  bool cmp_check = false;
  auto* cmp_cmd = app.add_subcommand("compare", "side-by-side report of run summaries");
  cmp_cmd->add_option("summaries", cmp_inputs, "summary.json files or run directories")
      ->required();
  cmp_cmd->add_option("--out", cmp_out, "write report.json and report.txt here");
  cmp_cmd->add_flag("--check", cmp_check, "exit non-zero unless the acceptance bands pass");

  std::vector<std::string> chk_inputs;
  auto* chk_cmd = app.add_subcommand("check", "audit summaries and evaluate acceptance bands");
  chk_cmd->add_option("summaries", chk_inputs, "summary.json files or run directories")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*sim_cmd) return run(sim_f, Method::kOpenLoop);
    if (*ddp_cmd) return run(ddp_f, Method::kDdp);
    if (*ddpg_cmd) return run(ddpg_f, Method::kDdpg);
    if (*hmp_cmd) return run(hmp_f, Method::kHmp);
    if (*hjb_cmd) return run(hjb_f, Method::kHjb);
    if (*cmp_cmd) {
      std::vector<RunSummary> ss;
      for (const auto& p : cmp_inputs) ss.push_back(load_summary(p));
      const Comparison c = compare_report(ss);
      std::cout << c.text();
      if (!cmp_out.empty()) {
        fs::create_directories(cmp_out);
        std::ofstream(fs::path(cmp_out) / "report.json") << c.to_json().dump(2) << '\n';
        std::ofstream(fs::path(cmp_out) / "report.txt") << c.text();
      }
      return (cmp_check && !c.all_pass()) ? 1 : 0;
    }
    if (*chk_cmd) {
      int code = 0;
      for (const auto& p : chk_inputs) {
        const RunSummary s = load_summary(p);
        std::cout << p << " (" << s.env << ' ' << method_name(s.method) << ")\n";
        for (const auto& problem : audit(s)) {
          std::cout << "FAIL " << problem << '\n';
          code = 1;
        }
        for (const auto& b : check_summary(s)) {
          std::cout << (b.pass ? "PASS " : "FAIL ") << b.name << ": " << b.detail << '\n';
          if (!b.pass) code = 1;
        }
      }
      return code;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
