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

#ifndef HYBRIDOPT_BENCH_EXPERIMENT_HPP
#define HYBRIDOPT_BENCH_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "hybridopt/ddp/ddp.hpp"
#include "hybridopt/ddpg/ddpg.hpp"

// Multi-seed experiment runs and their JSON summaries.
namespace hybridopt::bench {

enum class Method { kDdpg, kDdp, kHmp, kHjb, kOpenLoop };

std::string_view method_name(Method m);
/// InvalidInput for unknown names.
Method parse_method(std::string_view name);

struct HmpSettings {
  double lambda_lo = -20.0;
  double lambda_hi = 20.0;
  int intervals = 400;
};

struct HjbSettings {
  /// Grid points per axis over the env's state box; empty picks 2001 in 1-D
  /// and 201 per axis in 2-D.
  std::vector<int> points;
  int nt = 200;
  int n_u_samples = 401;
};

struct ExperimentConfig {
  std::string env = "ex1";
  Method method = Method::kOpenLoop;
  std::vector<std::uint64_t> seeds{0};
  /// Overrides the env's step size when set.
  std::optional<double> dt;
  /// Output directory; empty means default_output_root() / "<env>_<method>".
  std::string out;
  /// Concurrent seeds; 0 means hardware concurrency.
  int workers = 0;
  bool plots = true;
  ddpg::DdpgConfig ddpg;
  ddp::DdpConfig ddp;
  HmpSettings hmp;
  HjbSettings hjb;

  void validate() const;
  std::filesystem::path output_dir() const;
};

/// $HYBRIDOPT_OUT when set, otherwise "runs".
std::filesystem::path default_output_root();

nlohmann::json config_to_json(const ExperimentConfig& cfg);
/// Keys present in `j` override `base`; unknown keys are rejected.
ExperimentConfig config_from_json(const nlohmann::json& j, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path);

struct Stats {
  double mean = 0.0;
  double std = 0.0;  // sample (n - 1) deviation, 0 for n = 1
};

/// InvalidInput on empty input.
Stats aggregate_stats(const std::vector<double>& values);

struct SeedResult {
  std::uint64_t seed = 0;
  std::optional<double> cost;
  /// Paths relative to the summary's directory.
  std::vector<std::string> artifacts;
  std::string error;
};

struct RunSummary {
  std::string env;
  Method method = Method::kOpenLoop;
  std::vector<SeedResult> seeds;
  /// Over the seeds that produced a cost.
  double mean = 0.0;
  double std = 0.0;
  double wallclock = 0.0;
  /// DDP cost on the same env, attached to learning runs for comparison.
  std::optional<double> reference;
  nlohmann::json config;
  /// Directory holding summary.json; artifact paths resolve against it.
  std::filesystem::path root;

  bool ok() const;
  std::vector<double> costs() const;
};

nlohmann::json summary_to_json(const RunSummary& s);
RunSummary summary_from_json(const nlohmann::json& j);
/// Writes root / "summary.json".
void save_summary(const RunSummary& s);
/// Accepts the summary file or its directory.
RunSummary load_summary(const std::filesystem::path& path);

using ProgressFn = std::function<void(const std::string& line)>;

/// Runs every seed (concurrently up to cfg.workers), writes per-seed
/// artifacts under output_dir()/seed_<k>/, the summary and, when enabled,
/// the plots. Seeds that throw are reported in their SeedResult.
RunSummary run_suite(const ExperimentConfig& cfg, const ProgressFn& progress = {});

}  // namespace hybridopt::bench

#endif  // HYBRIDOPT_BENCH_EXPERIMENT_HPP
