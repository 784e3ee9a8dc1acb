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

#ifndef HYBRIDOPT_BENCH_REPORT_HPP
#define HYBRIDOPT_BENCH_REPORT_HPP

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "hybridopt/bench/experiment.hpp"

namespace hybridopt::bench {

/// One acceptance band evaluated against run means.
struct BandCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

/// Bands that apply to the given per-method means on `env`. A band that
/// involves a method without a mean is left out.
std::vector<BandCheck> acceptance_bands(const std::string& env,
                                        const std::map<Method, double>& means);

struct Comparison {
  struct Row {
    Method method;
    int n = 0;
    double mean = 0.0;
    double std = 0.0;
    int failed_seeds = 0;
  };
  struct Delta {
    std::size_t a = 0;  // row indices
    std::size_t b = 0;
    double value = 0.0;  // mean_b - mean_a
  };

  std::string env;
  std::vector<Row> rows;
  std::vector<Delta> deltas;
  std::vector<BandCheck> bands;

  bool all_pass() const;
  std::string text() const;
  nlohmann::json to_json() const;
};

/// Needs at least two summaries over one env (InvalidInput otherwise).
Comparison compare_report(const std::vector<RunSummary>& summaries);

/// Bands for a single run, used by --check.
std::vector<BandCheck> check_summary(const RunSummary& summary);

}  // namespace hybridopt::bench

#endif  // HYBRIDOPT_BENCH_REPORT_HPP
