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

#ifndef HYBRIDOPT_ENVS_BENCHMARKS_HPP
#define HYBRIDOPT_ENVS_BENCHMARKS_HPP

#include <array>
#include <string>
#include <string_view>

#include "hybridopt/sim/integrator.hpp"

namespace hybridopt::envs {

struct StateBox {
  StateVector lower;
  StateVector upper;

  bool contains(const StateVector& x) const {
    return (x.array() >= lower.array()).all() && (x.array() <= upper.array()).all();
  }
};

/// A benchmark problem plus everything an episode runner needs.
struct EnvConfig {
  std::string name;
  SwitchedSystem system;
  StateVector x0;
  /// Observation channel i is x_i / obs_scale_i; time is reported as t / t_f.
  StateVector obs_scale;
  /// Declared operating box: observation range, plot limits, grid extents.
  StateBox box;
  sim::IntegratorConfig integrator;

  int horizon_steps() const;
  double control_limit() const { return system.bounds().upper.cwiseAbs().maxCoeff(); }
};

/// Four-region planar system, uniform cost 0.5 (x'x + u^2), x0 = (-8, -6).
EnvConfig make_example1();
/// Example 1 dynamics with regional cost scales (0.5, 0.5, 5, 0.5).
EnvConfig make_example2();
/// Seven-region "sea" system on [0,10]^2 plus complement, x0 = (8, 8).
EnvConfig make_example3();
/// 1-D: xdot = 2u for x > 1, u for x < 1.
EnvConfig make_analytic1();
/// 1-D: xdot = 2x + u for x > 1, -x + u for x < 1.
EnvConfig make_analytic2();

inline constexpr std::array<std::string_view, 5> kEnvNames = {
    "ex1", "ex2", "ex3", "analytic1", "analytic2"};

/// Looks up a benchmark by its registered name; InvalidInput otherwise.
EnvConfig make_env(std::string_view name);

}  // namespace hybridopt::envs

#endif  // HYBRIDOPT_ENVS_BENCHMARKS_HPP
