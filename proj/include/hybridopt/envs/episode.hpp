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

#ifndef HYBRIDOPT_ENVS_EPISODE_HPP
#define HYBRIDOPT_ENVS_EPISODE_HPP

#include <Eigen/Dense>

#include "hybridopt/envs/benchmarks.hpp"
#include "hybridopt/sim/rollout.hpp"

namespace hybridopt::envs {

/// Scaled observation (x / obs_scale, t / t_f).
Eigen::VectorXd observe(const EnvConfig& env, const StateVector& x, double t);

/// Finite-horizon RL episode over an EnvConfig.
///
/// Rewards are -L(x_k, u_k) dt, so the negated return equals the cost of the
/// recorded trajectory. Single owner; one episode per worker.
class Episode {
 public:
  struct Outcome {
    Eigen::VectorXd observation;
    double reward = 0.0;
    bool done = false;
  };

  explicit Episode(const EnvConfig& env);

  Eigen::VectorXd reset();
  /// Clamps `action` to the control bounds and advances one dt.
  Outcome step(const ControlVector& action);

  bool done() const { return step_ == horizon_; }
  int step_index() const { return step_; }
  int horizon() const { return horizon_; }
  const StateVector& state() const { return trajectory_.states.back(); }
  Eigen::VectorXd observation() const;
  /// Trajectory recorded so far; total_cost is set once the episode is done.
  const sim::Trajectory& trajectory() const { return trajectory_; }

 private:
  const EnvConfig* env_;
  int horizon_;
  int step_ = 0;
  sim::Trajectory trajectory_;
};

}  // namespace hybridopt::envs

#endif  // HYBRIDOPT_ENVS_EPISODE_HPP
