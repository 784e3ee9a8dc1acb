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

#include "hybridopt/envs/episode.hpp"

namespace hybridopt::envs {

Eigen::VectorXd observe(const EnvConfig& env, const StateVector& x, double t) {
  const Eigen::Index n = x.size();
  Eigen::VectorXd obs(n + 1);
  obs.head(n) = x.cwiseQuotient(env.obs_scale);
  const double tf = env.system.horizon();
  obs[n] = tf > 0.0 ? t / tf : 0.0;
  return obs;
}

Episode::Episode(const EnvConfig& env)
    : env_(&env), horizon_(env.horizon_steps()) {
  reset();
}

Eigen::VectorXd Episode::reset() {
  step_ = 0;
  trajectory_ = sim::start_trajectory(env_->system, env_->x0);
  if (horizon_ == 0) sim::finish_trajectory(env_->system, trajectory_);
  return observation();
}

Eigen::VectorXd Episode::observation() const {
  return observe(*env_, state(), step_ * env_->integrator.dt);
}

Episode::Outcome Episode::step(const ControlVector& action) {
  if (done()) throw UsageError("Episode::step: episode is already done");
  if (action.size() != env_->system.control_dim() || !action.allFinite()) {
    throw InvalidInput("Episode::step: malformed action");
  }
  sim::append_step(env_->system, trajectory_, env_->system.bounds().clamp(action),
                   env_->integrator);
  ++step_;
  Outcome out;
  out.reward = -trajectory_.step_costs.back();
  out.done = done();
  if (out.done) {
    sim::finish_trajectory(env_->system, trajectory_);
    out.reward -= trajectory_.terminal_cost;
  }
  out.observation = observation();
  return out;
}

}  // namespace hybridopt::envs
