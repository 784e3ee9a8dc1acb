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

#include "hybridopt/sim/rollout.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace hybridopt::sim {

int horizon_steps(const SwitchedSystem& sys, const IntegratorConfig& cfg) {
  cfg.validate();
  const double ratio = sys.horizon() / cfg.dt;
  const double steps = std::round(ratio);
  if (std::abs(steps * cfg.dt - sys.horizon()) > 1e-9 * std::max(1.0, sys.horizon())) {
    throw InvalidInput("horizon is not an integer multiple of dt");
  }
  return static_cast<int>(steps);
}

Trajectory start_trajectory(const SwitchedSystem& sys, const StateVector& x0) {
  if (x0.size() != sys.state_dim() || !x0.allFinite()) {
    throw InvalidInput("rollout: initial state has wrong size or is not finite");
  }
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  traj.modes.push_back(sys.classify(x0));
  return traj;
}

void append_step(const SwitchedSystem& sys, Trajectory& traj,
                 const ControlVector& u_clamped, const IntegratorConfig& cfg) {
  const int k = traj.num_steps();
  const StateVector& x = traj.states.back();
  const double t = k * cfg.dt;
  StepResult step;
  try {
    step = step_with_events(sys, x, u_clamped, t, cfg);
  } catch (const ZenoError& e) {
    throw e.with_step(k);
  }
  traj.step_costs.push_back(sys.stage_cost(x, u_clamped) * cfg.dt);
  traj.controls.push_back(u_clamped);
  traj.times.push_back((k + 1) * cfg.dt);
  traj.modes.push_back(sys.classify(step.state));
  traj.states.push_back(std::move(step.state));
  traj.events.insert(traj.events.end(), step.events.begin(), step.events.end());
  if (step.chattering) ++traj.chattering_steps;
}

void finish_trajectory(const SwitchedSystem& sys, Trajectory& traj) {
  traj.terminal_cost = sys.terminal_cost(traj.states.back());
  double sum = 0.0;
  for (double c : traj.step_costs) sum += c;
  traj.total_cost = sum + traj.terminal_cost;
}

Trajectory rollout_open_loop(const SwitchedSystem& sys, const StateVector& x0,
                             std::span<const ControlVector> controls,
                             const IntegratorConfig& cfg) {
  const int n = horizon_steps(sys, cfg);
  if (static_cast<int>(controls.size()) != n) {
    throw InvalidInput("rollout_open_loop: expected " + std::to_string(n) +
                       " controls, got " + std::to_string(controls.size()));
  }
  Trajectory traj = start_trajectory(sys, x0);
  traj.controls.reserve(n);
  for (const ControlVector& u : controls) {
    if (u.size() != sys.control_dim() || !u.allFinite()) {
      throw InvalidInput("rollout_open_loop: malformed control");
    }
    append_step(sys, traj, sys.bounds().clamp(u), cfg);
  }
  finish_trajectory(sys, traj);
  return traj;
}

Trajectory rollout_policy(const SwitchedSystem& sys, const StateVector& x0,
                          const Policy& policy, const Noise& noise,
                          const IntegratorConfig& cfg) {
  const int n = horizon_steps(sys, cfg);
  Trajectory traj = start_trajectory(sys, x0);
  for (int k = 0; k < n; ++k) {
    ControlVector u = policy(traj.states.back(), k * cfg.dt);
    if (u.size() != sys.control_dim() || !u.allFinite()) {
      throw InvalidInput("rollout_policy: policy returned a malformed control");
    }
    if (noise) u += noise(k);
    append_step(sys, traj, sys.bounds().clamp(u), cfg);
  }
  finish_trajectory(sys, traj);
  return traj;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const Eigen::Index nx = traj.states.empty() ? 0 : traj.states.front().size();
  const Eigen::Index nu = traj.controls.empty() ? 0 : traj.controls.front().size();
  os << "t";
  for (Eigen::Index i = 0; i < nx; ++i) os << ",x_" << i + 1;
  for (Eigen::Index i = 0; i < nu; ++i) os << ",u_" << i + 1;
  os << ",mode,step_cost\n";
  os << std::setprecision(17);
  for (std::size_t k = 0; k < traj.states.size(); ++k) {
    os << traj.times[k];
    for (Eigen::Index i = 0; i < nx; ++i) os << ',' << traj.states[k][i];
    const bool has_control = k < traj.controls.size();
    for (Eigen::Index i = 0; i < nu; ++i) {
      os << ',';
      if (has_control) os << traj.controls[k][i];
    }
    os << ',' << traj.modes[k] << ',';
    if (has_control) os << traj.step_costs[k];
    os << '\n';
  }
}

void write_events_csv(std::ostream& os, const Trajectory& traj) {
  const Eigen::Index nx = traj.states.empty() ? 0 : traj.states.front().size();
  os << "tau";
  for (Eigen::Index i = 0; i < nx; ++i) os << ",x_" << i + 1;
  os << ",from,to,boundary\n";
  os << std::setprecision(17);
  for (const SwitchEvent& e : traj.events) {
    os << e.time;
    for (Eigen::Index i = 0; i < nx; ++i) os << ',' << e.state[i];
    os << ',' << e.from_mode << ',' << e.to_mode << ',' << e.boundary << '\n';
  }
}

}  // namespace hybridopt::sim
