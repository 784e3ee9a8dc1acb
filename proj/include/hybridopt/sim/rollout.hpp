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

#ifndef HYBRIDOPT_SIM_ROLLOUT_HPP
#define HYBRIDOPT_SIM_ROLLOUT_HPP

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "hybridopt/sim/integrator.hpp"

namespace hybridopt::sim {

/// Sampled solution of one finite-horizon rollout.
///
/// states, times and modes have N+1 entries; controls and step_costs have N.
/// total_cost is the left-endpoint sum of step_costs plus the terminal cost.
struct Trajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  std::vector<ControlVector> controls;
  std::vector<ModeId> modes;
  std::vector<double> step_costs;
  std::vector<SwitchEvent> events;
  double terminal_cost = 0.0;
  double total_cost = 0.0;
  int chattering_steps = 0;

  int num_steps() const { return static_cast<int>(controls.size()); }
};

using Policy = std::function<ControlVector(const StateVector& x, double t)>;
using Noise = std::function<ControlVector(int step)>;

/// round(t_f / dt); throws InvalidInput when dt does not divide the horizon.
int horizon_steps(const SwitchedSystem& sys, const IntegratorConfig& cfg);

/// Appends one zero-order-hold step to `traj`. Used by the rollouts and by
/// solvers that build trajectories incrementally.
void append_step(const SwitchedSystem& sys, Trajectory& traj,
                 const ControlVector& u_clamped, const IntegratorConfig& cfg);

/// Starts a trajectory at x0 (no steps yet).
Trajectory start_trajectory(const SwitchedSystem& sys, const StateVector& x0);

/// Adds the terminal cost and the final cost total.
void finish_trajectory(const SwitchedSystem& sys, Trajectory& traj);

Trajectory rollout_open_loop(const SwitchedSystem& sys, const StateVector& x0,
                             std::span<const ControlVector> controls,
                             const IntegratorConfig& cfg);

/// u_k = clamp(policy(x_k, t_k) + noise(k)).
Trajectory rollout_policy(const SwitchedSystem& sys, const StateVector& x0,
                          const Policy& policy, const Noise& noise,
                          const IntegratorConfig& cfg);

/// Columns t, x_1..x_n, u_1..u_m, mode, step_cost. The final row has no
/// control or step cost.
void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
/// Columns tau, x_1..x_n, from, to, boundary.
void write_events_csv(std::ostream& os, const Trajectory& traj);

}  // namespace hybridopt::sim

#endif  // HYBRIDOPT_SIM_ROLLOUT_HPP
