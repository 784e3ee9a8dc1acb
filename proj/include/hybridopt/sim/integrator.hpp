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

#ifndef HYBRIDOPT_SIM_INTEGRATOR_HPP
#define HYBRIDOPT_SIM_INTEGRATOR_HPP

#include <vector>

#include "hybridopt/core/switched_system.hpp"

namespace hybridopt::sim {

enum class Scheme { kRk4, kEuler };

/// What to do when a step exceeds the event cap.
///   kThrow  - raise ZenoError.
///   kFreeze - stop localizing events and finish the step in the mode that
///             was active when the cap was hit. The step is flagged as
///             chattering. Sliding motion then shows up as dt-scale chatter.
enum class ZenoPolicy { kThrow, kFreeze };

struct IntegratorConfig {
  double dt = 0.01;
  Scheme scheme = Scheme::kRk4;
  double event_time_tol = 1e-9;
  int zeno_cap = 10;
  ZenoPolicy zeno_policy = ZenoPolicy::kThrow;

  void validate() const;
};

struct SwitchEvent {
  double time = 0.0;
  StateVector state;
  ModeId from_mode = 0;
  ModeId to_mode = 0;
  int boundary = -1;
};

struct StepResult {
  StateVector state;
  std::vector<SwitchEvent> events;
  bool chattering = false;
};

/// One explicit step of length h with the field of mode q frozen.
StateVector advance(const SwitchedSystem& sys, ModeId q, const StateVector& x,
                    const ControlVector& u, double t, double h, Scheme scheme);

/// Integrates one dt under zero-order-hold control `u` (assumed already
/// clamped). When a boundary changes sign over the step, the crossing time is
/// bisected to event_time_tol, an event is recorded if the mode changes, and
/// the remainder of the step continues with the re-classified mode.
StepResult step_with_events(const SwitchedSystem& sys, const StateVector& x,
                            const ControlVector& u, double t,
                            const IntegratorConfig& cfg);

}  // namespace hybridopt::sim

#endif  // HYBRIDOPT_SIM_INTEGRATOR_HPP
