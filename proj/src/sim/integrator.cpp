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

#include "hybridopt/sim/integrator.hpp"

#include <cmath>
#include <limits>

namespace hybridopt::sim {

namespace {

// True once g has left the sign it had at the start of the substep. A start
// exactly on the surface counts as crossed once g takes the sign of `g_end`.
bool has_crossed(double g_start, double g_end, double g) {
  if (g_start > 0.0) return g <= 0.0;
  if (g_start < 0.0) return g >= 0.0;
  return g_end > 0.0 ? g > 0.0 : g < 0.0;
}

bool sign_changes(double g_start, double g_end) {
  if (g_end == 0.0) return false;
  return g_start == 0.0 || (g_start < 0.0) != (g_end < 0.0);
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw InvalidInput("IntegratorConfig: dt must be positive");
  }
  if (!(event_time_tol > 0.0) || !(event_time_tol < dt)) {
    throw InvalidInput("IntegratorConfig: need 0 < event_time_tol < dt");
  }
  if (zeno_cap < 1) throw InvalidInput("IntegratorConfig: zeno_cap must be >= 1");
}

StateVector advance(const SwitchedSystem& sys, ModeId q, const StateVector& x,
                    const ControlVector& u, double t, double h, Scheme scheme) {
  if (scheme == Scheme::kEuler) return x + h * sys.mode_field(q, x, u, t);
  const StateVector k1 = sys.mode_field(q, x, u, t);
  const StateVector k2 = sys.mode_field(q, x + 0.5 * h * k1, u, t + 0.5 * h);
  const StateVector k3 = sys.mode_field(q, x + 0.5 * h * k2, u, t + 0.5 * h);
  const StateVector k4 = sys.mode_field(q, x + h * k3, u, t + h);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

StepResult step_with_events(const SwitchedSystem& sys, const StateVector& x,
                            const ControlVector& u, double t,
                            const IntegratorConfig& cfg) {
  if (!x.allFinite() || !u.allFinite()) {
    throw InvalidInput("step_with_events: non-finite state or control");
  }
  StepResult result;
  StateVector cur = x;
  ModeId q = sys.classify(cur);
  BoundaryVector g_cur = sys.boundary_vector(cur);
  double elapsed = 0.0;
  int events = 0;
  // Inward moves off a surface cost an iteration without producing an event;
  // bound the total so a degenerate geometry cannot spin forever.
  const int max_iterations =
      (cfg.zeno_cap + 2) * (static_cast<int>(g_cur.size()) + 2);

  for (int iteration = 0;; ++iteration) {
    const double remaining = cfg.dt - elapsed;
    const double t_cur = t + elapsed;
    StateVector next = advance(sys, q, cur, u, t_cur, remaining, cfg.scheme);
    const BoundaryVector g_next = sys.boundary_vector(next);

    double crossing = std::numeric_limits<double>::infinity();
    int crossed_boundary = -1;
    for (Eigen::Index b = 0; b < g_cur.size(); ++b) {
      if (!sign_changes(g_cur[b], g_next[b])) continue;
      double lo = 0.0;
      double hi = remaining;
      while (hi - lo > cfg.event_time_tol) {
        const double mid = 0.5 * (lo + hi);
        const StateVector xm = advance(sys, q, cur, u, t_cur, mid, cfg.scheme);
        if (has_crossed(g_cur[b], g_next[b], sys.boundaries()[b].value(xm))) {
          hi = mid;
        } else {
          lo = mid;
        }
      }
      if (hi < crossing) {
        crossing = hi;
        crossed_boundary = static_cast<int>(b);
      }
    }

    if (crossed_boundary < 0) {
      result.state = std::move(next);
      return result;
    }

    const StateVector x_event =
        advance(sys, q, cur, u, t_cur, crossing, cfg.scheme);
    const BoundaryVector g_event = sys.boundary_vector(x_event);
    const ModeId q_event = sys.classify_from_values(g_event, x_event);

    if (q_event != q) {
      if (events == cfg.zeno_cap || iteration >= max_iterations) {
        if (cfg.zeno_policy == ZenoPolicy::kThrow) {
          throw ZenoError("step_with_events: more than " +
                              std::to_string(cfg.zeno_cap) +
                              " switching events within one step",
                          t_cur + crossing);
        }
        result.chattering = true;
        result.state = std::move(next);
        return result;
      }
      ++events;
      result.events.push_back(
          {t_cur + crossing, x_event, q, q_event, crossed_boundary});
      q = q_event;
    } else if (iteration >= max_iterations) {
      result.state = std::move(next);
      return result;
    }

    elapsed += crossing;
    cur = x_event;
    g_cur = g_event;
    if (cfg.dt - elapsed <= 0.0) {
      result.state = std::move(cur);
      return result;
    }
  }
}

}  // namespace hybridopt::sim
