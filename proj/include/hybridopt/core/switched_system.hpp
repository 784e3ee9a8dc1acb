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

#ifndef HYBRIDOPT_CORE_SWITCHED_SYSTEM_HPP
#define HYBRIDOPT_CORE_SWITCHED_SYSTEM_HPP

#include <functional>
#include <optional>
#include <vector>

#include "hybridopt/common/errors.hpp"
#include "hybridopt/common/types.hpp"

namespace hybridopt {

/// Affine switching surface g(x) = normal . x + offset.
struct AffineBoundary {
  StateVector normal;
  double offset = 0.0;

  double value(const StateVector& x) const { return normal.dot(x) + offset; }
};

enum class Side { kNonNegative, kNonPositive };

/// Closed half-space {x : g(x) >= 0} or {x : g(x) <= 0}.
struct HalfSpace {
  AffineBoundary boundary;
  Side side = Side::kNonNegative;

  /// Signed slack, positive strictly inside, scaled to Euclidean distance.
  double slack(const StateVector& x) const;
  bool contains(const StateVector& x) const;
};

struct RegionSpec {
  ModeId id = 0;
  /// Conjunction of closed half-spaces. Empty means the whole state space.
  std::vector<HalfSpace> constraints;
  StateVector witness;

  bool contains(const StateVector& x) const;
  /// Minimum slack over the constraints (+inf when unconstrained).
  double slack(const StateVector& x) const;
};

/// Vector field of a single mode: either A x + B u or an arbitrary smooth
/// callback f(x, u, t).
class ModeDynamics {
 public:
  using Field = std::function<StateVector(const StateVector&,
                                          const ControlVector&, double)>;

  static ModeDynamics linear(StateMatrix a, InputMatrix b);
  static ModeDynamics general(Field field);

  StateVector evaluate(const StateVector& x, const ControlVector& u,
                       double t) const {
    if (field_) return field_(x, u, t);
    return a_ * x + b_ * u;
  }

  bool is_linear() const { return !field_; }
  /// Only valid for linear dynamics.
  const StateMatrix& a() const;
  const InputMatrix& b() const;

 private:
  ModeDynamics() = default;

  StateMatrix a_;
  InputMatrix b_;
  Field field_;
};

/// L(x, u) = scale * (x' Wx x + u' Wu u).
struct StageCost {
  double scale = 1.0;
  StateMatrix state_weight;
  ControlMatrix control_weight;

  static StageCost identity(int state_dim, int control_dim, double scale);

  double operator()(const StateVector& x, const ControlVector& u) const {
    return scale * (x.dot(state_weight * x) + u.dot(control_weight * u));
  }
};

struct Mode {
  RegionSpec region;
  ModeDynamics dynamics;
  StageCost cost;
};

struct ControlBounds {
  ControlVector lower;
  ControlVector upper;

  static ControlBounds symmetric(int control_dim, double bound);
  ControlVector clamp(const ControlVector& u) const {
    return u.cwiseMax(lower).cwiseMin(upper);
  }
};

using TerminalCost = std::function<double(const StateVector&)>;

struct BoundaryValue {
  int id = 0;
  double value = 0.0;
};

/// Multi-region state-dependent switched system together with its cost.
///
/// Modes carry ids 1..m. A state is assigned to the lowest-id mode whose
/// closed region contains it; states claimed by no region go to the fallback
/// mode, or to the region with the least constraint violation when no
/// fallback is configured. Immutable after construction.
class SwitchedSystem {
 public:
  SwitchedSystem(int state_dim, int control_dim, std::vector<Mode> modes,
                 double horizon, ControlBounds bounds,
                 std::optional<ModeId> fallback_mode = std::nullopt,
                 TerminalCost terminal_cost = {});

  int state_dim() const { return state_dim_; }
  int control_dim() const { return control_dim_; }
  int num_modes() const { return static_cast<int>(modes_.size()); }
  double horizon() const { return horizon_; }
  const ControlBounds& bounds() const { return bounds_; }
  const std::vector<Mode>& modes() const { return modes_; }
  const Mode& mode(ModeId id) const;
  std::optional<ModeId> fallback_mode() const { return fallback_mode_; }
  bool has_terminal_cost() const { return static_cast<bool>(terminal_cost_); }

  /// Distinct switching surfaces, deduplicated up to sign.
  const std::vector<AffineBoundary>& boundaries() const { return boundaries_; }

  ModeId classify(const StateVector& x) const;

  /// Dynamics of the classified mode. The control is clamped to the bounds.
  StateVector vector_field(const StateVector& x, const ControlVector& u,
                           double t) const;
  /// Same as vector_field but with the mode fixed by the caller.
  StateVector mode_field(ModeId q, const StateVector& x,
                         const ControlVector& u, double t) const {
    return modes_[static_cast<std::size_t>(q - 1)].dynamics.evaluate(x, u, t);
  }

  double stage_cost(const StateVector& x, const ControlVector& u) const;
  double terminal_cost(const StateVector& x) const {
    return terminal_cost_ ? terminal_cost_(x) : 0.0;
  }

  std::vector<BoundaryValue> boundary_values(const StateVector& x) const;
  /// Same values as a plain vector indexed by boundary id.
  BoundaryVector boundary_vector(const StateVector& x) const;
  ModeId classify_from_values(const BoundaryVector& g,
                              const StateVector& x) const;

 private:
  struct IndexedConstraint {
    int boundary;
    bool flipped;  // half-space stored against the canonical boundary sign
    Side side;
  };

  ModeId nearest_mode(const StateVector& x) const;

  int state_dim_;
  int control_dim_;
  std::vector<Mode> modes_;
  double horizon_;
  ControlBounds bounds_;
  std::optional<ModeId> fallback_mode_;
  TerminalCost terminal_cost_;
  std::vector<AffineBoundary> boundaries_;
  std::vector<double> boundary_norms_;
  std::vector<std::vector<IndexedConstraint>> indexed_;
};

}  // namespace hybridopt

#endif  // HYBRIDOPT_CORE_SWITCHED_SYSTEM_HPP
