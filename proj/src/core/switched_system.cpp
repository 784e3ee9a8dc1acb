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

#include "hybridopt/core/switched_system.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hybridopt {

namespace {

bool all_finite(const StateVector& x) { return x.allFinite(); }

// Canonical sign: the first non-zero entry of the normal is positive.
bool needs_flip(const AffineBoundary& b) {
  for (Eigen::Index i = 0; i < b.normal.size(); ++i) {
    if (b.normal[i] != 0.0) return b.normal[i] < 0.0;
  }
  return false;
}

bool same_boundary(const AffineBoundary& a, const AffineBoundary& b) {
  constexpr double kTol = 1e-12;
  return a.normal.size() == b.normal.size() &&
         (a.normal - b.normal).cwiseAbs().maxCoeff() <= kTol &&
         std::abs(a.offset - b.offset) <= kTol;
}

}  // namespace

double HalfSpace::slack(const StateVector& x) const {
  const double g = boundary.value(x) / boundary.normal.norm();
  return side == Side::kNonNegative ? g : -g;
}

bool HalfSpace::contains(const StateVector& x) const {
  const double g = boundary.value(x);
  return side == Side::kNonNegative ? g >= 0.0 : g <= 0.0;
}

bool RegionSpec::contains(const StateVector& x) const {
  for (const auto& c : constraints) {
    if (!c.contains(x)) return false;
  }
  return true;
}

double RegionSpec::slack(const StateVector& x) const {
  double s = std::numeric_limits<double>::infinity();
  for (const auto& c : constraints) s = std::min(s, c.slack(x));
  return s;
}

ModeDynamics ModeDynamics::linear(StateMatrix a, InputMatrix b) {
  if (a.rows() != a.cols() || b.rows() != a.rows()) {
    throw InvalidInput("ModeDynamics::linear: inconsistent A/B shapes");
  }
  ModeDynamics d;
  d.a_ = std::move(a);
  d.b_ = std::move(b);
  return d;
}

ModeDynamics ModeDynamics::general(Field field) {
  if (!field) throw InvalidInput("ModeDynamics::general: empty field");
  ModeDynamics d;
  d.field_ = std::move(field);
  return d;
}

const StateMatrix& ModeDynamics::a() const {
  if (field_) throw UsageError("ModeDynamics::a: dynamics are not linear");
  return a_;
}

const InputMatrix& ModeDynamics::b() const {
  if (field_) throw UsageError("ModeDynamics::b: dynamics are not linear");
  return b_;
}

StageCost StageCost::identity(int state_dim, int control_dim, double scale) {
  StageCost c;
  c.scale = scale;
  c.state_weight = StateMatrix::Identity(state_dim, state_dim);
  c.control_weight = ControlMatrix::Identity(control_dim, control_dim);
  return c;
}

ControlBounds ControlBounds::symmetric(int control_dim, double bound) {
  return {ControlVector::Constant(control_dim, -bound),
          ControlVector::Constant(control_dim, bound)};
}

SwitchedSystem::SwitchedSystem(int state_dim, int control_dim,
                               std::vector<Mode> modes, double horizon,
                               ControlBounds bounds,
                               std::optional<ModeId> fallback_mode,
                               TerminalCost terminal_cost)
    : state_dim_(state_dim),
      control_dim_(control_dim),
      modes_(std::move(modes)),
      horizon_(horizon),
      bounds_(std::move(bounds)),
      fallback_mode_(fallback_mode),
      terminal_cost_(std::move(terminal_cost)) {
  if (state_dim < 1 || state_dim > kMaxStateDim || control_dim < 1 ||
      control_dim > kMaxControlDim) {
    throw InvalidInput("SwitchedSystem: unsupported state/control dimension");
  }
  if (modes_.empty()) throw InvalidInput("SwitchedSystem: no modes");
  if (!(horizon_ >= 0.0) || !std::isfinite(horizon_)) {
    throw InvalidInput("SwitchedSystem: horizon must be finite and >= 0");
  }
  if (bounds_.lower.size() != control_dim || bounds_.upper.size() != control_dim ||
      (bounds_.lower.array() > bounds_.upper.array()).any()) {
    throw InvalidInput("SwitchedSystem: malformed control bounds");
  }
  if (fallback_mode_ && (*fallback_mode_ < 1 || *fallback_mode_ > num_modes())) {
    throw InvalidInput("SwitchedSystem: fallback mode out of range");
  }

  indexed_.resize(modes_.size());
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const Mode& m = modes_[i];
    if (m.region.id != static_cast<ModeId>(i + 1)) {
      throw InvalidInput("SwitchedSystem: mode ids must be 1..m in order, got " +
                         std::to_string(m.region.id) + " at position " +
                         std::to_string(i + 1));
    }
    if (m.dynamics.is_linear() && (m.dynamics.a().rows() != state_dim ||
                                   m.dynamics.b().cols() != control_dim)) {
      throw InvalidInput("SwitchedSystem: mode " + std::to_string(i + 1) +
                         " dynamics have the wrong dimension");
    }
    if (!(m.cost.scale >= 0.0) || m.cost.state_weight.rows() != state_dim ||
        m.cost.control_weight.rows() != control_dim) {
      throw InvalidInput("SwitchedSystem: mode " + std::to_string(i + 1) +
                         " has a malformed stage cost");
    }
    for (const HalfSpace& h : m.region.constraints) {
      if (h.boundary.normal.size() != state_dim ||
          h.boundary.normal.cwiseAbs().maxCoeff() == 0.0) {
        throw InvalidInput("SwitchedSystem: boundary normal must be non-zero");
      }
      AffineBoundary canonical = h.boundary;
      const bool flip = needs_flip(canonical);
      if (flip) {
        canonical.normal = -canonical.normal;
        canonical.offset = -canonical.offset;
      }
      int id = -1;
      for (std::size_t b = 0; b < boundaries_.size(); ++b) {
        if (same_boundary(boundaries_[b], canonical)) {
          id = static_cast<int>(b);
          break;
        }
      }
      if (id < 0) {
        if (static_cast<int>(boundaries_.size()) == kMaxBoundaries) {
          throw InvalidInput("SwitchedSystem: too many distinct boundaries");
        }
        id = static_cast<int>(boundaries_.size());
        boundaries_.push_back(canonical);
        boundary_norms_.push_back(canonical.normal.norm());
      }
      indexed_[i].push_back({id, flip, h.side});
    }
  }

  for (const Mode& m : modes_) {
    if (m.region.witness.size() != state_dim) {
      throw InvalidInput("SwitchedSystem: region " +
                         std::to_string(m.region.id) + " lacks a witness");
    }
    for (const HalfSpace& h : m.region.constraints) {
      if (h.slack(m.region.witness) <= 0.0) {
        throw InvalidInput("SwitchedSystem: witness of region " +
                           std::to_string(m.region.id) +
                           " is not strictly interior");
      }
    }
    if (classify(m.region.witness) != m.region.id) {
      throw InvalidInput("SwitchedSystem: witness of region " +
                         std::to_string(m.region.id) +
                         " classifies to another mode");
    }
  }
}

const Mode& SwitchedSystem::mode(ModeId id) const {
  if (id < 1 || id > num_modes()) {
    throw InvalidInput("SwitchedSystem::mode: id out of range");
  }
  return modes_[static_cast<std::size_t>(id - 1)];
}

BoundaryVector SwitchedSystem::boundary_vector(const StateVector& x) const {
  BoundaryVector g(static_cast<Eigen::Index>(boundaries_.size()));
  for (std::size_t b = 0; b < boundaries_.size(); ++b) {
    g[static_cast<Eigen::Index>(b)] = boundaries_[b].value(x);
  }
  return g;
}

std::vector<BoundaryValue> SwitchedSystem::boundary_values(
    const StateVector& x) const {
  const BoundaryVector g = boundary_vector(x);
  std::vector<BoundaryValue> out;
  out.reserve(boundaries_.size());
  for (Eigen::Index b = 0; b < g.size(); ++b) {
    out.push_back({static_cast<int>(b), g[b]});
  }
  return out;
}

ModeId SwitchedSystem::classify_from_values(const BoundaryVector& g,
                                            const StateVector& x) const {
  for (std::size_t i = 0; i < indexed_.size(); ++i) {
    bool inside = true;
    for (const IndexedConstraint& c : indexed_[i]) {
      double v = g[c.boundary];
      if (c.flipped) v = -v;
      if (c.side == Side::kNonNegative ? v < 0.0 : v > 0.0) {
        inside = false;
        break;
      }
    }
    if (inside) return static_cast<ModeId>(i + 1);
  }
  if (fallback_mode_) return *fallback_mode_;
  return nearest_mode(x);
}

ModeId SwitchedSystem::classify(const StateVector& x) const {
  return classify_from_values(boundary_vector(x), x);
}

ModeId SwitchedSystem::nearest_mode(const StateVector& x) const {
  ModeId best = 1;
  double best_slack = -std::numeric_limits<double>::infinity();
  for (const Mode& m : modes_) {
    const double s = m.region.slack(x);
    if (s > best_slack) {
      best_slack = s;
      best = m.region.id;
    }
  }
  return best;
}

StateVector SwitchedSystem::vector_field(const StateVector& x,
                                         const ControlVector& u,
                                         double t) const {
  if (!all_finite(x) || !u.allFinite()) {
    throw InvalidInput("vector_field: non-finite state or control");
  }
  return mode_field(classify(x), x, bounds_.clamp(u), t);
}

double SwitchedSystem::stage_cost(const StateVector& x,
                                  const ControlVector& u) const {
  return modes_[static_cast<std::size_t>(classify(x) - 1)].cost(x, u);
}

}  // namespace hybridopt
