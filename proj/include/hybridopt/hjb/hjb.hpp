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

#ifndef HYBRIDOPT_HJB_HJB_HPP
#define HYBRIDOPT_HJB_HJB_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "hybridopt/sim/rollout.hpp"

// Semi-Lagrangian dynamic programming on a regular (state, time) grid for
// one- and two-dimensional systems with a scalar control.
namespace hybridopt::hjb {

struct GridSpec {
  StateVector lower;
  StateVector upper;
  std::vector<int> points;  // per state axis
  int nt = 200;
  int n_u_samples = 401;

  void validate(const SwitchedSystem& sys) const;
  int dim() const { return static_cast<int>(points.size()); }
  int num_nodes() const;
  double spacing(int axis) const { return (upper[axis] - lower[axis]) / (points[axis] - 1); }
};

/// Uniform grid over the control bounds, ordered by increasing |u| (negative
/// first on ties) so that a strict "<" search breaks ties toward small |u|.
std::vector<double> control_samples(const SwitchedSystem& sys, int count);

class ValueTable {
 public:
  ValueTable(GridSpec grid, double tf);

  const GridSpec& grid() const { return grid_; }
  int nt() const { return grid_.nt; }
  double tf() const { return tf_; }
  double dt() const { return grid_.nt > 0 ? tf_ / grid_.nt : 0.0; }
  double time(int layer) const { return layer * dt(); }

  /// Node index of per-axis indices (axis 0 fastest).
  int index(int i0, int i1 = 0) const { return i0 + grid_.points[0] * i1; }
  StateVector node(int index) const;

  double& at(int layer, int node) { return values_[offset(layer) + node]; }
  double at(int layer, int node) const { return values_[offset(layer) + node]; }
  const double* layer(int k) const { return values_.data() + offset(k); }
  double* layer(int k) { return values_.data() + offset(k); }

  /// Multilinear interpolation, clamped to the box.
  double interpolate(int layer, const StateVector& x) const;
  /// Whether x lies farther than one cell outside the box on some axis.
  bool escapes(const StateVector& x) const;

  /// Argmin-control successors that left the box during solve_backward.
  long long escape_count = 0;

  void save(const std::string& path) const;
  static ValueTable load(const std::string& path);
  /// Columns x_1..x_n, V for one time layer.
  void write_layer_csv(std::ostream& os, int layer) const;

 private:
  std::size_t offset(int layer) const {
    return static_cast<std::size_t>(layer) * static_cast<std::size_t>(num_nodes_);
  }

  GridSpec grid_;
  double tf_;
  int num_nodes_;
  std::vector<double> values_;
};

struct SolveOptions {
  /// Base integrator; dt is replaced by t_f / nt.
  sim::IntegratorConfig integrator;
  /// Precompute successors and stage costs once. Valid for time-invariant
  /// systems, which all benchmarks are.
  bool cache_transitions = true;
  int threads = 0;  // 0: hardware concurrency
};

/// V(x, t_f) = psi(x); V(x, t) = min_u [L(x, u) dt + V(Phi(x, u), t + dt)].
ValueTable solve_backward(const SwitchedSystem& sys, const GridSpec& grid,
                          const SolveOptions& opts = {});

/// The greedy policy left the grid box.
class DomainEscape : public Error {
 public:
  DomainEscape(const std::string& what, int step) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Rolls out u_k = argmin_u [L(x_k, u) dt + V(Phi(x_k, u), t_{k+1})].
sim::Trajectory greedy_policy_eval(const ValueTable& table, const SwitchedSystem& sys,
                                   const StateVector& x0, const SolveOptions& opts = {});

struct ContinuityProbe {
  /// max over layers and probe points of |V(s-) - V(s+)|
  double max_jump = 0.0;
  std::vector<double> layer_jumps;
  /// One-sided normal difference quotients at t = 0, averaged over probe points.
  double slope_minus = 0.0;
  double slope_plus = 0.0;
};

/// Evaluates V `offset_cells` grid cells on each side of the boundary. In 2-D
/// the probe points are spread along the part of the line inside the box.
ContinuityProbe interface_continuity_probe(const ValueTable& table, const AffineBoundary& boundary,
                                           double offset_cells = 1.0, int probe_points = 41);

/// max over layers k < nt and cell centres at least `band` away from every
/// boundary and from the box edge of
/// | min_u [L + (V(x + f dt, t + dt) - V(x, t)) / dt] |.
double hjb_residual(const ValueTable& table, const SwitchedSystem& sys, double band);

}  // namespace hybridopt::hjb

#endif  // HYBRIDOPT_HJB_HJB_HPP
