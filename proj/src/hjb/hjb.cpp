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

#include "hybridopt/hjb/hjb.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <thread>

namespace hybridopt::hjb {

namespace {

constexpr char kMagic[8] = {'H', 'Y', 'B', 'V', 'A', 'L', '0', '1'};

// Lower-corner node and per-axis weights of an interpolation cell.
struct Stencil {
  std::int32_t base = 0;
  double w0 = 0.0;
  double w1 = 0.0;
};

Stencil make_stencil(const GridSpec& g, const StateVector& x) {
  Stencil s;
  int stride = 1;
  for (int d = 0; d < g.dim(); ++d) {
    const double h = g.spacing(d);
    const double r = (std::clamp(x[d], g.lower[d], g.upper[d]) - g.lower[d]) / h;
    const int i = std::min(static_cast<int>(std::floor(r)), g.points[d] - 2);
    const double w = r - i;
    s.base += i * stride;
    (d == 0 ? s.w0 : s.w1) = w;
    stride *= g.points[d];
  }
  return s;
}

inline double interp1(const double* v, const Stencil& s) {
  return v[s.base] + s.w0 * (v[s.base + 1] - v[s.base]);
}

inline double interp2(const double* v, const Stencil& s, int n0) {
  const double a = v[s.base] + s.w0 * (v[s.base + 1] - v[s.base]);
  const double b = v[s.base + n0] + s.w0 * (v[s.base + n0 + 1] - v[s.base + n0]);
  return a + s.w1 * (b - a);
}

template <typename Fn>
void parallel_for(int n, int threads, Fn&& fn) {
  if (threads <= 1 || n < 2 * threads) {
    fn(0, n);
    return;
  }
  std::vector<std::thread> pool;
  const int chunk = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const int lo = t * chunk;
    const int hi = std::min(n, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

sim::IntegratorConfig layer_integrator(const SolveOptions& opts, double dt) {
  sim::IntegratorConfig cfg = opts.integrator;
  cfg.dt = dt;
  return cfg;
}

ControlVector scalar_control(double u) {
  ControlVector c(1);
  c << u;
  return c;
}

}  // namespace

void GridSpec::validate(const SwitchedSystem& sys) const {
  const int n = sys.state_dim();
  if (n < 1 || n > 2) throw InvalidInput("GridSpec: only 1-D and 2-D systems are supported");
  if (sys.control_dim() != 1) throw InvalidInput("GridSpec: control must be scalar");
  if (dim() != n || lower.size() != n || upper.size() != n) {
    throw InvalidInput("GridSpec: dimension mismatch");
  }
  for (int d = 0; d < n; ++d) {
    if (points[d] < 2) throw InvalidInput("GridSpec: need at least 2 points per axis");
    if (!(upper[d] > lower[d]) || !std::isfinite(lower[d]) || !std::isfinite(upper[d])) {
      throw InvalidInput("GridSpec: empty or non-finite box");
    }
  }
  if (nt < 0) throw InvalidInput("GridSpec: nt must be non-negative");
  if (n_u_samples < 1) throw InvalidInput("GridSpec: control sample set is empty");
}

int GridSpec::num_nodes() const {
  int n = 1;
  for (int p : points) n *= p;
  return n;
}

std::vector<double> control_samples(const SwitchedSystem& sys, int count) {
  if (count < 1) throw InvalidInput("control_samples: count must be positive");
  const double lo = sys.bounds().lower[0];
  const double hi = sys.bounds().upper[0];
  std::vector<double> u(static_cast<std::size_t>(count));
  if (count == 1) {
    u[0] = std::clamp(0.0, lo, hi);
    return u;
  }
  for (int j = 0; j < count; ++j) {
    u[static_cast<std::size_t>(j)] = lo + (hi - lo) * j / (count - 1);
  }
  // Exact symmetry about 0 for symmetric bounds.
  if (lo == -hi) {
    for (int j = 0; j < count / 2; ++j) {
      u[static_cast<std::size_t>(count - 1 - j)] = -u[static_cast<std::size_t>(j)];
    }
    if (count % 2 == 1) u[static_cast<std::size_t>(count / 2)] = 0.0;
  }
  std::stable_sort(u.begin(), u.end(), [](double a, double b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
    return a < b;
  });
  return u;
}

ValueTable::ValueTable(GridSpec grid, double tf)
    : grid_(std::move(grid)), tf_(tf), num_nodes_(grid_.num_nodes()) {
  values_.assign(static_cast<std::size_t>(grid_.nt + 1) * static_cast<std::size_t>(num_nodes_),
                 0.0);
}

StateVector ValueTable::node(int index) const {
  StateVector x(grid_.dim());
  for (int d = 0; d < grid_.dim(); ++d) {
    const int i = index % grid_.points[d];
    index /= grid_.points[d];
    x[d] = i == grid_.points[d] - 1 ? grid_.upper[d] : grid_.lower[d] + i * grid_.spacing(d);
  }
  return x;
}

double ValueTable::interpolate(int k, const StateVector& x) const {
  const Stencil s = make_stencil(grid_, x);
  return grid_.dim() == 1 ? interp1(layer(k), s) : interp2(layer(k), s, grid_.points[0]);
}

bool ValueTable::escapes(const StateVector& x) const {
  for (int d = 0; d < grid_.dim(); ++d) {
    const double h = grid_.spacing(d);
    if (x[d] < grid_.lower[d] - h || x[d] > grid_.upper[d] + h) return true;
  }
  return false;
}

void ValueTable::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InvalidInput("ValueTable::save: cannot open " + path);
  auto put = [&](const auto& v) { os.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
  os.write(kMagic, sizeof(kMagic));
  put(static_cast<std::int32_t>(grid_.dim()));
  for (int d = 0; d < grid_.dim(); ++d) {
    put(static_cast<std::int32_t>(grid_.points[d]));
    put(grid_.lower[d]);
    put(grid_.upper[d]);
  }
  put(static_cast<std::int32_t>(grid_.nt));
  put(static_cast<std::int32_t>(grid_.n_u_samples));
  put(tf_);
  put(static_cast<std::int64_t>(escape_count));
  os.write(reinterpret_cast<const char*>(values_.data()),
           static_cast<std::streamsize>(values_.size() * sizeof(double)));
  if (!os) throw InvalidInput("ValueTable::save: write failed for " + path);
}

ValueTable ValueTable::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InvalidInput("ValueTable::load: cannot open " + path);
  auto get = [&](auto& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!is) throw InvalidInput("ValueTable::load: truncated file " + path);
  };
  char magic[sizeof(kMagic)];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw InvalidInput("ValueTable::load: not a value table: " + path);
  }
  std::int32_t dim = 0;
  get(dim);
  if (dim < 1 || dim > 2) throw InvalidInput("ValueTable::load: bad dimension");
  GridSpec g;
  g.lower.resize(dim);
  g.upper.resize(dim);
  g.points.resize(static_cast<std::size_t>(dim));
  for (int d = 0; d < dim; ++d) {
    std::int32_t p = 0;
    get(p);
    g.points[static_cast<std::size_t>(d)] = p;
    get(g.lower[d]);
    get(g.upper[d]);
  }
  std::int32_t nt = 0;
  std::int32_t nu = 0;
  double tf = 0.0;
  std::int64_t escapes = 0;
  get(nt);
  get(nu);
  get(tf);
  get(escapes);
  g.nt = nt;
  g.n_u_samples = nu;
  ValueTable table(g, tf);
  table.escape_count = escapes;
  is.read(reinterpret_cast<char*>(table.values_.data()),
          static_cast<std::streamsize>(table.values_.size() * sizeof(double)));
  if (!is) throw InvalidInput("ValueTable::load: truncated values in " + path);
  return table;
}

void ValueTable::write_layer_csv(std::ostream& os, int k) const {
  if (k < 0 || k > grid_.nt) throw InvalidInput("write_layer_csv: layer out of range");
  for (int d = 0; d < grid_.dim(); ++d) os << "x_" << d + 1 << ',';
  os << "V\n" << std::setprecision(17);
  for (int i = 0; i < num_nodes_; ++i) {
    const StateVector x = node(i);
    for (int d = 0; d < grid_.dim(); ++d) os << x[d] << ',';
    os << at(k, i) << '\n';
  }
}

ValueTable solve_backward(const SwitchedSystem& sys, const GridSpec& grid,
                          const SolveOptions& opts) {
  grid.validate(sys);
  ValueTable table(grid, sys.horizon());
  const int nodes = grid.num_nodes();
  const int nt = grid.nt;
  for (int i = 0; i < nodes; ++i) table.at(nt, i) = sys.terminal_cost(table.node(i));
  if (nt == 0) return table;

  const double dt = table.dt();
  const sim::IntegratorConfig cfg = layer_integrator(opts, dt);
  cfg.validate();
  const std::vector<double> us = control_samples(sys, grid.n_u_samples);
  const int nu = static_cast<int>(us.size());
  const int threads = resolve_threads(opts.threads);
  const int n0 = grid.points[0];
  const bool one_d = grid.dim() == 1;

  struct Transition {
    Stencil stencil;
    double cost;
    bool escaped;
  };
  auto transition = [&](int i, int j, double t) {
    const StateVector x = table.node(i);
    const ControlVector u = scalar_control(us[static_cast<std::size_t>(j)]);
    const StateVector next = sim::step_with_events(sys, x, u, t, cfg).state;
    return Transition{make_stencil(grid, next), sys.stage_cost(x, u) * dt, table.escapes(next)};
  };

  std::vector<Transition> cache;
  if (opts.cache_transitions) {
    cache.resize(static_cast<std::size_t>(nodes) * static_cast<std::size_t>(nu));
    parallel_for(nodes, threads, [&](int lo, int hi) {
      for (int i = lo; i < hi; ++i) {
        for (int j = 0; j < nu; ++j) {
          cache[static_cast<std::size_t>(i) * nu + j] = transition(i, j, 0.0);
        }
      }
    });
  }

  std::atomic<long long> escapes{0};
  for (int k = nt - 1; k >= 0; --k) {
    const double* next = table.layer(k + 1);
    double* cur = table.layer(k);
    const double t = table.time(k);
    parallel_for(nodes, threads, [&](int lo, int hi) {
      long long esc = 0;
      for (int i = lo; i < hi; ++i) {
        double best = std::numeric_limits<double>::infinity();
        bool best_escaped = false;
        for (int j = 0; j < nu; ++j) {
          Transition tr;
          if (opts.cache_transitions) {
            tr = cache[static_cast<std::size_t>(i) * nu + j];
          } else {
            tr = transition(i, j, t);
          }
          const double v = tr.cost + (one_d ? interp1(next, tr.stencil)
                                            : interp2(next, tr.stencil, n0));
          if (v < best) {
            best = v;
            best_escaped = tr.escaped;
          }
        }
        cur[i] = best;
        esc += best_escaped ? 1 : 0;
      }
      escapes += esc;
    });
  }
  table.escape_count = escapes.load();
  return table;
}

sim::Trajectory greedy_policy_eval(const ValueTable& table, const SwitchedSystem& sys,
                                   const StateVector& x0, const SolveOptions& opts) {
  if (std::abs(table.tf() - sys.horizon()) > 1e-12) {
    throw InvalidInput("greedy_policy_eval: table horizon does not match the system");
  }
  if (x0.size() != table.grid().dim() || table.escapes(x0)) {
    throw InvalidInput("greedy_policy_eval: x0 outside the grid box");
  }
  sim::Trajectory traj = sim::start_trajectory(sys, x0);
  const int nt = table.nt();
  if (nt > 0) {
    const double dt = table.dt();
    const sim::IntegratorConfig cfg = layer_integrator(opts, dt);
    const std::vector<double> us = control_samples(sys, table.grid().n_u_samples);
    for (int k = 0; k < nt; ++k) {
      const StateVector x = traj.states.back();
      const double t = table.time(k);
      double best = std::numeric_limits<double>::infinity();
      double best_u = 0.0;
      for (double uj : us) {
        const ControlVector u = scalar_control(uj);
        const StateVector next = sim::step_with_events(sys, x, u, t, cfg).state;
        const double v = sys.stage_cost(x, u) * dt + table.interpolate(k + 1, next);
        if (v < best) {
          best = v;
          best_u = uj;
        }
      }
      sim::append_step(sys, traj, scalar_control(best_u), cfg);
      if (table.escapes(traj.states.back())) {
        throw DomainEscape("greedy_policy_eval: trajectory left the grid box at step " +
                               std::to_string(k),
                           k);
      }
    }
  }
  sim::finish_trajectory(sys, traj);
  return traj;
}

ContinuityProbe interface_continuity_probe(const ValueTable& table,
                                           const AffineBoundary& boundary, double offset_cells,
                                           int probe_points) {
  const GridSpec& g = table.grid();
  const int dim = g.dim();
  if (boundary.normal.size() != dim || boundary.normal.norm() == 0.0) {
    throw InvalidInput("interface_continuity_probe: boundary does not match the grid");
  }
  const StateVector n = boundary.normal / boundary.normal.norm();
  const double c = boundary.offset / boundary.normal.norm();
  double cell = std::numeric_limits<double>::infinity();
  for (int d = 0; d < dim; ++d) cell = std::min(cell, g.spacing(d));
  const double off = offset_cells * cell;

  // Points on {n.x + c = 0} inside the box, shrunk by the offset.
  std::vector<StateVector> on_line;
  if (dim == 1) {
    on_line.push_back(StateVector::Constant(1, -c / n[0]));
  } else {
    const StateVector p0 = -c * n;
    StateVector dir(2);
    dir << -n[1], n[0];
    // Clip the parameter range to the box.
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (int d = 0; d < 2; ++d) {
      const double a = g.lower[d] + off;
      const double b = g.upper[d] - off;
      if (std::abs(dir[d]) < 1e-15) {
        if (p0[d] < a || p0[d] > b) {
          lo = 1.0;
          hi = 0.0;
        }
        continue;
      }
      double s1 = (a - p0[d]) / dir[d];
      double s2 = (b - p0[d]) / dir[d];
      if (s1 > s2) std::swap(s1, s2);
      lo = std::max(lo, s1);
      hi = std::min(hi, s2);
    }
    if (lo <= hi) {
      for (int i = 0; i < probe_points; ++i) {
        const double s = probe_points == 1 ? 0.5 * (lo + hi)
                                           : lo + (hi - lo) * i / (probe_points - 1);
        on_line.push_back(p0 + s * dir);
      }
    }
  }
  for (const auto& p : on_line) {
    for (int d = 0; d < dim; ++d) {
      if (p[d] - off < g.lower[d] || p[d] + off > g.upper[d]) {
        throw InvalidInput("interface_continuity_probe: boundary does not intersect the box");
      }
    }
  }
  if (on_line.empty()) {
    throw InvalidInput("interface_continuity_probe: boundary does not intersect the box");
  }

  ContinuityProbe out;
  out.layer_jumps.assign(static_cast<std::size_t>(table.nt()) + 1, 0.0);
  for (int k = 0; k <= table.nt(); ++k) {
    double worst = 0.0;
    for (const auto& p : on_line) {
      const double vm = table.interpolate(k, p - off * n);
      const double vp = table.interpolate(k, p + off * n);
      worst = std::max(worst, std::abs(vm - vp));
      if (k == 0) {
        const double v0 = table.interpolate(0, p);
        out.slope_minus += (v0 - vm) / off;
        out.slope_plus += (vp - v0) / off;
      }
    }
    out.layer_jumps[static_cast<std::size_t>(k)] = worst;
    out.max_jump = std::max(out.max_jump, worst);
  }
  out.slope_minus /= static_cast<double>(on_line.size());
  out.slope_plus /= static_cast<double>(on_line.size());
  return out;
}

double hjb_residual(const ValueTable& table, const SwitchedSystem& sys, double band) {
  const GridSpec& g = table.grid();
  const int nt = table.nt();
  if (nt == 0) return 0.0;
  const double dt = table.dt();
  const std::vector<double> us = control_samples(sys, g.n_u_samples);
  // Cell centres: at nodes the backup holds by construction, so the residual
  // is measured where V is only known through interpolation.
  StateVector half(g.dim());
  std::vector<int> cells(static_cast<std::size_t>(g.dim()));
  int num_cells = 1;
  for (int d = 0; d < g.dim(); ++d) {
    half[d] = 0.5 * g.spacing(d);
    cells[static_cast<std::size_t>(d)] = g.points[d] - 1;
    num_cells *= g.points[d] - 1;
  }
  double worst = 0.0;
  for (int c = 0; c < num_cells; ++c) {
    StateVector x(g.dim());
    int rest = c;
    for (int d = 0; d < g.dim(); ++d) {
      const int i = rest % cells[static_cast<std::size_t>(d)];
      rest /= cells[static_cast<std::size_t>(d)];
      x[d] = g.lower[d] + i * g.spacing(d) + half[d];
    }
    bool interior = true;
    for (int d = 0; d < g.dim(); ++d) {
      interior = interior && x[d] - g.lower[d] >= band && g.upper[d] - x[d] >= band;
    }
    for (const auto& b : sys.boundaries()) {
      interior = interior && std::abs(b.value(x)) / b.normal.norm() >= band;
    }
    if (!interior) continue;
    for (int k = 0; k < nt; ++k) {
      const double v = table.interpolate(k, x);
      double best = std::numeric_limits<double>::infinity();
      for (double uj : us) {
        const ControlVector u = scalar_control(uj);
        const StateVector next = x + sys.vector_field(x, u, table.time(k)) * dt;
        best = std::min(best, sys.stage_cost(x, u) + (table.interpolate(k + 1, next) - v) / dt);
      }
      worst = std::max(worst, std::abs(best));
    }
  }
  return worst;
}

}  // namespace hybridopt::hjb
