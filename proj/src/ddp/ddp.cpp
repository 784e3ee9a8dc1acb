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

#include "hybridopt/ddp/ddp.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include <Eigen/Cholesky>

namespace hybridopt::ddp {

namespace {

struct Probe {
  StateVector next;
  std::vector<ModeId> modes;  // start mode followed by each event's target
};

Probe probe(const SwitchedSystem& sys, const StateVector& x, const ControlVector& u, double t,
            const sim::IntegratorConfig& cfg, int index) {
  try {
    sim::StepResult r = sim::step_with_events(sys, x, u, t, cfg);
    Probe p{std::move(r.state), {sys.classify(x)}};
    for (const auto& e : r.events) p.modes.push_back(e.to_mode);
    return p;
  } catch (const ZenoError& e) {
    throw ZenoError(std::string(e.what()) + " (perturbation " + std::to_string(index) + ")",
                    e.time(), e.step_index());
  }
}

// Difference quotient for one input direction.
StateVector column(const Probe& base, const Probe& plus, const Probe& minus, double h,
                   int& one_sided) {
  const bool plus_ok = plus.modes == base.modes;
  const bool minus_ok = minus.modes == base.modes;
  if (plus_ok == minus_ok) return (plus.next - minus.next) / (2.0 * h);
  ++one_sided;
  if (plus_ok) return (plus.next - base.next) / h;
  return (base.next - minus.next) / h;
}

}  // namespace

std::vector<double> DdpConfig::default_alphas() {
  std::vector<double> a;
  for (int i = 0; i <= 10; ++i) a.push_back(std::ldexp(1.0, -i));
  return a;
}

void DdpConfig::validate() const {
  if (max_iters < 0) throw InvalidInput("DdpConfig: max_iters must be non-negative");
  if (!(fd_step > 0.0)) throw InvalidInput("DdpConfig: fd_step must be positive");
  if (!(tol > 0.0)) throw InvalidInput("DdpConfig: tol must be positive");
  if (!(lambda_min > 0.0) || !(lambda_max >= lambda_min) || !(lambda_up > 1.0) ||
      !(lambda_down > 0.0 && lambda_down < 1.0)) {
    throw InvalidInput("DdpConfig: bad regularization schedule");
  }
  if (alphas.empty()) throw InvalidInput("DdpConfig: empty line-search set");
  for (std::size_t i = 0; i < alphas.size(); ++i) {
    if (!(alphas[i] > 0.0) || (i > 0 && !(alphas[i] < alphas[i - 1]))) {
      throw InvalidInput("DdpConfig: line-search steps must be positive and decreasing");
    }
  }
}

Linearization linearize_step(const SwitchedSystem& sys, const StateVector& x,
                             const ControlVector& u, double t, const sim::IntegratorConfig& cfg,
                             double h) {
  const int n = sys.state_dim();
  const int m = sys.control_dim();
  const ControlVector uc = sys.bounds().clamp(u);
  Linearization lin;
  lin.a.resize(n, n);
  lin.b.resize(n, m);
  const Probe base = probe(sys, x, uc, t, cfg, -1);
  int index = 0;
  for (int i = 0; i < n; ++i) {
    StateVector e = StateVector::Zero(n);
    e[i] = h;
    const Probe plus = probe(sys, x + e, uc, t, cfg, index++);
    const Probe minus = probe(sys, x - e, uc, t, cfg, index++);
    lin.a.col(i) = column(base, plus, minus, h, lin.one_sided);
  }
  // The step clamps u, so perturbing past a bound gives a zero column there.
  for (int j = 0; j < m; ++j) {
    ControlVector e = ControlVector::Zero(m);
    e[j] = h;
    const Probe plus = probe(sys, x, uc + e, t, cfg, index++);
    const Probe minus = probe(sys, x, uc - e, t, cfg, index++);
    lin.b.col(j) = column(base, plus, minus, h, lin.one_sided);
  }
  return lin;
}

StepQuadratic quadratize_cost(const SwitchedSystem& sys, const StateVector& x,
                              const ControlVector& u, double dt) {
  const StageCost& c = sys.mode(sys.classify(x)).cost;
  const StateMatrix wx = 0.5 * (c.state_weight + c.state_weight.transpose());
  const ControlMatrix wu = 0.5 * (c.control_weight + c.control_weight.transpose());
  const double s = 2.0 * c.scale * dt;
  StepQuadratic q;
  q.lx = s * (wx * x);
  q.lu = s * (wu * u);
  q.lxx = s * wx;
  q.luu = s * wu;
  q.lux = GainMatrix::Zero(u.size(), x.size());
  return q;
}

TerminalQuadratic quadratize_terminal(const SwitchedSystem& sys, const StateVector& x,
                                      double h) {
  const int n = static_cast<int>(x.size());
  TerminalQuadratic t;
  t.vx.resize(n);
  t.vxx.resize(n, n);
  const double f0 = sys.terminal_cost(x);
  auto f = [&](int i, double di, int j, double dj) {
    StateVector y = x;
    y[i] += di;
    y[j] += dj;
    return sys.terminal_cost(y);
  };
  for (int i = 0; i < n; ++i) {
    t.vx[i] = (f(i, h, i, 0.0) - f(i, -h, i, 0.0)) / (2.0 * h);
    t.vxx(i, i) = (f(i, h, i, 0.0) - 2.0 * f0 + f(i, -h, i, 0.0)) / (h * h);
    for (int j = 0; j < i; ++j) {
      const double v = (f(i, h, j, h) - f(i, h, j, -h) - f(i, -h, j, h) + f(i, -h, j, -h)) /
                       (4.0 * h * h);
      t.vxx(i, j) = v;
      t.vxx(j, i) = v;
    }
  }
  return t;
}

Gains backward_pass(const std::vector<Linearization>& lins,
                    const std::vector<StepQuadratic>& costs, const TerminalQuadratic& terminal,
                    double lambda) {
  if (lins.size() != costs.size()) throw InvalidInput("backward_pass: length mismatch");
  if (!(lambda >= 0.0)) throw InvalidInput("backward_pass: lambda must be non-negative");
  const int horizon = static_cast<int>(lins.size());
  Gains g;
  g.K.resize(static_cast<std::size_t>(horizon));
  g.k.resize(static_cast<std::size_t>(horizon));
  StateVector vx = terminal.vx;
  StateMatrix vxx = terminal.vxx;
  for (int k = horizon - 1; k >= 0; --k) {
    const Linearization& lin = lins[static_cast<std::size_t>(k)];
    const StepQuadratic& c = costs[static_cast<std::size_t>(k)];
    const StateVector qx = c.lx + lin.a.transpose() * vx;
    const ControlVector qu = c.lu + lin.b.transpose() * vx;
    const StateMatrix qxx = c.lxx + lin.a.transpose() * vxx * lin.a;
    const ControlMatrix quu = c.luu + lin.b.transpose() * vxx * lin.b;
    const GainMatrix qux = c.lux + lin.b.transpose() * vxx * lin.a;

    ControlMatrix reg = quu;
    reg.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(reg);
    if (llt.info() != Eigen::Success || !reg.allFinite()) {
      throw NotPositiveDefinite("backward_pass: regularized Q_uu is not positive definite", k);
    }
    const ControlVector kff = -llt.solve(Eigen::VectorXd(qu));
    const GainMatrix kfb = -llt.solve(Eigen::MatrixXd(qux));

    g.dv1 += kff.dot(qu);
    g.dv2 += 0.5 * kff.dot(quu * kff);
    vx = qx + kfb.transpose() * quu * kff + kfb.transpose() * qu + qux.transpose() * kff;
    vxx = qxx + kfb.transpose() * quu * kfb + kfb.transpose() * qux + qux.transpose() * kfb;
    vxx = 0.5 * (vxx + vxx.transpose()).eval();
    g.K[static_cast<std::size_t>(k)] = kfb;
    g.k[static_cast<std::size_t>(k)] = kff;
  }
  return g;
}

sim::Trajectory forward_pass(const SwitchedSystem& sys, const sim::Trajectory& nominal,
                             const Gains& gains, double alpha, const sim::IntegratorConfig& cfg) {
  const int horizon = nominal.num_steps();
  if (static_cast<int>(gains.k.size()) != horizon || static_cast<int>(gains.K.size()) != horizon) {
    throw InvalidInput("forward_pass: gains do not match the nominal trajectory");
  }
  sim::Trajectory traj = sim::start_trajectory(sys, nominal.states.front());
  for (int k = 0; k < horizon; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    const StateVector dx = traj.states.back() - nominal.states[ks];
    const ControlVector u = nominal.controls[ks] + alpha * gains.k[ks] + gains.K[ks] * dx;
    sim::append_step(sys, traj, sys.bounds().clamp(u), cfg);
  }
  sim::finish_trajectory(sys, traj);
  return traj;
}

DdpSolution solve(const SwitchedSystem& sys, const StateVector& x0,
                  const sim::IntegratorConfig& integrator, const DdpConfig& cfg) {
  cfg.validate();
  integrator.validate();
  const int horizon = sim::horizon_steps(sys, integrator);
  const int m = sys.control_dim();
  std::vector<ControlVector> u0 = cfg.u_init;
  if (u0.empty()) u0.assign(static_cast<std::size_t>(horizon), ControlVector::Zero(m));
  if (static_cast<int>(u0.size()) != horizon) {
    throw InvalidInput("ddp::solve: u_init length does not match the horizon");
  }
  for (auto& u : u0) u = sys.bounds().clamp(u);

  DdpSolution sol;
  sol.nominal = sim::rollout_open_loop(sys, x0, u0, integrator);
  sol.cost_history.push_back(sol.nominal.total_cost);
  double lambda = cfg.lambda_init;
  const double dt = integrator.dt;

  std::vector<Linearization> lins(static_cast<std::size_t>(horizon));
  std::vector<StepQuadratic> costs(static_cast<std::size_t>(horizon));
  bool need_linearization = true;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    sol.iterations = it;
    const sim::Trajectory& nom = sol.nominal;
    if (need_linearization) {
      for (int k = 0; k < horizon; ++k) {
        const auto ks = static_cast<std::size_t>(k);
        lins[ks] = linearize_step(sys, nom.states[ks], nom.controls[ks], nom.times[ks],
                                  integrator, cfg.fd_step);
        costs[ks] = quadratize_cost(sys, nom.states[ks], nom.controls[ks], dt);
      }
      need_linearization = false;
    }
    const TerminalQuadratic term = quadratize_terminal(sys, nom.states.back());

    Gains gains;
    try {
      gains = backward_pass(lins, costs, term, lambda);
    } catch (const NotPositiveDefinite&) {
      sol.log.push_back({it, nom.total_cost, lambda, 0.0, false});
      lambda *= cfg.lambda_up;
      if (lambda > cfg.lambda_max) break;
      continue;
    }
    if (-gains.expected_change(1.0) < cfg.tol) {
      sol.K = gains.K;
      sol.k = gains.k;
      sol.converged = true;
      sol.log.push_back({it, nom.total_cost, lambda, 0.0, false});
      break;
    }

    bool accepted = false;
    for (double alpha : cfg.alphas) {
      sim::Trajectory cand = forward_pass(sys, nom, gains, alpha, integrator);
      if (cand.total_cost < nom.total_cost) {
        const double improvement = nom.total_cost - cand.total_cost;
        sol.log.push_back({it, cand.total_cost, lambda, alpha, true});
        sol.nominal = std::move(cand);
        sol.cost_history.push_back(sol.nominal.total_cost);
        sol.K = gains.K;
        sol.k = gains.k;
        accepted = true;
        need_linearization = true;
        lambda = std::max(lambda * cfg.lambda_down, cfg.lambda_min);
        if (improvement < cfg.tol) sol.converged = true;
        break;
      }
    }
    if (sol.converged) break;
    if (!accepted) {
      sol.log.push_back({it, nom.total_cost, lambda, 0.0, false});
      lambda *= cfg.lambda_up;
      if (lambda > cfg.lambda_max) break;
    }
  }
  return sol;
}

void write_iteration_log_csv(std::ostream& os, const DdpSolution& sol) {
  os << "iter,J,lambda,alpha,accepted\n" << std::setprecision(17);
  for (const auto& r : sol.log) {
    os << r.iter << ',' << r.cost << ',' << r.lambda << ',' << r.alpha << ','
       << (r.accepted ? 1 : 0) << '\n';
  }
}

void write_gains_csv(std::ostream& os, const DdpSolution& sol) {
  if (sol.k.empty()) {
    os << "k\n";
    return;
  }
  const auto m = sol.k.front().size();
  const auto n = sol.K.front().cols();
  os << 'k';
  for (Eigen::Index i = 0; i < m; ++i) os << ",k_" << i + 1;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) os << ",K_" << i + 1 << j + 1;
  }
  os << '\n' << std::setprecision(17);
  for (std::size_t s = 0; s < sol.k.size(); ++s) {
    os << s;
    for (Eigen::Index i = 0; i < m; ++i) os << ',' << sol.k[s][i];
    for (Eigen::Index i = 0; i < m; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) os << ',' << sol.K[s](i, j);
    }
    os << '\n';
  }
}

}  // namespace hybridopt::ddp
