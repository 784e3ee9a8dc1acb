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

#ifndef HYBRIDOPT_DDP_DDP_HPP
#define HYBRIDOPT_DDP_DDP_HPP

#include <iosfwd>
#include <vector>

#include "hybridopt/sim/rollout.hpp"

// iLQR through the event-aware discrete step.
namespace hybridopt::ddp {

struct DdpConfig {
  int max_iters = 200;
  double fd_step = 1e-5;
  double lambda_init = 1e-6;
  double lambda_min = 1e-6;
  double lambda_max = 1e6;
  double lambda_up = 10.0;
  double lambda_down = 0.5;
  /// Line-search step sizes, tried in order.
  std::vector<double> alphas = default_alphas();
  /// Stop once an accepted iteration improves J by less than this, or the
  /// predicted improvement falls below it.
  double tol = 1e-7;
  /// Initial control sequence; empty means zeros.
  std::vector<ControlVector> u_init;

  static std::vector<double> default_alphas();
  void validate() const;
};

struct Linearization {
  StateMatrix a;
  InputMatrix b;
  /// Number of columns that used a one-sided difference.
  int one_sided = 0;
};

/// Jacobians of Phi(x, u) = step_with_events(x, u) by central differences,
/// switching to one-sided differences when a perturbation changes the
/// sequence of modes visited during the step.
Linearization linearize_step(const SwitchedSystem& sys, const StateVector& x,
                             const ControlVector& u, double t, const sim::IntegratorConfig& cfg,
                             double h = 1e-5);

/// Second-order expansion of the step cost L(x, u) dt.
struct StepQuadratic {
  StateVector lx;
  ControlVector lu;
  StateMatrix lxx;
  ControlMatrix luu;
  GainMatrix lux;
};

StepQuadratic quadratize_cost(const SwitchedSystem& sys, const StateVector& x,
                              const ControlVector& u, double dt);

struct TerminalQuadratic {
  StateVector vx;
  StateMatrix vxx;
};

/// Central-difference gradient and Hessian of psi.
TerminalQuadratic quadratize_terminal(const SwitchedSystem& sys, const StateVector& x,
                                      double h = 1e-4);

struct Gains {
  std::vector<GainMatrix> K;
  std::vector<ControlVector> k;
  /// Predicted change of J for step alpha is alpha dv1 + alpha^2 dv2.
  double dv1 = 0.0;
  double dv2 = 0.0;

  double expected_change(double alpha) const { return alpha * dv1 + alpha * alpha * dv2; }
};

class NotPositiveDefinite : public Error {
 public:
  NotPositiveDefinite(const std::string& what, int step) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// Riccati-like recursion with Q_uu + lambda I. Throws NotPositiveDefinite
/// when the regularized Q_uu has no Cholesky factor.
Gains backward_pass(const std::vector<Linearization>& lins,
                    const std::vector<StepQuadratic>& costs, const TerminalQuadratic& terminal,
                    double lambda);

/// u_k = clamp(ubar_k + alpha k_k + K_k (x_k - xbar_k)).
sim::Trajectory forward_pass(const SwitchedSystem& sys, const sim::Trajectory& nominal,
                             const Gains& gains, double alpha, const sim::IntegratorConfig& cfg);

struct IterationRecord {
  int iter = 0;
  double cost = 0.0;
  double lambda = 0.0;
  double alpha = 0.0;
  bool accepted = false;
};

struct DdpSolution {
  sim::Trajectory nominal;
  std::vector<GainMatrix> K;
  std::vector<ControlVector> k;
  /// Cost after every accepted iteration, starting with the initial rollout.
  std::vector<double> cost_history;
  std::vector<IterationRecord> log;
  bool converged = false;
  int iterations = 0;

  double cost() const { return nominal.total_cost; }
};

DdpSolution solve(const SwitchedSystem& sys, const StateVector& x0,
                  const sim::IntegratorConfig& integrator, const DdpConfig& cfg = {});

/// Columns iter, J, lambda, alpha, accepted.
void write_iteration_log_csv(std::ostream& os, const DdpSolution& sol);
/// Columns k, k_1..k_m, K_11..K_mn (row-major).
void write_gains_csv(std::ostream& os, const DdpSolution& sol);

}  // namespace hybridopt::ddp

#endif  // HYBRIDOPT_DDP_DDP_HPP
