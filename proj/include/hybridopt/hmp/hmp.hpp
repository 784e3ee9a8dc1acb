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

#ifndef HYBRIDOPT_HMP_HMP_HPP
#define HYBRIDOPT_HMP_HMP_HPP

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hybridopt/common/errors.hpp"
#include "hybridopt/envs/benchmarks.hpp"

// Minimum-principle shooting for scalar two-mode problems
//
//   xdot = a_q x + b_q u,  J = int 0.5 (x^2 + u^2) dt,  free x(t_f),
//
// where mode 1 is active above the interface level s and mode 2 below it.
namespace hybridopt::hmp {

struct ScalarMode {
  double a = 0.0;
  double b = 1.0;
};

struct HmpProblem {
  ScalarMode upper;  // x > s
  ScalarMode lower;  // x < s
  double x0 = 2.0;
  double tf = 1.0;
  double s = 1.0;

  void validate() const;
  const ScalarMode& mode(int id) const { return id == 1 ? upper : lower; }
  int mode_id(double x) const { return x > s ? 1 : 2; }
};

HmpProblem example1();
HmpProblem example2();
/// Reads a, b and s from a 1-D two-mode linear benchmark (analytic1/2).
HmpProblem from_env(const envs::EnvConfig& env);

/// The jump equation has no real root.
class InfeasibleJump : public Error {
 public:
  using Error::Error;
};

/// More interface crossings than the single-switch structure allows.
class StructureError : public Error {
 public:
  using Error::Error;
};

/// The shooting bracket does not enclose a root.
class BracketError : public Error {
 public:
  BracketError(const std::string& what, double residual_lo, double residual_hi)
      : Error(what), residual_lo_(residual_lo), residual_hi_(residual_hi) {}
  double residual_lo() const { return residual_lo_; }
  double residual_hi() const { return residual_hi_; }

 private:
  double residual_lo_;
  double residual_hi_;
};

struct HamiltonianValue {
  double h = 0.0;
  double u = 0.0;
};

/// Pointwise minimized Hamiltonian; u* = -b lambda.
HamiltonianValue hamiltonian(const ScalarMode& mode, double x, double lambda);

/// Costate after crossing from `before` into `after` at x = s, chosen so that
/// the Hamiltonian is continuous. Of the two roots the one closest to
/// lambda_minus is returned.
double costate_jump(const ScalarMode& before, const ScalarMode& after, double s,
                    double lambda_minus);

struct ExtremalSample {
  double t;
  double x;
  double lambda;
  double u;
  int mode;
};

struct Crossing {
  double tau = 0.0;
  int from_mode = 0;
  int to_mode = 0;
  double lambda_minus = 0.0;
  double lambda_plus = 0.0;
  double h_minus = 0.0;
  double h_plus = 0.0;
  double u_minus = 0.0;
  double u_plus = 0.0;
  double udot_minus = 0.0;
  double udot_plus = 0.0;
};

struct Extremal {
  double lambda0 = 0.0;
  std::vector<ExtremalSample> samples;
  std::vector<Crossing> crossings;
  double lambda_tf = 0.0;
  double x_tf = 0.0;
  double cost = 0.0;

  std::optional<double> tau() const {
    if (crossings.empty()) return std::nullopt;
    return crossings.front().tau;
  }
};

struct IntegrationOptions {
  double rtol = 1e-10;
  double atol = 1e-10;
  double event_tol = 1e-13;
  int max_crossings = 2;
};

/// Integrates state, costate and running cost from (x0, lambda0) to t_f,
/// applying the costate jump at each interface crossing.
Extremal integrate_extremal(const HmpProblem& problem, double lambda0,
                            const IntegrationOptions& opts = {});

struct ShootOptions {
  IntegrationOptions integration;
  double bisect_width = 1e-6;
  double root_tol = 1e-12;
  int max_iterations = 200;
};

/// Root-finds lambda0 in [lo, hi] so that lambda(t_f) = 0.
Extremal shoot(const HmpProblem& problem, double lo, double hi, const ShootOptions& opts = {});

struct Bracket {
  double lo;
  double hi;
};

/// Sign changes of lambda(t_f) on a uniform lambda0 grid. Grid points where
/// the jump is infeasible are skipped.
std::vector<Bracket> scan_brackets(const HmpProblem& problem, double lo, double hi, int intervals,
                                   const IntegrationOptions& opts = {});

/// Shoots every bracket found by scan_brackets and returns the converged
/// extremal of least cost. BracketError if none converges.
Extremal solve(const HmpProblem& problem, double lo = -20.0, double hi = 20.0,
               int intervals = 400, const ShootOptions& opts = {});

/// Columns t, x, lambda, u, mode.
void write_extremal_csv(std::ostream& os, const Extremal& extremal);

}  // namespace hybridopt::hmp

#endif  // HYBRIDOPT_HMP_HMP_HPP
