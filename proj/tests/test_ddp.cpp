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

#include <cmath>
#include <sstream>

#include "doctest.h"
#include "hybridopt/ddp/ddp.hpp"
#include "hybridopt/envs/benchmarks.hpp"

using namespace hybridopt;

namespace {

StateVector v2(double a, double b) {
  StateVector v(2);
  v << a, b;
  return v;
}

StateVector s1(double a) {
  StateVector v(1);
  v << a;
  return v;
}

ControlVector u1(double a) {
  ControlVector u(1);
  u << a;
  return u;
}

Eigen::MatrixXd lqr_a() {
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 1.0, -0.5, -0.2;
  return a;
}

Eigen::MatrixXd lqr_b() {
  Eigen::MatrixXd b(2, 1);
  b << 0.0, 1.0;
  return b;
}

SwitchedSystem lqr_system(double scale) {
  std::vector<Mode> modes{Mode{RegionSpec{1, {}, v2(0, 0)},
                              ModeDynamics::linear(lqr_a(), lqr_b()),
                              StageCost::identity(2, 1, scale)}};
  return SwitchedSystem(2, 1, std::move(modes), 1.0, ControlBounds::symmetric(1, 1e6));
}

// Closed-form RK4 one-step map of xdot = A x + B u with held u.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> rk4_map(const Eigen::MatrixXd& a,
                                                    const Eigen::MatrixXd& b, double h) {
  const Eigen::MatrixXd i = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const Eigen::MatrixXd a2 = a * a;
  const Eigen::MatrixXd a3 = a2 * a;
  const Eigen::MatrixXd ad =
      i + h * a + h * h / 2 * a2 + h * h * h / 6 * a3 + h * h * h * h / 24 * a3 * a;
  const Eigen::MatrixXd bd = h * (i + h / 2 * a + h * h / 6 * a2 + h * h * h / 24 * a3) * b;
  return {ad, bd};
}

// Discrete Riccati recursion for sum x'Qx + u'Ru with Q = s dt I, R = s dt.
struct RiccatiResult {
  std::vector<Eigen::MatrixXd> gains;  // u = -K x
  Eigen::MatrixXd p0;
};

RiccatiResult discrete_riccati(double scale, double dt, int horizon) {
  const auto [ad, bd] = rk4_map(lqr_a(), lqr_b(), dt);
  const Eigen::MatrixXd q = scale * dt * Eigen::MatrixXd::Identity(2, 2);
  const Eigen::MatrixXd r = scale * dt * Eigen::MatrixXd::Identity(1, 1);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2, 2);
  RiccatiResult out;
  out.gains.resize(static_cast<std::size_t>(horizon));
  for (int k = horizon - 1; k >= 0; --k) {
    const Eigen::MatrixXd kk = (r + bd.transpose() * p * bd).ldlt().solve(bd.transpose() * p * ad);
    p = q + ad.transpose() * p * ad - ad.transpose() * p * bd * kk;
    out.gains[static_cast<std::size_t>(k)] = kk;
  }
  out.p0 = p;
  return out;
}

sim::IntegratorConfig rk4(double dt) {
  sim::IntegratorConfig c;
  c.dt = dt;
  return c;
}

}  // namespace

TEST_CASE("config validation") {
  ddp::DdpConfig c;
  CHECK(c.alphas.size() == 11);
  CHECK(c.alphas.back() == std::ldexp(1.0, -10));
  c.validate();
  c.tol = 0.0;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = {};
  c.alphas = {0.5, 1.0};
  CHECK_THROWS_AS(c.validate(), InvalidInput);
}

TEST_CASE("linearization of a linear field matches the RK4 polynomial") {
  const auto sys = lqr_system(0.5);
  const auto lin = ddp::linearize_step(sys, v2(0.3, -0.7), u1(0.2), 0.0, rk4(0.01));
  const auto [ad, bd] = rk4_map(lqr_a(), lqr_b(), 0.01);
  CHECK((lin.a - ad).cwiseAbs().maxCoeff() <= 1e-7);
  CHECK((lin.b - bd).cwiseAbs().maxCoeff() <= 1e-7);
  CHECK(lin.one_sided == 0);
}

TEST_CASE("Euler input Jacobian of xdot = 2u is 2 dt") {
  const auto env = envs::make_analytic1();
  auto cfg = env.integrator;
  cfg.scheme = sim::Scheme::kEuler;
  const auto lin = ddp::linearize_step(env.system, s1(2.5), u1(0.3), 0.0, cfg);
  CHECK(std::abs(lin.b(0, 0) - 2.0 * cfg.dt) <= 1e-10);
  CHECK(std::abs(lin.a(0, 0) - 1.0) <= 1e-10);
}

TEST_CASE("central and one-sided differences agree away from boundaries") {
  const auto env = envs::make_example1();
  const StateVector x = v2(-8, -8);
  const ControlVector u = u1(0.5);
  const double h = 1e-5;
  const auto lin = ddp::linearize_step(env.system, x, u, 0.0, env.integrator, h);
  CHECK(lin.one_sided == 0);
  const StateVector base = sim::step_with_events(env.system, x, u, 0.0, env.integrator).state;
  for (int i = 0; i < 2; ++i) {
    StateVector e = StateVector::Zero(2);
    e[i] = h;
    const StateVector fwd =
        (sim::step_with_events(env.system, x + e, u, 0.0, env.integrator).state - base) / h;
    CHECK((fwd - lin.a.col(i)).cwiseAbs().maxCoeff() <= 1e-6 * (1.0 + fwd.norm()));
  }
}

TEST_CASE("perturbations straddling an interface use one-sided differences") {
  const auto env = envs::make_analytic1();
  // Starts 1e-6 above s = 1; the minus perturbation starts in the other mode.
  const auto lin = ddp::linearize_step(env.system, s1(1.0 + 5e-6), u1(1.0), 0.0, env.integrator);
  CHECK(lin.one_sided >= 1);
  CHECK(std::abs(lin.a(0, 0) - 1.0) <= 1e-6);
}

TEST_CASE("backward pass reproduces the discrete Riccati gains") {
  const double scale = 0.5;
  const double dt = 0.01;
  const int horizon = 100;
  const auto sys = lqr_system(scale);
  const auto oracle = discrete_riccati(scale, dt, horizon);
  std::vector<ControlVector> u(static_cast<std::size_t>(horizon), u1(0.0));
  const auto nominal = sim::rollout_open_loop(sys, v2(1, 0), u, rk4(dt));
  std::vector<ddp::Linearization> lins;
  std::vector<ddp::StepQuadratic> costs;
  for (int k = 0; k < horizon; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    lins.push_back(ddp::linearize_step(sys, nominal.states[ks], u[ks], nominal.times[ks], rk4(dt)));
    costs.push_back(ddp::quadratize_cost(sys, nominal.states[ks], u[ks], dt));
  }
  const auto term = ddp::quadratize_terminal(sys, nominal.states.back());
  const auto gains = ddp::backward_pass(lins, costs, term, 0.0);
  double worst = 0.0;
  for (int k = 0; k < horizon; ++k) {
    const auto ks = static_cast<std::size_t>(k);
    worst = std::max(worst, (gains.K[ks] + oracle.gains[ks]).cwiseAbs().maxCoeff());
  }
  MESSAGE("max gain error " << worst);
  CHECK(worst <= 1e-8);

  SUBCASE("vanishing step under heavy regularization") {
    const auto heavy = ddp::backward_pass(lins, costs, term, 1e12);
    for (const auto& k : heavy.k) CHECK(k.norm() <= 1e-9);
  }
  SUBCASE("forward pass with alpha = 1 descends") {
    const auto cand = ddp::forward_pass(sys, nominal, gains, 1.0, rk4(dt));
    CHECK(cand.total_cost <= nominal.total_cost);
  }
}

TEST_CASE("zero cost weights give zero gains") {
  const auto sys = lqr_system(0.0);
  std::vector<ControlVector> u(10, u1(0.3));
  const auto nominal = sim::rollout_open_loop(sys, v2(1, 0), u, rk4(0.1));
  std::vector<ddp::Linearization> lins;
  std::vector<ddp::StepQuadratic> costs;
  for (std::size_t k = 0; k < 10; ++k) {
    lins.push_back(ddp::linearize_step(sys, nominal.states[k], u[k], nominal.times[k], rk4(0.1)));
    costs.push_back(ddp::quadratize_cost(sys, nominal.states[k], u[k], 0.1));
  }
  const auto gains =
      ddp::backward_pass(lins, costs, ddp::quadratize_terminal(sys, nominal.states.back()), 1e-6);
  for (std::size_t k = 0; k < 10; ++k) {
    CHECK(gains.k[k].norm() == 0.0);
    CHECK(gains.K[k].norm() == 0.0);
  }
  CHECK(gains.dv1 == 0.0);
  CHECK(gains.dv2 == 0.0);
}

TEST_CASE("indefinite Q_uu is reported") {
  std::vector<ddp::Linearization> lins(1);
  lins[0].a = StateMatrix::Identity(1, 1);
  lins[0].b = InputMatrix::Ones(1, 1);
  std::vector<ddp::StepQuadratic> costs(1);
  costs[0].lx = StateVector::Zero(1);
  costs[0].lu = ControlVector::Zero(1);
  costs[0].lxx = StateMatrix::Zero(1, 1);
  costs[0].luu = ControlMatrix::Constant(1, 1, -1.0);
  costs[0].lux = GainMatrix::Zero(1, 1);
  ddp::TerminalQuadratic term{StateVector::Zero(1), StateMatrix::Zero(1, 1)};
  CHECK_THROWS_AS(ddp::backward_pass(lins, costs, term, 1e-6), ddp::NotPositiveDefinite);
  CHECK_NOTHROW(ddp::backward_pass(lins, costs, term, 2.0));
}

TEST_CASE("zero step with zero feedback reproduces the nominal") {
  const auto env = envs::make_example1();
  std::vector<ControlVector> u;
  for (int k = 0; k < 200; ++k) u.push_back(u1(std::sin(0.05 * k) * 5));
  const auto nominal = sim::rollout_open_loop(env.system, env.x0, u, env.integrator);
  ddp::Gains g;
  g.K.assign(200, GainMatrix::Zero(1, 2));
  g.k.assign(200, ControlVector::Constant(1, 3.0));
  const auto same = ddp::forward_pass(env.system, nominal, g, 0.0, env.integrator);
  CHECK(same.total_cost == nominal.total_cost);
  for (std::size_t k = 0; k < same.states.size(); ++k) CHECK(same.states[k] == nominal.states[k]);
}

TEST_CASE("LQR instance converges to the Riccati cost in at most 3 iterations") {
  const double scale = 0.5;
  const auto sys = lqr_system(scale);
  const auto oracle = discrete_riccati(scale, 0.01, 100);
  const StateVector x0 = v2(1.5, -0.5);
  const double j_ref = x0.dot(oracle.p0 * x0);
  const auto sol = ddp::solve(sys, x0, rk4(0.01));
  MESSAGE("J = " << sol.cost() << ", Riccati " << j_ref << ", iterations " << sol.iterations);
  CHECK(sol.converged);
  CHECK(sol.iterations <= 3);
  CHECK(std::abs(sol.cost() - j_ref) <= 1e-6 * j_ref);
}

TEST_CASE("Example 1: monotone cost, feasible controls, control jump at a switch") {
  const auto env = envs::make_example1();
  const auto sol = ddp::solve(env.system, env.x0, env.integrator);
  MESSAGE("Example 1 DDP J = " << sol.cost() << " after " << sol.iterations << " iterations");
  for (std::size_t i = 1; i < sol.cost_history.size(); ++i) {
    CHECK(sol.cost_history[i] <= sol.cost_history[i - 1]);
  }
  for (const auto& u : sol.nominal.controls) CHECK(std::abs(u[0]) <= 10.0);
  CHECK(sol.cost() < sol.cost_history.front());

  const double dt = env.integrator.dt;
  bool jump_at_switch = false;
  for (const auto& e : sol.nominal.events) {
    for (int k = 1; k < sol.nominal.num_steps(); ++k) {
      const auto ks = static_cast<std::size_t>(k);
      const double jump = std::abs(sol.nominal.controls[ks][0] - sol.nominal.controls[ks - 1][0]);
      if (jump >= 0.1 && std::abs(sol.nominal.times[ks] - e.time) <= dt + 1e-12) {
        jump_at_switch = true;
      }
    }
  }
  CHECK(jump_at_switch);

  std::ostringstream log;
  ddp::write_iteration_log_csv(log, sol);
  CHECK(log.str().rfind("iter,J,lambda,alpha,accepted\n", 0) == 0);
  std::ostringstream gains;
  ddp::write_gains_csv(gains, sol);
  CHECK(gains.str().rfind("k,k_1,K_11,K_12\n", 0) == 0);
}

TEST_CASE("bad initial controls are rejected") {
  const auto env = envs::make_example1();
  ddp::DdpConfig cfg;
  cfg.u_init.assign(3, u1(0));
  CHECK_THROWS_AS(ddp::solve(env.system, env.x0, env.integrator, cfg), InvalidInput);
}
