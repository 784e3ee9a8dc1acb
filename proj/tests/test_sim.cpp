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
#include <random>
#include <sstream>

#include "doctest.h"
#include "hybridopt/envs/benchmarks.hpp"
#include "hybridopt/sim/rollout.hpp"

using namespace hybridopt;

namespace {

StateVector s1(double a) {
  StateVector v(1);
  v << a;
  return v;
}

StateVector v2(double a, double b) {
  StateVector v(2);
  v << a, b;
  return v;
}

ControlVector u1(double a) {
  ControlVector u(1);
  u << a;
  return u;
}

std::vector<ControlVector> constant_controls(int n, double value) {
  return std::vector<ControlVector>(static_cast<std::size_t>(n), u1(value));
}

// Two opposing constant fields meeting at x = 0: every trajectory reaching the
// surface slides along it.
SwitchedSystem chattering_system() {
  auto push = [](double v) {
    return ModeDynamics::general(
        [v](const StateVector&, const ControlVector&, double) { return s1(v); });
  };
  auto hs = [](Side side) { return HalfSpace{AffineBoundary{s1(1.0), 0.0}, side}; };
  std::vector<Mode> modes{
      Mode{RegionSpec{1, {hs(Side::kNonNegative)}, s1(1.0)}, push(-1.0),
           StageCost::identity(1, 1, 1.0)},
      Mode{RegionSpec{2, {hs(Side::kNonPositive)}, s1(-1.0)}, push(1.0),
           StageCost::identity(1, 1, 1.0)}};
  return SwitchedSystem(1, 1, std::move(modes), 1.0, ControlBounds::symmetric(1, 1));
}

// Single-mode planar linear system with identity weights.
SwitchedSystem lqr_system(double horizon, double scale) {
  StateMatrix a(2, 2);
  a << 0.0, 1.0, -0.5, -0.2;
  InputMatrix b(2, 1);
  b << 0.0, 1.0;
  std::vector<Mode> modes{Mode{RegionSpec{1, {}, v2(0, 0)}, ModeDynamics::linear(a, b),
                              StageCost::identity(2, 1, scale)}};
  return SwitchedSystem(2, 1, std::move(modes), horizon, ControlBounds::symmetric(1, 1e6));
}

// Closed-form RK4 one-step map of a linear field xdot = A x + B u with held u.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> rk4_map(const Eigen::MatrixXd& a,
                                                    const Eigen::MatrixXd& b,
                                                    double h) {
  const Eigen::MatrixXd i = Eigen::MatrixXd::Identity(a.rows(), a.cols());
  const Eigen::MatrixXd a2 = a * a;
  const Eigen::MatrixXd a3 = a2 * a;
  const Eigen::MatrixXd ad = i + h * a + h * h / 2 * a2 + h * h * h / 6 * a3 +
                             h * h * h * h / 24 * a3 * a;
  const Eigen::MatrixXd bd = h * (i + h / 2 * a + h * h / 6 * a2 + h * h * h / 24 * a3) * b;
  return {ad, bd};
}

}  // namespace

TEST_CASE("event on the 1-D analytic crossing is localized exactly") {
  const auto env = envs::make_analytic1();
  sim::IntegratorConfig cfg;
  cfg.dt = 0.05;
  const auto step = sim::step_with_events(env.system, s1(1.05), u1(-1.0), 0.0, cfg);
  REQUIRE(step.events.size() == 1);
  const auto& e = step.events.front();
  CHECK(std::abs(e.time - 0.025) <= 2 * cfg.event_time_tol);
  CHECK(std::abs(e.state[0] - 1.0) <= 1e-6);
  CHECK(e.from_mode == 1);
  CHECK(e.to_mode == 2);
  // Remaining 0.025 s at xdot = u = -1.
  CHECK(std::abs(step.state[0] - 0.975) <= 1e-8);
}

TEST_CASE("a step without crossings is a plain RK4 step") {
  const auto env = envs::make_example1();
  const StateVector x = v2(-8, -6);
  const auto step = sim::step_with_events(env.system, x, u1(0.3), 0.0, env.integrator);
  CHECK(step.events.empty());
  const StateVector plain =
      sim::advance(env.system, 1, x, u1(0.3), 0.0, env.integrator.dt, sim::Scheme::kRk4);
  CHECK((step.state - plain).norm() == 0.0);
}

TEST_CASE("sliding on a surface raises ZenoError or chatters when frozen") {
  const SwitchedSystem sys = chattering_system();
  sim::IntegratorConfig cfg;
  cfg.dt = 0.01;
  CHECK_THROWS_AS(sim::step_with_events(sys, s1(0.001), u1(0), 0.0, cfg), ZenoError);

  cfg.zeno_policy = sim::ZenoPolicy::kFreeze;
  const auto step = sim::step_with_events(sys, s1(0.001), u1(0), 0.0, cfg);
  CHECK(step.chattering);
  CHECK(static_cast<int>(step.events.size()) == cfg.zeno_cap);
  CHECK(std::isfinite(step.state[0]));
}

TEST_CASE("rollouts report the step index of a Zeno failure") {
  const SwitchedSystem sys = chattering_system();
  sim::IntegratorConfig cfg;
  cfg.dt = 0.01;
  try {
    sim::rollout_open_loop(sys, s1(0.025), constant_controls(100, 0.0), cfg);
    FAIL("expected ZenoError");
  } catch (const ZenoError& e) {
    CHECK(e.step_index() == 2);
  }
}

TEST_CASE("invalid inputs are rejected") {
  const auto env = envs::make_analytic1();
  CHECK_THROWS_AS(sim::step_with_events(env.system, s1(NAN), u1(0), 0.0, env.integrator),
                  InvalidInput);
  CHECK_THROWS_AS(sim::rollout_open_loop(env.system, env.x0, constant_controls(3, 0.0),
                                         env.integrator),
                  InvalidInput);
  sim::IntegratorConfig bad;
  bad.dt = 1e-10;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("zero-length horizon costs only the terminal term") {
  std::vector<Mode> modes{Mode{RegionSpec{1, {}, s1(0)},
                               ModeDynamics::linear(StateMatrix::Zero(1, 1),
                                                    InputMatrix::Ones(1, 1)),
                               StageCost::identity(1, 1, 1.0)}};
  const SwitchedSystem sys(1, 1, std::move(modes), 0.0, ControlBounds::symmetric(1, 1),
                           std::nullopt,
                           [](const StateVector& x) { return 3.0 * x[0] * x[0]; });
  const auto traj = sim::rollout_open_loop(sys, s1(2.0), {}, sim::IntegratorConfig{});
  CHECK(traj.total_cost == 12.0);
  CHECK(traj.states.size() == 1);
}

TEST_CASE("resting state accumulates the constant integrand") {
  const auto env = envs::make_analytic1();
  const auto traj =
      sim::rollout_open_loop(env.system, env.x0, constant_controls(100, 0.0), env.integrator);
  CHECK(traj.states.back()[0] == 2.0);
  CHECK(traj.total_cost == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(traj.events.empty());
}

TEST_CASE("Example 1 uncontrolled cost agrees with a fine-step reference") {
  const auto env = envs::make_example1();
  const auto coarse = sim::rollout_open_loop(env.system, env.x0,
                                             constant_controls(200, 0.0), env.integrator);
  sim::IntegratorConfig fine = env.integrator;
  fine.dt = 1e-4;
  const auto reference =
      sim::rollout_open_loop(env.system, env.x0, constant_controls(20000, 0.0), fine);
  MESSAGE("coarse J = " << coarse.total_cost << ", reference J = " << reference.total_cost);
  // The left-endpoint cost rule carries a first-order error of about
  // dt/2 * (L(x0) - L(x_end)) = 0.05 here, just above 0.1% of J; the slope
  // test below confirms the gap is pure quadrature error.
  CHECK(std::abs(coarse.total_cost - reference.total_cost) <= 2e-3 * reference.total_cost);
}

TEST_CASE("trajectory bookkeeping is consistent") {
  const auto env = envs::make_example1();
  std::mt19937_64 rng(5);
  std::normal_distribution<double> noise(0.0, 4.0);
  std::vector<ControlVector> u;
  for (int k = 0; k < 200; ++k) u.push_back(u1(noise(rng)));
  const auto traj = sim::rollout_open_loop(env.system, env.x0, u, env.integrator);
  CHECK(traj.states.size() == traj.controls.size() + 1);
  CHECK(traj.times.size() == traj.states.size());
  CHECK(traj.modes.size() == traj.states.size());
  CHECK(traj.step_costs.size() == traj.controls.size());
  double sum = 0.0;
  for (double c : traj.step_costs) sum += c;
  CHECK(std::abs(traj.total_cost - sum - traj.terminal_cost) <= 1e-12);
  for (const auto& c : traj.controls) CHECK(std::abs(c[0]) <= 10.0);
  for (const auto& e : traj.events) CHECK(e.from_mode != e.to_mode);
}

TEST_CASE("state increments are bounded by the field along the step") {
  const auto env = envs::make_example3();
  std::mt19937_64 rng(8);
  std::normal_distribution<double> noise(0.0, 3.0);
  std::vector<ControlVector> u;
  for (int k = 0; k < 200; ++k) u.push_back(u1(noise(rng)));
  const auto traj = sim::rollout_open_loop(env.system, env.x0, u, env.integrator);
  REQUIRE(!traj.events.empty());
  const double dt = env.integrator.dt;
  for (int k = 0; k < traj.num_steps(); ++k) {
    const StateVector& x = traj.states[k];
    double sup = 0.0;
    // Sample every mode's field over a neighbourhood that contains the step.
    for (int j = 0; j <= 40; ++j) {
      const double s = j / 40.0;
      const StateVector p = (1 - s) * x + s * traj.states[k + 1];
      for (ModeId q = 1; q <= env.system.num_modes(); ++q) {
        if (env.system.classify(p) != q && env.system.classify(x) != q) continue;
        sup = std::max(sup, env.system.mode_field(q, p, traj.controls[k], 0.0).norm());
      }
    }
    CHECK((traj.states[k + 1] - x).norm() <= sup * dt * (1 + 1e-6) + 1e-9);
  }
}

TEST_CASE("event localization bound on analytic crossings") {
  for (const char* name : {"analytic1", "analytic2"}) {
    const auto env = envs::make_env(name);
    for (double u : {-1.0, -2.0, -3.5, -5.0}) {
      const auto traj = sim::rollout_open_loop(env.system, env.x0,
                                               constant_controls(100, u), env.integrator);
      for (const auto& e : traj.events) {
        // |g'| is bounded by the field magnitude near x = 1.
        double sup = 0.0;
        for (ModeId q = 1; q <= 2; ++q) {
          sup = std::max(sup, std::abs(env.system.mode_field(q, s1(1.0), u1(u), 0.0)[0]));
        }
        CHECK(std::abs(e.state[0] - 1.0) <= 10 * env.integrator.event_time_tol * sup);
      }
    }
  }
}

TEST_CASE("refinement order of the integrators") {
  // Single-mode problem: no events, smooth field.
  const SwitchedSystem sys = lqr_system(1.0, 0.5);
  const StateVector x0 = v2(1.0, -0.5);
  auto terminal = [&](sim::Scheme scheme, double dt) {
    sim::IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.scheme = scheme;
    const int n = sim::horizon_steps(sys, cfg);
    return sim::rollout_open_loop(sys, x0, constant_controls(n, 0.7), cfg);
  };
  auto slope = [&](sim::Scheme scheme, bool use_cost) {
    const auto a = terminal(scheme, 0.02);
    const auto b = terminal(scheme, 0.01);
    const auto c = terminal(scheme, 0.005);
    const double e1 = use_cost ? std::abs(a.total_cost - b.total_cost)
                               : (a.states.back() - b.states.back()).norm();
    const double e2 = use_cost ? std::abs(b.total_cost - c.total_cost)
                               : (b.states.back() - c.states.back()).norm();
    return std::log2(e1 / e2);
  };
  CHECK(std::abs(slope(sim::Scheme::kEuler, false) - 1.0) <= 0.3);
  CHECK(std::abs(slope(sim::Scheme::kRk4, false) - 4.0) <= 0.3 * 4.0);
  // Left-endpoint quadrature keeps the cost first order for either scheme.
  CHECK(std::abs(slope(sim::Scheme::kRk4, true) - 1.0) <= 0.3);
  CHECK(std::abs(slope(sim::Scheme::kEuler, true) - 1.0) <= 0.3);
}

TEST_CASE("rollout_policy reduces to open loop for trivial policies") {
  const auto env = envs::make_example1();
  auto zero = [](const StateVector&, double) { return u1(0.0); };
  const auto closed = sim::rollout_policy(env.system, env.x0, zero, {}, env.integrator);
  const auto open = sim::rollout_open_loop(env.system, env.x0, constant_controls(200, 0.0),
                                           env.integrator);
  CHECK(closed.total_cost == open.total_cost);

  auto push = [](int) { return u1(15.0); };
  const auto noisy = sim::rollout_policy(env.system, env.x0, zero, push, env.integrator);
  const auto clamped = sim::rollout_open_loop(env.system, env.x0,
                                              constant_controls(200, 10.0), env.integrator);
  CHECK(noisy.total_cost == clamped.total_cost);
  CHECK((noisy.states.back() - clamped.states.back()).norm() == 0.0);
}

TEST_CASE("linear feedback cost matches the discrete Lyapunov recursion") {
  const double scale = 0.5;
  const SwitchedSystem sys = lqr_system(2.0, scale);
  sim::IntegratorConfig cfg;
  const StateVector x0 = v2(1.5, -1.0);
  Eigen::RowVector2d gain(0.8, 1.1);
  auto policy = [&](const StateVector& x, double) {
    return u1(-gain.dot(Eigen::Vector2d(x[0], x[1])));
  };
  const auto traj = sim::rollout_policy(sys, x0, policy, {}, cfg);

  Eigen::MatrixXd a(2, 2), b(2, 1);
  a << 0.0, 1.0, -0.5, -0.2;
  b << 0.0, 1.0;
  const auto [ad, bd] = rk4_map(a, b, cfg.dt);
  const Eigen::MatrixXd closed = ad - bd * gain;
  const Eigen::MatrixXd q = scale * cfg.dt *
                            (Eigen::MatrixXd::Identity(2, 2) + gain.transpose() * gain);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(2, 2);
  for (int k = 0; k < 200; ++k) p = q + closed.transpose() * p * closed;
  const Eigen::Vector2d x(x0[0], x0[1]);
  const double expected = x.dot(p * x);
  CHECK(std::abs(traj.total_cost - expected) <= 5e-3 * expected);
  CHECK(std::abs(traj.total_cost - expected) <= 1e-9 * expected);
}

TEST_CASE("identical inputs give bit-identical trajectories") {
  const auto env = envs::make_example2();
  std::mt19937_64 rng(99);
  std::normal_distribution<double> noise(0.0, 5.0);
  std::vector<ControlVector> u;
  for (int k = 0; k < 200; ++k) u.push_back(u1(noise(rng)));
  const auto a = sim::rollout_open_loop(env.system, env.x0, u, env.integrator);
  const auto b = sim::rollout_open_loop(env.system, env.x0, u, env.integrator);
  std::ostringstream sa, sb;
  sim::write_trajectory_csv(sa, a);
  sim::write_trajectory_csv(sb, b);
  CHECK(sa.str() == sb.str());
  CHECK(a.total_cost == b.total_cost);
}

TEST_CASE("trajectory CSV layout") {
  const auto env = envs::make_analytic1();
  const auto traj =
      sim::rollout_open_loop(env.system, env.x0, constant_controls(100, -3.0), env.integrator);
  std::ostringstream os;
  sim::write_trajectory_csv(os, traj);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "t,x_1,u_1,mode,step_cost");
  int rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == 101);

  std::ostringstream ev;
  sim::write_events_csv(ev, traj);
  CHECK(ev.str().rfind("tau,x_1,from,to,boundary\n", 0) == 0);
  CHECK(traj.events.size() == 1);
}
