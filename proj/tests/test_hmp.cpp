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
#include "hybridopt/hmp/hmp.hpp"

using namespace hybridopt;

namespace {

// Scalar LQR oracle: P' = -(2aP - b^2 P^2 + 1), P(t_f) = 0, integrated
// backwards with classical RK4 on a fine grid, then the closed loop forward.
struct RiccatiOracle {
  double p0;
  double x_tf;
};

RiccatiOracle riccati(double a, double b, double x0, double tf, int n = 100000) {
  const double h = tf / n;
  auto f = [&](double p) { return -(2.0 * a * p - b * b * p * p + 1.0); };
  std::vector<double> p(static_cast<std::size_t>(n) + 1);
  p[static_cast<std::size_t>(n)] = 0.0;
  for (int k = n; k > 0; --k) {
    const double pk = p[static_cast<std::size_t>(k)];
    const double k1 = f(pk);
    const double k2 = f(pk - 0.5 * h * k1);
    const double k3 = f(pk - 0.5 * h * k2);
    const double k4 = f(pk - h * k3);
    p[static_cast<std::size_t>(k) - 1] = pk - h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  // Closed loop xdot = (a - b^2 P) x with P linearly interpolated at midpoints.
  double x = x0;
  for (int k = 0; k < n; ++k) {
    const double pa = p[static_cast<std::size_t>(k)];
    const double pb = p[static_cast<std::size_t>(k) + 1];
    const double pm = 0.5 * (pa + pb);
    auto g = [&](double pp, double xx) { return (a - b * b * pp) * xx; };
    const double k1 = g(pa, x);
    const double k2 = g(pm, x + 0.5 * h * k1);
    const double k3 = g(pm, x + 0.5 * h * k2);
    const double k4 = g(pb, x + h * k3);
    x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return {p[0], x};
}

}  // namespace

TEST_CASE("hamiltonian closed forms") {
  const auto h1 = hmp::hamiltonian({0.0, 2.0}, 0.0, 1.0);
  CHECK(h1.u == -2.0);
  CHECK(h1.h == -2.0);
  const auto h0 = hmp::hamiltonian({0.3, 1.7}, 3.0, 0.0);
  CHECK(h0.u == 0.0);
  CHECK(h0.h == 4.5);
  const auto h2 = hmp::hamiltonian({-1.0, 1.0}, 1.0, 1.0);
  CHECK(h2.u == -1.0);
  CHECK(h2.h == -1.0);
}

TEST_CASE("costate jump") {
  const auto p = hmp::example1();
  SUBCASE("control continuity when only b changes") {
    for (double lm : {0.1, 0.45, 0.9, 3.0}) {
      CHECK(hmp::costate_jump(p.upper, p.lower, p.s, lm) == doctest::Approx(2.0 * lm));
    }
  }
  SUBCASE("identical modes give no jump") {
    const hmp::ScalarMode m{0.7, 1.3};
    for (double lm : {-2.0, 0.0, 0.4, 5.0}) {
      CHECK(std::abs(hmp::costate_jump(m, m, 1.0, lm) - lm) <= 1e-12 * (1.0 + std::abs(lm)));
    }
  }
  SUBCASE("Hamiltonian is continuous across the jump") {
    const auto q = hmp::example2();
    for (double lm : {0.0, 4.0, 5.0}) {
      const double lp = hmp::costate_jump(q.upper, q.lower, q.s, lm);
      CHECK(std::abs(hmp::hamiltonian(q.upper, q.s, lm).h -
                     hmp::hamiltonian(q.lower, q.s, lp).h) <= 1e-12);
    }
  }
  SUBCASE("no real root") {
    // H_lower(l) <= 1/2 + s^2 a^2 / (2 b^2); a large upper H cannot be matched.
    const hmp::ScalarMode up{5.0, 0.1};
    const hmp::ScalarMode lo{0.0, 1.0};
    CHECK_THROWS_AS(hmp::costate_jump(up, lo, 1.0, 10.0), hmp::InfeasibleJump);
  }
}

TEST_CASE("problem constructors and validation") {
  const auto a1 = hmp::from_env(envs::make_analytic1());
  const auto e1 = hmp::example1();
  CHECK(a1.upper.a == e1.upper.a);
  CHECK(a1.upper.b == e1.upper.b);
  CHECK(a1.lower.b == e1.lower.b);
  CHECK(a1.s == 1.0);
  CHECK(a1.x0 == 2.0);
  CHECK(a1.tf == 1.0);
  const auto a2 = hmp::from_env(envs::make_analytic2());
  CHECK(a2.upper.a == 2.0);
  CHECK(a2.lower.a == -1.0);
  CHECK_THROWS_AS(hmp::from_env(envs::make_example1()), InvalidInput);

  auto bad = e1;
  bad.x0 = 1.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
  bad = e1;
  bad.lower.b = 0.0;
  CHECK_THROWS_AS(bad.validate(), InvalidInput);
}

TEST_CASE("zero initial costate on Example 1 stays in the upper mode") {
  // Upper mode only: x'' = 4x, so x = 2 cosh 2t and lambda = -sinh 2t.
  const auto e = hmp::integrate_extremal(hmp::example1(), 0.0);
  CHECK_FALSE(e.tau().has_value());
  CHECK(std::abs(e.lambda_tf + std::sinh(2.0)) <= 1e-8);
  CHECK(std::abs(e.x_tf - 2.0 * std::cosh(2.0)) <= 1e-8);
  CHECK(e.samples.front().u == 0.0);
}

TEST_CASE("identical modes reproduce the LQR extremal") {
  hmp::HmpProblem p{{0.4, 1.5}, {0.4, 1.5}, 2.0, 1.0, 1.0};
  const auto oracle = riccati(0.4, 1.5, 2.0, 1.0);
  const double l0 = oracle.p0 * p.x0;
  const auto e = hmp::integrate_extremal(p, l0);
  CHECK(std::abs(e.x_tf - oracle.x_tf) <= 1e-6);
  CHECK(std::abs(e.lambda_tf) <= 1e-6);

  const auto sol = hmp::shoot(p, l0 - 1.0, l0 + 1.0);
  CHECK(std::abs(sol.lambda0 - l0) <= 1e-6);
  CHECK(std::abs(sol.cost - 0.5 * oracle.p0 * p.x0 * p.x0) <= 1e-5);
}

TEST_CASE("Example 1 shooting") {
  const auto sol = hmp::solve(hmp::example1());
  REQUIRE(sol.tau().has_value());
  MESSAGE("lambda0 = " << sol.lambda0 << ", tau = " << *sol.tau() << ", J = " << sol.cost);
  CHECK(std::abs(*sol.tau() - 0.4694) <= 1e-3);
  CHECK(std::abs(sol.cost - 1.0209) <= 1e-3);
  CHECK(std::abs(sol.lambda_tf) <= 1e-8);
  const auto& c = sol.crossings.front();
  CHECK(std::abs(c.h_minus - c.h_plus) <= 1e-8);
  CHECK(std::abs(c.u_minus - c.u_plus) <= 1e-6);
  CHECK(std::abs(c.udot_minus - c.udot_plus) >= 0.1);
  CHECK(sol.crossings.size() == 1);
}

TEST_CASE("Example 2 shooting selects the switching extremal") {
  const auto p = hmp::example2();
  const auto sol = hmp::solve(p);
  REQUIRE(sol.tau().has_value());
  MESSAGE("lambda0 = " << sol.lambda0 << ", tau = " << *sol.tau() << ", J = " << sol.cost);
  CHECK(std::abs(*sol.tau() - 0.3132) <= 1e-3);
  CHECK(std::abs(sol.cost - 6.5274) <= 1e-3);
  CHECK(std::abs(sol.lambda_tf) <= 1e-8);
  const auto& c = sol.crossings.front();
  CHECK(std::abs(c.h_minus - c.h_plus) <= 1e-8);
  CHECK(std::abs(c.u_minus - c.u_plus) >= 0.1);

  // The bracket also contains a non-switching stationary point of higher cost.
  const auto other = hmp::shoot(p, 6.5, 7.5);
  CHECK_FALSE(other.tau().has_value());
  CHECK(other.cost > sol.cost);
}

TEST_CASE("shooting errors") {
  const auto p = hmp::example1();
  CHECK_THROWS_AS(hmp::shoot(p, 5.0, 6.0), hmp::BracketError);
  try {
    hmp::shoot(p, 5.0, 6.0);
  } catch (const hmp::BracketError& e) {
    CHECK(e.residual_lo() * e.residual_hi() > 0.0);
  }
  CHECK_THROWS_AS(hmp::shoot(p, 1.0, 0.0), InvalidInput);
  CHECK_THROWS_AS(hmp::integrate_extremal(p, NAN), InvalidInput);
}

TEST_CASE("repeated crossings raise StructureError") {
  // A fast oscillator crosses s = 1 several times within t_f.
  hmp::HmpProblem p{{0.0, 5.0}, {0.0, 5.0}, 2.0, 10.0, 1.0};
  hmp::IntegrationOptions opts;
  opts.max_crossings = 0;
  bool crossed = false;
  for (double l0 : {0.5, 1.0, 2.0}) {
    try {
      hmp::integrate_extremal(p, l0, opts);
    } catch (const hmp::StructureError&) {
      crossed = true;
    }
  }
  CHECK(crossed);
}

TEST_CASE("extremal CSV") {
  const auto e = hmp::integrate_extremal(hmp::example1(), 0.9);
  std::ostringstream os;
  hmp::write_extremal_csv(os, e);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "t,x,lambda,u,mode");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == static_cast<int>(e.samples.size()));
}
