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

#include "doctest.h"
#include "hybridopt/core/switched_system.hpp"
#include "hybridopt/envs/benchmarks.hpp"

using namespace hybridopt;

namespace {

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

int find_boundary(const SwitchedSystem& sys, double n1, double n2, double c) {
  for (std::size_t i = 0; i < sys.boundaries().size(); ++i) {
    const auto& b = sys.boundaries()[i];
    if (b.normal[0] == n1 && b.normal[1] == n2 && b.offset == c) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

}  // namespace

TEST_CASE("classify follows the region geometry and lowest-id tie-break") {
  const auto ex1 = envs::make_example1();
  const auto ex3 = envs::make_example3();
  CHECK(ex3.system.classify(v2(8, 8)) == 3);
  CHECK(ex1.system.classify(v2(-8, -6)) == 1);
  // On the R1/R2 wall of Example 3.
  CHECK(ex3.system.classify(v2(3, 7)) == 1);
  CHECK(ex3.system.classify(v2(-1, -1)) == 7);
  // Corner shared by all four regions of Example 1.
  CHECK(ex1.system.classify(v2(-5, -5)) == 1);
  CHECK(ex1.system.classify(v2(-2, -2)) == 2);
}

TEST_CASE("vector_field dispatches to the active mode") {
  const auto ex1 = envs::make_example1();
  const auto ex3 = envs::make_example3();
  const auto a1 = envs::make_analytic1();

  const StateVector f3 = ex3.system.vector_field(v2(1, 1), u1(0), 0.0);
  CHECK(f3[0] == doctest::Approx(-0.5));
  CHECK(f3[1] == doctest::Approx(-0.7));

  const StateVector f1 = ex1.system.vector_field(v2(-8, -6), u1(0), 0.0);
  CHECK(f1[0] == -4.0);
  CHECK(f1[1] == 22.0);

  StateVector x(1);
  x << 2.0;
  CHECK(a1.system.vector_field(x, u1(1.0), 0.0)[0] == 2.0);
}

TEST_CASE("vector_field clamps controls and rejects non-finite input") {
  const auto ex1 = envs::make_example1();
  const StateVector x = v2(1, 2);
  CHECK((ex1.system.vector_field(x, u1(100.0), 0.0) -
         ex1.system.vector_field(x, u1(10.0), 0.0))
            .norm() == 0.0);
  CHECK_THROWS_AS(ex1.system.vector_field(v2(NAN, 0), u1(0), 0.0), InvalidInput);
  CHECK_THROWS_AS(ex1.system.vector_field(x, u1(INFINITY), 0.0), InvalidInput);
}

TEST_CASE("stage_cost uses the classified region's scale") {
  const auto ex2 = envs::make_example2();
  CHECK(ex2.system.stage_cost(v2(1, 1), u1(0)) == doctest::Approx(1.0));
  CHECK(ex2.system.mode(3).cost(v2(1, 1), u1(0)) == doctest::Approx(10.0));
  CHECK(ex2.system.stage_cost(v2(0, 0), u1(0)) == 0.0);
  // A point inside R3 pays the large weight.
  CHECK(ex2.system.stage_cost(v2(0, -6), u1(1)) == doctest::Approx(5.0 * 37.0));
}

TEST_CASE("boundary_values reports every distinct surface") {
  const auto ex1 = envs::make_example1();
  const auto ex3 = envs::make_example3();
  CHECK(ex1.system.boundaries().size() == 5);
  CHECK(ex3.system.boundaries().size() == 7);

  const int m13 = find_boundary(ex1.system, 1, 0, 5);
  const int m23 = find_boundary(ex1.system, 1, -1, 0);
  REQUIRE(m13 >= 0);
  REQUIRE(m23 >= 0);
  const auto at = ex1.system.boundary_values(v2(-5, -6));
  CHECK(at[static_cast<std::size_t>(m13)].value == 0.0);
  const auto origin = ex1.system.boundary_values(v2(0, 0));
  CHECK(origin[static_cast<std::size_t>(m23)].value == 0.0);
  for (std::size_t i = 0; i < origin.size(); ++i) CHECK(origin[i].id == static_cast<int>(i));

  const int box = find_boundary(ex3.system, 0, 1, -5);
  REQUIRE(box >= 0);
  CHECK(ex3.system.boundary_values(v2(5, 5))[static_cast<std::size_t>(box)].value == 0.0);
}

TEST_CASE("classify is constant near region witnesses") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (const char* name : {"ex1", "ex2", "ex3"}) {
    const auto env = envs::make_env(name);
    for (const Mode& m : env.system.modes()) {
      const StateVector& w = m.region.witness;
      double radius = m.region.slack(w);
      if (!std::isfinite(radius)) radius = 0.5;  // complement region
      // Lower-id regions can still claim nearby points of the complement.
      if (m.region.constraints.empty()) continue;
      for (int i = 0; i < 200; ++i) {
        StateVector d = v2(unit(rng), unit(rng));
        d *= 0.99 * radius / std::max(1.0, d.norm());
        CHECK(env.system.classify(w + d) == m.region.id);
      }
    }
  }
}

TEST_CASE("linear modes are homogeneous in (x, u)") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(-10.0, 10.0);
  const auto ex3 = envs::make_example3();
  for (ModeId q = 1; q <= ex3.system.num_modes(); ++q) {
    for (int i = 0; i < 20; ++i) {
      const StateVector x = v2(unit(rng), unit(rng));
      const ControlVector u = u1(unit(rng));
      const double alpha = unit(rng);
      const StateVector lhs = ex3.system.mode_field(q, alpha * x, alpha * u, 0.0);
      const StateVector rhs = alpha * ex3.system.mode_field(q, x, u, 0.0);
      CHECK((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
    }
  }
}

TEST_CASE("stage costs are non-negative and vanish at the origin") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(-10.0, 10.0);
  for (auto name : envs::kEnvNames) {
    const auto env = envs::make_env(name);
    const int n = env.system.state_dim();
    CHECK(env.system.stage_cost(StateVector::Zero(n), u1(0)) == 0.0);
    for (int i = 0; i < 100; ++i) {
      StateVector x(n);
      for (int j = 0; j < n; ++j) x[j] = unit(rng);
      CHECK(env.system.stage_cost(x, u1(unit(rng))) >= 0.0);
    }
  }
}

TEST_CASE("Example 1 partition covers the box with disjoint interiors") {
  const auto ex1 = envs::make_example1();
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> unit(-10.0, 10.0);
  int uncovered = 0;
  int overlapping = 0;
  for (int i = 0; i < 100000; ++i) {
    const StateVector x = v2(unit(rng), unit(rng));
    int claims = 0;
    for (const Mode& m : ex1.system.modes()) claims += m.region.contains(x) ? 1 : 0;
    uncovered += claims == 0 ? 1 : 0;
    overlapping += claims > 1 ? 1 : 0;
  }
  CHECK(uncovered == 0);
  CHECK(overlapping == 0);
}

TEST_CASE("malformed systems are rejected at construction") {
  StateMatrix a = StateMatrix::Identity(1, 1);
  InputMatrix b = InputMatrix::Ones(1, 1);
  StateVector w(1);
  w << 0.0;
  auto mode = [&](ModeId id, StateVector witness, std::vector<HalfSpace> hs) {
    return Mode{RegionSpec{id, std::move(hs), std::move(witness)},
                ModeDynamics::linear(a, b), StageCost::identity(1, 1, 1.0)};
  };
  StateVector one(1);
  one << 1.0;
  StateVector zero_normal(1);
  zero_normal << 0.0;

  SUBCASE("id gap") {
    std::vector<Mode> modes{mode(2, w, {})};
    CHECK_THROWS_AS(SwitchedSystem(1, 1, modes, 1.0, ControlBounds::symmetric(1, 1)),
                    InvalidInput);
  }
  SUBCASE("witness on the boundary") {
    std::vector<Mode> modes{mode(1, w, {HalfSpace{AffineBoundary{one, 0.0}, Side::kNonNegative}})};
    CHECK_THROWS_AS(SwitchedSystem(1, 1, modes, 1.0, ControlBounds::symmetric(1, 1)),
                    InvalidInput);
  }
  SUBCASE("zero normal") {
    std::vector<Mode> modes{
        mode(1, w, {HalfSpace{AffineBoundary{zero_normal, 1.0}, Side::kNonNegative}})};
    CHECK_THROWS_AS(SwitchedSystem(1, 1, modes, 1.0, ControlBounds::symmetric(1, 1)),
                    InvalidInput);
  }
  SUBCASE("witness claimed by a lower id") {
    std::vector<Mode> modes{mode(1, w, {}), mode(2, w, {})};
    CHECK_THROWS_AS(SwitchedSystem(1, 1, modes, 1.0, ControlBounds::symmetric(1, 1)),
                    InvalidInput);
  }
}

TEST_CASE("fallback picks the least-violated region when none claims x") {
  StateMatrix a = StateMatrix::Identity(1, 1);
  InputMatrix b = InputMatrix::Ones(1, 1);
  auto hs = [](double offset, Side side) {
    StateVector n(1);
    n << 1.0;
    return HalfSpace{AffineBoundary{n, offset}, side};
  };
  auto point = [](double v) {
    StateVector x(1);
    x << v;
    return x;
  };
  // Region 1: x <= -1, region 2: x >= 1; the gap (-1, 1) is unclaimed.
  std::vector<Mode> modes{
      Mode{RegionSpec{1, {hs(1.0, Side::kNonPositive)}, point(-2)},
           ModeDynamics::linear(a, b), StageCost::identity(1, 1, 1.0)},
      Mode{RegionSpec{2, {hs(-1.0, Side::kNonNegative)}, point(2)},
           ModeDynamics::linear(a, b), StageCost::identity(1, 1, 1.0)}};
  const SwitchedSystem nearest(1, 1, modes, 1.0, ControlBounds::symmetric(1, 1));
  CHECK(nearest.classify(point(-0.5)) == 1);
  CHECK(nearest.classify(point(0.7)) == 2);
  const SwitchedSystem fixed(1, 1, modes, 1.0, ControlBounds::symmetric(1, 1), 2);
  CHECK(fixed.classify(point(-0.5)) == 2);
}
