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

#include "hybridopt/envs/benchmarks.hpp"

#include <cmath>

#include "hybridopt/sim/rollout.hpp"

namespace hybridopt::envs {

namespace {

StateVector vec2(double a, double b) {
  StateVector v(2);
  v << a, b;
  return v;
}

StateVector vec1(double a) {
  StateVector v(1);
  v << a;
  return v;
}

StateMatrix mat2(double a, double b, double c, double d) {
  StateMatrix m(2, 2);
  m << a, b, c, d;
  return m;
}

// g(x) = n1 x1 + n2 x2 + c, required to be >= 0 or <= 0.
HalfSpace half(double n1, double n2, double c, Side side) {
  return {AffineBoundary{vec2(n1, n2), c}, side};
}

constexpr Side kGe = Side::kNonNegative;
constexpr Side kLe = Side::kNonPositive;

InputMatrix planar_input() {
  InputMatrix b(2, 1);
  b << 1.0, 1.0;
  return b;
}

sim::IntegratorConfig benchmark_integrator() {
  sim::IntegratorConfig cfg;
  cfg.dt = 0.01;
  cfg.zeno_policy = sim::ZenoPolicy::kFreeze;
  return cfg;
}

// Partition with interfaces m12: x2+5, m13: x1+5, m23: x1-x2, m24: x1+2,
// m34: x2+2.
std::vector<RegionSpec> four_region_partition() {
  return {
      {1, {half(1, 0, 5, kLe), half(0, 1, 5, kLe)}, vec2(-8, -8)},
      {2, {half(0, 1, 5, kGe), half(1, -1, 0, kLe), half(1, 0, 2, kLe)}, vec2(-6, 0)},
      {3, {half(1, 0, 5, kGe), half(1, -1, 0, kGe), half(0, 1, 2, kLe)}, vec2(0, -6)},
      {4, {half(1, 0, 2, kGe), half(0, 1, 2, kGe)}, vec2(0, 0)},
  };
}

EnvConfig four_region_env(std::string name, const std::array<double, 4>& scales) {
  const std::array<StateMatrix, 4> a = {
      mat2(-1, 2, -2, -1), mat2(-1, -2, 1, -0.5), mat2(-0.5, -5, 1, -0.5),
      mat2(-1, 0, 2, -1)};
  std::vector<Mode> modes;
  auto regions = four_region_partition();
  for (std::size_t i = 0; i < 4; ++i) {
    modes.push_back({regions[i], ModeDynamics::linear(a[i], planar_input()),
                     StageCost::identity(2, 1, scales[i])});
  }
  return EnvConfig{std::move(name),
                   SwitchedSystem(2, 1, std::move(modes), 2.0,
                                  ControlBounds::symmetric(1, 10.0)),
                   vec2(-8, -6),
                   vec2(10, 10),
                   {vec2(-10, -10), vec2(10, 10)},
                   benchmark_integrator()};
}

RegionSpec box_region(ModeId id, double x1_lo, double x1_hi, double x2_lo,
                      double x2_hi) {
  return {id,
          {half(1, 0, -x1_lo, kGe), half(1, 0, -x1_hi, kLe),
           half(0, 1, -x2_lo, kGe), half(0, 1, -x2_hi, kLe)},
          vec2(0.5 * (x1_lo + x1_hi), 0.5 * (x2_lo + x2_hi))};
}

EnvConfig scalar_env(std::string name, double a_upper, double b_upper,
                     double a_lower, double b_lower) {
  auto scalar = [](double v) {
    StateMatrix m(1, 1);
    m << v;
    return m;
  };
  auto input = [](double v) {
    InputMatrix m(1, 1);
    m << v;
    return m;
  };
  auto side = [](Side s) { return HalfSpace{AffineBoundary{vec1(1.0), -1.0}, s}; };
  std::vector<Mode> modes;
  modes.push_back({RegionSpec{1, {side(kGe)}, vec1(2.0)},
                   ModeDynamics::linear(scalar(a_upper), input(b_upper)),
                   StageCost::identity(1, 1, 0.5)});
  modes.push_back({RegionSpec{2, {side(kLe)}, vec1(0.0)},
                   ModeDynamics::linear(scalar(a_lower), input(b_lower)),
                   StageCost::identity(1, 1, 0.5)});
  return EnvConfig{std::move(name),
                   SwitchedSystem(1, 1, std::move(modes), 1.0,
                                  ControlBounds::symmetric(1, 50.0)),
                   vec1(2.0),
                   vec1(4.0),
                   {vec1(-1.0), vec1(4.0)},
                   benchmark_integrator()};
}

}  // namespace

int EnvConfig::horizon_steps() const {
  return sim::horizon_steps(system, integrator);
}

EnvConfig make_example1() {
  return four_region_env("ex1", {0.5, 0.5, 0.5, 0.5});
}

EnvConfig make_example2() {
  return four_region_env("ex2", {0.5, 0.5, 5.0, 0.5});
}

EnvConfig make_example3() {
  const std::array<StateMatrix, 7> a = {
      mat2(-1, 0, 0, 1.5),  mat2(-1, 2, -2, -1),  mat2(-1, 4, -4, -1),
      mat2(-0.5, 0, 0, -0.7), mat2(-0.5, -5, 1, -0.5), mat2(-1, -5, 1, -0.5),
      mat2(-1, 0, 2, -1)};
  std::vector<RegionSpec> regions = {
      box_region(1, 0, 3, 5, 10), box_region(2, 3, 7, 5, 10),
      box_region(3, 7, 10, 5, 10), box_region(4, 0, 3, 0, 5),
      box_region(5, 3, 7, 0, 5),  box_region(6, 7, 10, 0, 5),
      // Complement of the six boxes; reached only after they all decline.
      RegionSpec{7, {}, vec2(-1, -1)}};
  std::vector<Mode> modes;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    modes.push_back({regions[i], ModeDynamics::linear(a[i], planar_input()),
                     StageCost::identity(2, 1, 1.0)});
  }
  return EnvConfig{"ex3",
                   SwitchedSystem(2, 1, std::move(modes), 2.0,
                                  ControlBounds::symmetric(1, 10.0)),
                   vec2(8, 8),
                   vec2(10, 10),
                   {vec2(-10, -10), vec2(10, 10)},
                   benchmark_integrator()};
}

EnvConfig make_analytic1() { return scalar_env("analytic1", 0.0, 2.0, 0.0, 1.0); }

EnvConfig make_analytic2() { return scalar_env("analytic2", 2.0, 1.0, -1.0, 1.0); }

EnvConfig make_env(std::string_view name) {
  if (name == "ex1") return make_example1();
  if (name == "ex2") return make_example2();
  if (name == "ex3") return make_example3();
  if (name == "analytic1") return make_analytic1();
  if (name == "analytic2") return make_analytic2();
  throw InvalidInput("unknown environment '" + std::string(name) + "'");
}

}  // namespace hybridopt::envs
