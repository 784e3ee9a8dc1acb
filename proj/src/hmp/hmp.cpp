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

#include "hybridopt/hmp/hmp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <limits>

namespace hybridopt::hmp {

namespace {

// (x, lambda, running cost)
using Y = std::array<double, 3>;

Y rhs(const ScalarMode& m, const Y& y) {
  const double u = -m.b * y[1];
  return {m.a * y[0] + m.b * u, -y[0] - m.a * y[1], 0.5 * (y[0] * y[0] + u * u)};
}

Y axpy(const Y& y, double h, std::initializer_list<std::pair<double, const Y*>> terms) {
  Y out = y;
  for (const auto& [c, k] : terms) {
    for (int i = 0; i < 3; ++i) out[i] += h * c * (*k)[i];
  }
  return out;
}

struct DpStep {
  Y y;
  double err;  // scaled error norm; accept when <= 1
};

// One Dormand-Prince 5(4) step.
DpStep dp_step(const ScalarMode& m, const Y& y, double h, double rtol, double atol) {
  const Y k1 = rhs(m, y);
  const Y k2 = rhs(m, axpy(y, h, {{1.0 / 5, &k1}}));
  const Y k3 = rhs(m, axpy(y, h, {{3.0 / 40, &k1}, {9.0 / 40, &k2}}));
  const Y k4 = rhs(m, axpy(y, h, {{44.0 / 45, &k1}, {-56.0 / 15, &k2}, {32.0 / 9, &k3}}));
  const Y k5 = rhs(m, axpy(y, h,
                           {{19372.0 / 6561, &k1},
                            {-25360.0 / 2187, &k2},
                            {64448.0 / 6561, &k3},
                            {-212.0 / 729, &k4}}));
  const Y k6 = rhs(m, axpy(y, h,
                           {{9017.0 / 3168, &k1},
                            {-355.0 / 33, &k2},
                            {46732.0 / 5247, &k3},
                            {49.0 / 176, &k4},
                            {-5103.0 / 18656, &k5}}));
  const Y y5 = axpy(y, h,
                    {{35.0 / 384, &k1},
                     {500.0 / 1113, &k3},
                     {125.0 / 192, &k4},
                     {-2187.0 / 6784, &k5},
                     {11.0 / 84, &k6}});
  const Y k7 = rhs(m, y5);
  const Y e = axpy(Y{0, 0, 0}, h,
                   {{35.0 / 384 - 5179.0 / 57600, &k1},
                    {500.0 / 1113 - 7571.0 / 16695, &k3},
                    {125.0 / 192 - 393.0 / 640, &k4},
                    {-2187.0 / 6784 + 92097.0 / 339200, &k5},
                    {11.0 / 84 - 187.0 / 2100, &k6},
                    {-1.0 / 40, &k7}});
  double err = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
    err = std::max(err, std::abs(e[i]) / sc);
  }
  return {y5, err};
}

void check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidInput(std::string(what) + " must be finite");
}

}  // namespace

void HmpProblem::validate() const {
  for (double v : {upper.a, upper.b, lower.a, lower.b, x0, tf, s}) check_finite(v, "HmpProblem");
  if (upper.b == 0.0 || lower.b == 0.0) throw InvalidInput("HmpProblem: b must be non-zero");
  if (x0 == s) throw InvalidInput("HmpProblem: x0 lies on the interface");
  if (tf < 0.0) throw InvalidInput("HmpProblem: negative horizon");
}

HmpProblem example1() { return HmpProblem{{0.0, 2.0}, {0.0, 1.0}, 2.0, 1.0, 1.0}; }

HmpProblem example2() { return HmpProblem{{2.0, 1.0}, {-1.0, 1.0}, 2.0, 1.0, 1.0}; }

HmpProblem from_env(const envs::EnvConfig& env) {
  const SwitchedSystem& sys = env.system;
  if (sys.state_dim() != 1 || sys.control_dim() != 1 || sys.num_modes() != 2 ||
      sys.boundaries().size() != 1) {
    throw InvalidInput("from_env: need a scalar two-mode system with one interface");
  }
  HmpProblem p;
  for (ModeId q = 1; q <= 2; ++q) {
    const Mode& m = sys.mode(q);
    if (!m.dynamics.is_linear()) throw InvalidInput("from_env: modes must be linear");
    ScalarMode sm{m.dynamics.a()(0, 0), m.dynamics.b()(0, 0)};
    (q == 1 ? p.upper : p.lower) = sm;
  }
  const AffineBoundary& g = sys.boundaries().front();
  p.s = -g.offset / g.normal[0];
  p.x0 = env.x0[0];
  p.tf = sys.horizon();
  if (sys.classify(StateVector::Constant(1, p.s + 1.0)) != 1) {
    throw InvalidInput("from_env: mode 1 must be the upper region");
  }
  p.validate();
  return p;
}

HamiltonianValue hamiltonian(const ScalarMode& mode, double x, double lambda) {
  const double u = -mode.b * lambda;
  return {0.5 * (x * x + u * u) + lambda * (mode.a * x + mode.b * u), u};
}

double costate_jump(const ScalarMode& before, const ScalarMode& after, double s,
                    double lambda_minus) {
  check_finite(lambda_minus, "costate_jump: lambda");
  const double target = hamiltonian(before, s, lambda_minus).h;
  // H_after(l) = -b^2 l^2 / 2 + a s l + s^2 / 2
  const double qa = -0.5 * after.b * after.b;
  const double qb = after.a * s;
  const double qc = 0.5 * s * s - target;
  double disc = qb * qb - 4.0 * qa * qc;
  const double scale = qb * qb + std::abs(4.0 * qa * qc);
  if (disc < 0.0) {
    if (disc < -1e-14 * scale) throw InfeasibleJump("costate jump has no real root");
    disc = 0.0;
  }
  const double q = -0.5 * (qb + std::copysign(std::sqrt(disc), qb));
  double r1;
  double r2;
  if (q == 0.0) {
    r1 = r2 = 0.0;
  } else {
    r1 = q / qa;
    r2 = qc / q;
  }
  return std::abs(r1 - lambda_minus) <= std::abs(r2 - lambda_minus) ? r1 : r2;
}

Extremal integrate_extremal(const HmpProblem& problem, double lambda0,
                            const IntegrationOptions& opts) {
  problem.validate();
  check_finite(lambda0, "integrate_extremal: lambda0");

  Extremal out;
  out.lambda0 = lambda0;
  int q = problem.mode_id(problem.x0);
  Y y{problem.x0, lambda0, 0.0};
  double t = 0.0;
  auto record = [&] {
    const ScalarMode& m = problem.mode(q);
    out.samples.push_back({t, y[0], y[1], -m.b * y[1], q});
  };
  record();

  double h = std::min(1e-3, problem.tf);
  const double side = q == 1 ? 1.0 : -1.0;
  double current_side = side;
  while (t < problem.tf) {
    h = std::min(h, problem.tf - t);
    const ScalarMode& m = problem.mode(q);
    const DpStep step = dp_step(m, y, h, opts.rtol, opts.atol);
    if (!std::isfinite(step.err)) throw InvalidInput("integrate_extremal: non-finite state");
    if (step.err > 1.0) {
      h *= std::max(0.2, 0.9 * std::pow(step.err, -0.2));
      continue;
    }
    const bool crossed = current_side * (step.y[0] - problem.s) < 0.0;
    if (!crossed) {
      t = (problem.tf - t - h <= 0.0) ? problem.tf : t + h;
      y = step.y;
      record();
      h *= std::min(5.0, 0.9 * std::pow(std::max(step.err, 1e-12), -0.2));
      continue;
    }

    // Localize the crossing inside [t, t + h].
    double lo = 0.0;
    double hi = h;
    while (hi - lo > opts.event_tol) {
      const double mid = 0.5 * (lo + hi);
      const Y ym = dp_step(m, y, mid, opts.rtol, opts.atol).y;
      if (current_side * (ym[0] - problem.s) < 0.0) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    const double dt_event = 0.5 * (lo + hi);
    Y ye = dp_step(m, y, dt_event, opts.rtol, opts.atol).y;
    ye[0] = problem.s;
    t += dt_event;
    y = ye;
    record();

    if (static_cast<int>(out.crossings.size()) >= opts.max_crossings) {
      throw StructureError("integrate_extremal: more than " +
                           std::to_string(opts.max_crossings) + " interface crossings");
    }
    const int next = q == 1 ? 2 : 1;
    const ScalarMode& before = problem.mode(q);
    const ScalarMode& after = problem.mode(next);
    Crossing c;
    c.tau = t;
    c.from_mode = q;
    c.to_mode = next;
    c.lambda_minus = y[1];
    c.lambda_plus = costate_jump(before, after, problem.s, y[1]);
    c.h_minus = hamiltonian(before, problem.s, c.lambda_minus).h;
    c.h_plus = hamiltonian(after, problem.s, c.lambda_plus).h;
    c.u_minus = -before.b * c.lambda_minus;
    c.u_plus = -after.b * c.lambda_plus;
    // udot = -b lambdadot = b (x + a lambda)
    c.udot_minus = before.b * (problem.s + before.a * c.lambda_minus);
    c.udot_plus = after.b * (problem.s + after.a * c.lambda_plus);
    out.crossings.push_back(c);

    q = next;
    current_side = -current_side;
    y[1] = c.lambda_plus;
    record();
    h = std::max(h - dt_event, 1e-6);
  }

  out.lambda_tf = y[1];
  out.x_tf = y[0];
  out.cost = y[2];
  return out;
}

Extremal shoot(const HmpProblem& problem, double lo, double hi, const ShootOptions& opts) {
  if (!(lo < hi)) throw InvalidInput("shoot: bracket must satisfy lo < hi");
  auto residual = [&](double l0) { return integrate_extremal(problem, l0, opts.integration); };
  Extremal elo = residual(lo);
  Extremal ehi = residual(hi);
  if (elo.lambda_tf == 0.0) return elo;
  if (ehi.lambda_tf == 0.0) return ehi;
  if ((elo.lambda_tf > 0.0) == (ehi.lambda_tf > 0.0)) {
    throw BracketError("shoot: lambda(t_f) has the same sign at both ends of the bracket",
                       elo.lambda_tf, ehi.lambda_tf);
  }

  int it = 0;
  while (hi - lo > opts.bisect_width && it++ < opts.max_iterations) {
    const double mid = 0.5 * (lo + hi);
    Extremal em = residual(mid);
    if (em.lambda_tf == 0.0) return em;
    if ((em.lambda_tf > 0.0) == (elo.lambda_tf > 0.0)) {
      lo = mid;
      elo = std::move(em);
    } else {
      hi = mid;
      ehi = std::move(em);
    }
  }

  // Safeguarded secant: fall back to bisection when the iterate leaves the bracket.
  Extremal best = std::abs(elo.lambda_tf) < std::abs(ehi.lambda_tf) ? elo : ehi;
  while (std::abs(best.lambda_tf) > opts.root_tol && it++ < opts.max_iterations &&
         hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(hi)) {
    double next = lo - elo.lambda_tf * (hi - lo) / (ehi.lambda_tf - elo.lambda_tf);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    Extremal en = residual(next);
    if ((en.lambda_tf > 0.0) == (elo.lambda_tf > 0.0)) {
      lo = next;
      elo = en;
    } else {
      hi = next;
      ehi = en;
    }
    if (std::abs(en.lambda_tf) < std::abs(best.lambda_tf)) best = std::move(en);
  }
  if (!(std::abs(best.lambda_tf) <= 1e-8)) {
    // Sign change across a jump in the residual (e.g. a grazing trajectory).
    throw BracketError("shoot: residual does not vanish inside the bracket", elo.lambda_tf,
                       ehi.lambda_tf);
  }
  return best;
}

std::vector<Bracket> scan_brackets(const HmpProblem& problem, double lo, double hi,
                                   int intervals, const IntegrationOptions& opts) {
  if (!(lo < hi) || intervals < 1) throw InvalidInput("scan_brackets: bad range");
  std::vector<Bracket> out;
  bool have_prev = false;
  double prev_l0 = 0.0;
  double prev_r = 0.0;
  for (int i = 0; i <= intervals; ++i) {
    const double l0 = lo + (hi - lo) * i / intervals;
    double r;
    try {
      r = integrate_extremal(problem, l0, opts).lambda_tf;
    } catch (const InfeasibleJump&) {
      have_prev = false;
      continue;
    } catch (const StructureError&) {
      have_prev = false;
      continue;
    }
    if (have_prev && ((prev_r > 0.0) != (r > 0.0) || r == 0.0)) out.push_back({prev_l0, l0});
    have_prev = true;
    prev_l0 = l0;
    prev_r = r;
  }
  return out;
}

Extremal solve(const HmpProblem& problem, double lo, double hi, int intervals,
               const ShootOptions& opts) {
  std::optional<Extremal> best;
  for (const Bracket& b : scan_brackets(problem, lo, hi, intervals, opts.integration)) {
    try {
      Extremal e = shoot(problem, b.lo, b.hi, opts);
      if (!best || e.cost < best->cost) best = std::move(e);
    } catch (const Error&) {
      continue;
    }
  }
  if (!best) throw BracketError("solve: no converged extremal in the scanned range", 0.0, 0.0);
  return *best;
}

void write_extremal_csv(std::ostream& os, const Extremal& extremal) {
  os << "t,x,lambda,u,mode\n" << std::setprecision(17);
  for (const auto& s : extremal.samples) {
    os << s.t << ',' << s.x << ',' << s.lambda << ',' << s.u << ',' << s.mode << '\n';
  }
}

}  // namespace hybridopt::hmp
