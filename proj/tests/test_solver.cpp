#include <doctest.h>

#include <random>

#include "test_instances.hpp"

using namespace exitgame;

namespace {

/* Independent oracle for the 1D single-player eikonal reduction: brute
 * force over the bang-bang exit strategies (run left, run right at unit
 * speed, or stay forever), discounted time integrals by midpoint
 * quadrature. No solver code involved. */
double quad_discounted_time(double T) {
  const int n = 200000;
  const double h = T / n;
  double acc = 0;
  for (int i = 0; i < n; ++i) acc += h * std::exp(-(i + 0.5) * h);
  return acc;
}

double eikonal_oracle(double x, double psi_x) {
  double best = quad_discounted_time(40.0);  // stay put forever (tail < 1e-17)
  for (const double d : {x, 1.0 - x})
    best = std::min(best, quad_discounted_time(d) + std::exp(-d) * psi_x);
  return best;
}

SchemeParams eikonal_scheme(double dt = 0.005, double tol = 1e-6) {
  SchemeParams sp;
  sp.dt = dt;
  sp.tol = tol;
  return sp;
}

}  // namespace

TEST_CASE("the independent eikonal oracle reproduces the closed form") {
  CHECK(eikonal_oracle(0.5, 0.0) == doctest::Approx(0.3934693402873666).epsilon(1e-9));
  CHECK(eikonal_oracle(0.3, 0.0) == doctest::Approx(1.0 - std::exp(-0.3)).epsilon(1e-9));
  CHECK(eikonal_oracle(0.5, 5.0) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("zero-cost problems converge in one sweep to zero") {
  const auto p = instances::bilinear_1d1d({{-1.0}, {1.0}}, {{-1.0}, {1.0}});
  SchemeParams sp;
  sp.dt = 0.1;
  const auto [g, rep] = solve(p, build_grid(p, {11, 11}), sp);
  CHECK(rep.iterations == 1);
  CHECK(rep.converged);
  for (double v : g.values) CHECK(v == 0.0);
}

TEST_CASE("eikonal fixed point matches the analytic value") {
  const auto p = instances::eikonal_1d();
  const auto [g, rep] = solve(p, build_grid(p, {101, 3}), eikonal_scheme());
  CHECK(rep.converged);

  SUBCASE("value at x = 0.5 within scheme tolerance of 1 - e^{-1/2}") {
    const double v = interpolate(g, {0.5, 0.0});
    CHECK(std::abs(v - 0.3934693402873666) <= 0.05);
  }

  SUBCASE("sup error against the oracle below 0.05") {
    Vec z;
    double err = 0;
    for (std::size_t n = 0; n < g.size(); ++n) {
      g.node_coords(n, z);
      err = std::max(err, std::abs(g.values[n] - eikonal_oracle(z[0], 0.0)));
    }
    CHECK(err <= 0.05);
  }

  SUBCASE("contraction estimate below the discount factor") {
    CHECK(rep.contraction_estimate <= std::exp(-0.005) + 1e-6);
  }

  SUBCASE("values stay within [0, max(M/lambda, M)]") {
    for (double v : g.values) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("when exit never pays, the value is the stay-forever integral") {
  const auto p = instances::eikonal_1d(5.0);  // exit costs 5, staying costs 1
  SchemeParams sp;
  sp.dt = 0.002;  // bound M = 5 forces a smaller step
  sp.tol = 1e-4;
  const auto [g, rep] = solve(p, build_grid(p, {101, 3}), sp);
  const double v = interpolate(g, {0.5, 0.0});
  CHECK(std::abs(v - 1.0) <= 0.01);
}

TEST_CASE("bellman update is monotone in the nodal values") {
  const auto p = instances::decoupled_1d1d();
  auto g = build_grid(p, {6, 6});
  SchemeParams sp;
  sp.dt = 0.05;
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  for (int trial = 0; trial < 10; ++trial) {
    auto lo = g, hi = g;
    for (std::size_t n = 0; n < g.size(); ++n) {
      lo.values[n] = u(rng);
      hi.values[n] = lo.values[n] + 0.3 * u(rng);
    }
    for (std::size_t n = 0; n < g.size(); ++n)
      CHECK(bellman_update(p, lo, sp, n) <= bellman_update(p, hi, sp, n) + 1e-12);
  }
}

TEST_CASE("per-sweep residual ratio is bounded by the discount factor") {
  auto p = instances::coupled_ab();  // M = 1 permits dt*lambda = 0.1 on h = 0.1
  SchemeParams sp;
  sp.dt = 0.1;
  sp.tol = 1e-8;
  const auto [g, rep] = solve(p, build_grid(p, {11, 11}), sp);
  CHECK(rep.converged);
  CHECK(rep.contraction_estimate <= std::exp(-0.1) + 1e-6);
}

TEST_CASE("boundary inequalities hold at the fixed point") {
  const auto p = instances::decoupled_1d1d();
  SchemeParams sp;
  sp.dt = 0.02;
  const auto [g, rep] = solve(p, build_grid(p, {21, 21}), sp);
  const auto bi = check_boundary_inequalities(p, g, sp.tol);
  CHECK(bi.ok);
  CHECK(bi.corners_excluded == 0);
}

TEST_CASE("solve_both") {
  SUBCASE("structurally separable decoupled instances coincide within 2 tol") {
    /* eikonal: singleton B and uncontrolled Y */
    const auto p = instances::eikonal_1d();
    const auto both = solve_both(p, build_grid(p, {41, 3}), eikonal_scheme(0.01, 1e-7));
    CHECK(both.gap <= 2e-7);
  }

  SUBCASE("B-singleton games coincide trivially") {
    auto p = instances::bilinear_1d1d({{-1.0}, {0.0}, {1.0}}, {{0.25}});
    p.costs.running = [](const Vec& x, const Vec& y, const Vec& a, const Vec&) {
      return 0.2 + x[0] * y[0] + 0.05 * a[0] * a[0];
    };
    p.costs.split = CostSplit::fully_decoupled;
    p.dynamics.lipschitz_L = 0.0;
    p.dynamics.bound_M = 1.5;
    SchemeParams sp;
    sp.dt = 0.05;
    sp.tol = 1e-7;
    const auto both = solve_both(p, build_grid(p, {11, 11}), sp);
    CHECK(both.gap <= 2e-7);
  }

  SUBCASE("the coupled l = a*b instance reports its gap without failing") {
    const auto p = instances::coupled_ab();
    SchemeParams sp;
    sp.dt = 0.05;
    const auto both = solve_both(p, build_grid(p, {11, 11}), sp);
    CHECK(both.gap >= 0.0);
    CHECK(both.lower_report.converged);
    CHECK(both.upper_report.converged);
  }
}

TEST_CASE("reversed corner data is clamped and flagged") {
  const auto p = instances::corner_jump();
  SchemeParams sp;
  sp.dt = 0.04;
  const auto [g, rep] = solve(p, build_grid(p, {11, 11}), sp);
  CHECK(rep.converged);
  CHECK(rep.boundary_violations == 4);  // the four corners
  for (double v : g.values) {
    CHECK(v >= -1e-12);
    CHECK(v <= 1.0 + 1e-12);
  }
}

TEST_CASE("scheme parameter validation") {
  const auto p = instances::eikonal_1d();
  const auto g = build_grid(p, {11, 3});
  SchemeParams sp;
  sp.dt = 1.5;  // dt*lambda >= 1
  CHECK_THROWS_AS(check_scheme(p, g, sp), std::invalid_argument);
  sp.dt = 0.2;  // dt*M exceeds the 0.1 spacing
  CHECK_THROWS_AS(check_scheme(p, g, sp), std::invalid_argument);
  sp.dt = 0.05;
  CHECK_NOTHROW(check_scheme(p, g, sp));
}

TEST_CASE("non-convergence carries the last residual") {
  const auto p = instances::eikonal_1d();
  SchemeParams sp = eikonal_scheme();
  sp.max_iters = 3;
  try {
    solve(p, build_grid(p, {101, 3}), sp);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.last_residual > 0.0);
  }
}
