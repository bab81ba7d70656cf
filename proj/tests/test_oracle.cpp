#include <doctest.h>

#include "test_instances.hpp"

using namespace exitgame;

namespace {

/* Node-stepping instance: h = 0.5 grids on the unit squares, speeds in
 * {-2, 0, 2}, dt = 0.25, so every Euler foot lands on a node with
 * binary-exact arithmetic. */
GameProblem node_step(std::vector<Vec> a_pts, std::vector<Vec> b_pts) {
  auto p = instances::bilinear_1d1d(std::move(a_pts), std::move(b_pts));
  p.dynamics.bound_M = 2.0;
  p.costs.running = [](const Vec& x, const Vec& y, const Vec&, const Vec&) {
    return 0.25 + 0.5 * x[0] + 0.25 * y[0];
  };
  p.costs.exit_x = [](const Vec&, const Vec&) { return 1.0; };
  p.costs.exit_y = [](const Vec&, const Vec&) { return 0.25; };
  p.costs.exit_xy = [](const Vec&, const Vec&) { return 0.5; };
  return p;
}

SchemeParams node_step_scheme(Convention conv = Convention::lower) {
  SchemeParams sp;
  sp.dt = 0.25;
  sp.tol = 1e-10;
  sp.convention = conv;
  return sp;
}

}  // namespace

TEST_CASE("exactify") {
  SUBCASE("node-stepping feet produce a 9-state game on the 3x3 grid") {
    const auto p = node_step({{-2.0}, {0.0}, {2.0}}, {{-2.0}, {2.0}});
    const auto g = build_grid(p, {3, 3});
    const auto d = exactify(p, g, node_step_scheme());
    CHECK(d.n_states == 9);
    CHECK(d.n_a == 3);
    CHECK(d.n_b == 2);
    CHECK(d.discount == doctest::Approx(std::exp(-0.25)));
  }

  SUBCASE("generic smooth feet are rejected") {
    const auto p = instances::eikonal_1d();
    const auto g = build_grid(p, {101, 3});
    SchemeParams sp;
    sp.dt = 0.007;  // feet land mid-cell
    CHECK_THROWS_WITH_AS(exactify(p, g, sp), doctest::Contains("not exactifiable"),
                         std::runtime_error);
  }
}

TEST_CASE("brute_value basics") {
  SUBCASE("zero stage and terminal costs give zero values") {
    DiscreteGame d;
    d.n_states = 3;
    d.n_a = d.n_b = 1;
    d.discount = 0.5;
    d.roles.assign(3, NodeRole::interior);
    d.psi_x.assign(3, 0.0);
    d.psi_y.assign(3, 0.0);
    d.next = {1, 2, 0};
    d.stage = {0.0, 0.0, 0.0};
    for (double v : brute_value(d, Convention::lower)) CHECK(v == 0.0);
  }

  SUBCASE("a single self-loop sums the geometric series c/(1-rho)") {
    DiscreteGame d;
    d.n_states = 1;
    d.n_a = d.n_b = 1;
    d.discount = 0.875;
    d.roles.assign(1, NodeRole::interior);
    d.psi_x.assign(1, 0.0);
    d.psi_y.assign(1, 0.0);
    d.next = {0};
    d.stage = {0.3};
    const auto v = brute_value(d, Convention::upper);
    CHECK(v[0] == doctest::Approx(0.3 / (1.0 - 0.875)).epsilon(1e-11));
  }

  SUBCASE("values are invariant under state relabeling") {
    const auto p = node_step({{-2.0}, {2.0}}, {{-2.0}, {2.0}});
    const auto g = build_grid(p, {3, 3});
    const auto d = exactify(p, g, node_step_scheme());
    const auto v = brute_value(d, Convention::lower);
    /* relabel by reversing the state order */
    DiscreteGame r = d;
    const auto relabel = [&](std::size_t s) { return d.n_states - 1 - s; };
    for (std::size_t s = 0; s < d.n_states; ++s) {
      r.roles[relabel(s)] = d.roles[s];
      r.psi_x[relabel(s)] = d.psi_x[s];
      r.psi_y[relabel(s)] = d.psi_y[s];
      for (std::size_t ia = 0; ia < d.n_a; ++ia)
        for (std::size_t ib = 0; ib < d.n_b; ++ib) {
          r.next[r.at(relabel(s), ia, ib)] = relabel(d.next[d.at(s, ia, ib)]);
          r.stage[r.at(relabel(s), ia, ib)] = d.stage[d.at(s, ia, ib)];
        }
    }
    const auto w = brute_value(r, Convention::lower);
    for (std::size_t s = 0; s < d.n_states; ++s)
      CHECK(v[s] == doctest::Approx(w[relabel(s)]).epsilon(1e-12));
  }
}

TEST_CASE("solver matches the brute-force oracle to 1e-9 on exactifiable instances") {
  const std::vector<GameProblem> instances = {
      node_step({{-2.0}, {0.0}, {2.0}}, {{-2.0}, {2.0}}),
      node_step({{-2.0}, {2.0}}, {{0.0}}),
      node_step({{-2.0}, {0.0}, {2.0}}, {{-2.0}, {0.0}, {2.0}}),
  };
  for (const auto& p : instances) {
    for (const Convention conv : {Convention::lower, Convention::upper}) {
      const auto sp = node_step_scheme(conv);
      const auto g = build_grid(p, {3, 3});
      const auto d = exactify(p, g, sp);
      const auto exact = brute_value(d, conv);
      const auto [solved, rep] = solve(p, g, sp);
      REQUIRE(rep.converged);
      for (std::size_t s = 0; s < exact.size(); ++s)
        CHECK(std::abs(exact[s] - solved.values[s]) <= 1e-9);
    }
  }
}
