#include <doctest.h>

#include <random>
#include <sstream>

#include "test_instances.hpp"

using namespace exitgame;

TEST_CASE("role tagging on tensor grids") {
  const auto p = instances::bilinear_1d1d({{-1.0}, {1.0}}, {{0.0}},
                                          Box{{-1.0}, {1.0}}, Box{{0.0}, {1.0}});

  SUBCASE("3x3: roles count (4 corner, 2 x_face, 2 y_face, 1 interior)") {
    const auto g = build_grid(p, {3, 3});
    std::size_t counts[4] = {0, 0, 0, 0};
    for (auto r : g.roles) ++counts[static_cast<int>(r)];
    CHECK(counts[static_cast<int>(NodeRole::interior)] == 1);
    CHECK(counts[static_cast<int>(NodeRole::x_face)] == 2);
    CHECK(counts[static_cast<int>(NodeRole::y_face)] == 2);
    CHECK(counts[static_cast<int>(NodeRole::corner)] == 4);
  }

  SUBCASE("2 nodes per axis: all four nodes are corners") {
    const auto g = build_grid(p, {2, 2});
    for (auto r : g.roles) CHECK(r == NodeRole::corner);
  }

  SUBCASE("role counts always sum to the node count") {
    for (std::size_t nx : {2u, 3u, 5u})
      for (std::size_t ny : {2u, 4u}) {
        const auto g = build_grid(p, {nx, ny});
        std::size_t total = 0, counts[4] = {0, 0, 0, 0};
        for (auto r : g.roles) ++counts[static_cast<int>(r)], ++total;
        CHECK(total == nx * ny);
        CHECK(counts[0] + counts[1] + counts[2] + counts[3] == total);
      }
  }

  SUBCASE("box corners are grid nodes exactly") {
    const auto g = build_grid(p, {5, 4});
    CHECK(g.node_coords(0) == Vec{-1.0, 0.0});
    CHECK(g.node_coords(g.size() - 1) == Vec{1.0, 1.0});
  }

  SUBCASE("node cap rejects oversized grids") {
    GridLimits lim;
    lim.max_nodes = 10;
    CHECK_THROWS_AS(build_grid(p, {5, 5}, lim), std::invalid_argument);
    CHECK_THROWS_AS(build_grid(p, {1, 3}), std::invalid_argument);
  }
}

TEST_CASE("multilinear interpolation") {
  const auto p = instances::bilinear_1d1d({{-1.0}, {1.0}}, {{0.0}},
                                          Box{{-1.0}, {1.0}}, Box{{0.0}, {1.0}});
  auto g = build_grid(p, {5, 5});

  SUBCASE("reproduces nodal values") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1, 1);
    for (auto& v : g.values) v = u(rng);
    Vec z;
    for (std::size_t n = 0; n < g.size(); ++n) {
      g.node_coords(n, z);
      CHECK(interpolate(g, z) == doctest::Approx(g.values[n]).epsilon(1e-14));
    }
  }

  SUBCASE("exact on affine fields, including cell centers") {
    Vec z;
    for (std::size_t n = 0; n < g.size(); ++n) {
      g.node_coords(n, z);
      g.values[n] = 0.3 + 2.0 * z[0] - 1.5 * z[1];
    }
    for (double x : {-0.875, -0.1, 0.25, 0.99})
      for (double y : {0.125, 0.4, 0.93}) {
        const double want = 0.3 + 2.0 * x - 1.5 * y;
        CHECK(interpolate(g, {x, y}) == doctest::Approx(want).epsilon(1e-13));
      }
  }

  SUBCASE("constant fields interpolate to the constant") {
    for (auto& v : g.values) v = 4.25;
    CHECK(interpolate(g, {0.123, 0.456}) == doctest::Approx(4.25));
  }

  SUBCASE("points outside the closed product are rejected") {
    CHECK_THROWS_AS(interpolate(g, {1.5, 0.5}), std::domain_error);
    CHECK_THROWS_AS(interpolate(g, {0.0, -0.2}), std::domain_error);
  }

  SUBCASE("monotone: raising any nodal value never lowers the interpolant") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-1, 1), ux(-1, 1), uy(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
      for (auto& v : g.values) v = u(rng);
      auto g2 = g;
      const std::size_t node = rng() % g.size();
      g2.values[node] += 0.5;
      const Vec z{ux(rng), uy(rng)};
      CHECK(interpolate(g2, z) >= interpolate(g, z) - 1e-14);
    }
  }

  SUBCASE("nonexpansive in sup norm") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-1, 1), ux(-1, 1), uy(0, 1);
    for (int trial = 0; trial < 50; ++trial) {
      auto g2 = g;
      double diff = 0;
      for (std::size_t n = 0; n < g.size(); ++n) {
        g.values[n] = u(rng);
        g2.values[n] = u(rng);
        diff = std::max(diff, std::abs(g.values[n] - g2.values[n]));
      }
      const Vec z{ux(rng), uy(rng)};
      CHECK(std::abs(interpolate(g, z) - interpolate(g2, z)) <= diff + 1e-14);
    }
  }
}

TEST_CASE("grid CSV dump carries coordinates, role and value per node") {
  const auto p = instances::bilinear_1d1d({{-1.0}, {1.0}}, {{0.0}},
                                          Box{{-1.0}, {1.0}}, Box{{0.0}, {1.0}});
  auto g = build_grid(p, {2, 2});
  g.values = {1, 2, 3, 4};
  std::ostringstream os;
  dump_csv(g, os);
  const std::string s = os.str();
  CHECK(s.find("x0,y0,role,value") == 0);
  CHECK(s.find("CORNER") != std::string::npos);
  std::size_t rows = 0;
  for (char c : s)
    if (c == '\n') ++rows;
  CHECK(rows == 5);  // header + 4 nodes
}

TEST_CASE("0-dimensional opponent states are supported") {
  GameProblem p;
  p.omega_x = {{0.0}, {1.0}};
  p.controls_a.points = {{-1.0}, {1.0}};
  p.controls_b.points = {{0.0}};
  p.dynamics.drift_x = [](const Vec&, const Vec& a, Vec& out) { out = a; };
  p.dynamics.drift_y = [](const Vec&, const Vec&, Vec& out) { out.clear(); };
  p.dynamics.bound_M = 1.0;
  p.costs.discount_lambda = 1.0;
  p = instances::constant_costs(std::move(p), 1.0, 0.0, 0.0, 0.0);
  const auto g = build_grid(p, {5});
  CHECK(g.dims() == 1);
  for (std::size_t n = 0; n < g.size(); ++n)
    CHECK((g.roles[n] == NodeRole::interior || g.roles[n] == NodeRole::x_face));
}
