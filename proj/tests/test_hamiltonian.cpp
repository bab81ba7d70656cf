#include <doctest.h>

#include <random>

#include "test_instances.hpp"

using namespace exitgame;

namespace {

/* independent re-enumeration: a plain double loop over the control sets,
 * coded apart from the library's ordering */
double brute_uh(const GameProblem& p, const Vec& x, const Vec& y, const Costate& co) {
  double best_b = kInfinity;
  Vec v;
  for (const Vec& b : p.controls_b.points) {
    double best_a = -kInfinity;
    for (const Vec& a : p.controls_a.points) {
      p.velocity_x(x, a, b, v);
      double e = -dot(v, co.p);
      if (p.dim_y() > 0) {
        p.velocity_y(y, b, v);
        e -= dot(v, co.q);
      }
      e -= p.running(x, y, a, b);
      best_a = std::max(best_a, e);
    }
    best_b = std::min(best_b, best_a);
  }
  return best_b;
}

double brute_lh(const GameProblem& p, const Vec& x, const Vec& y, const Costate& co) {
  double best_a = -kInfinity;
  Vec v;
  for (const Vec& a : p.controls_a.points) {
    double best_b = kInfinity;
    for (const Vec& b : p.controls_b.points) {
      p.velocity_x(x, a, b, v);
      double e = -dot(v, co.p);
      if (p.dim_y() > 0) {
        p.velocity_y(y, b, v);
        e -= dot(v, co.q);
      }
      e -= p.running(x, y, a, b);
      best_b = std::min(best_b, e);
    }
    best_a = std::max(best_a, best_b);
  }
  return best_a;
}

}  // namespace

TEST_CASE("stationary zero-cost Hamiltonians vanish") {
  auto p = instances::bilinear_1d1d({{-1.0}, {1.0}}, {{-1.0}, {1.0}});
  p.dynamics.drift_x = [](const Vec&, const Vec&, Vec& out) { out = {0.0}; };
  p.dynamics.drift_y = [](const Vec&, const Vec&, Vec& out) { out = {0.0}; };
  const Costate co{{3.0}, {-2.0}};
  CHECK(upper_hamiltonian(p, {0.5}, {0.5}, co) == 0.0);
  CHECK(lower_hamiltonian(p, {0.5}, {0.5}, co) == 0.0);
}

TEST_CASE("the 2x2 coupled instance l = a*b") {
  const auto p = instances::coupled_ab();
  const Vec x{0.5}, y{0.5};

  SUBCASE("UH = 1, LH = -1 at costate zero") {
    const Costate co{{0.0}, {0.0}};
    CHECK(upper_hamiltonian(p, x, y, co) == 1.0);
    CHECK(lower_hamiltonian(p, x, y, co) == -1.0);
    CHECK(brute_uh(p, x, y, co) == 1.0);
    CHECK(brute_lh(p, x, y, co) == -1.0);
  }

  SUBCASE("UH = 0 at costate p = 1") {
    const Costate co{{1.0}, {0.0}};
    CHECK(upper_hamiltonian(p, x, y, co) == 0.0);
  }

  SUBCASE("saddle gap equals 2 exactly at costate zero") {
    const auto sp = saddle_point(p, x, y, {{0.0}, {0.0}}, Convention::lower);
    CHECK(sp.gap == 2.0);
  }
}

TEST_CASE("enumeration matches an independent double loop on random instances") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 40; ++trial) {
    auto p = instances::bilinear_1d1d({{u(rng)}, {u(rng)}, {u(rng)}},
                                      {{u(rng)}, {u(rng)}});
    const double c0 = u(rng), cx = u(rng), cab = u(rng);
    p.costs.running = [=](const Vec& x, const Vec& y, const Vec& a, const Vec& b) {
      return c0 + cx * x[0] * y[0] + cab * a[0] * b[0];
    };
    const Vec x{0.25}, y{0.75};
    const Costate co{{u(rng)}, {u(rng)}};
    CHECK(upper_hamiltonian(p, x, y, co) == doctest::Approx(brute_uh(p, x, y, co)));
    CHECK(lower_hamiltonian(p, x, y, co) == doctest::Approx(brute_lh(p, x, y, co)));
    CHECK(lower_hamiltonian(p, x, y, co) <= upper_hamiltonian(p, x, y, co) + 1e-12);
    CHECK(saddle_point(p, x, y, co, Convention::lower).gap >= -1e-12);
  }
}

TEST_CASE("decoupled running cost closes the gap pointwise") {
  const auto p = instances::decoupled_1d1d();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1), uc(-2, 2);
  for (int trial = 0; trial < 30; ++trial) {
    const Vec x{u(rng)}, y{u(rng)};
    const Costate co{{uc(rng)}, {uc(rng)}};
    CHECK(upper_hamiltonian(p, x, y, co) ==
          doctest::Approx(lower_hamiltonian(p, x, y, co)).epsilon(1e-12));
    CHECK(saddle_point(p, x, y, co, Convention::lower).gap ==
          doctest::Approx(0.0).epsilon(1e-12));
  }
}

TEST_CASE("singleton B collapses the gap") {
  const auto p = instances::bilinear_1d1d({{-1.0}, {0.0}, {1.0}}, {{0.5}});
  const Costate co{{1.5}, {-0.5}};
  const auto sp = saddle_point(p, {0.5}, {0.5}, co, Convention::upper);
  CHECK(sp.gap == 0.0);
  CHECK(sp.b == Vec{0.5});
}

TEST_CASE("shifting the running cost by c shifts both Hamiltonians by -c") {
  auto p = instances::coupled_ab();
  const Vec x{0.5}, y{0.25};
  const Costate co{{0.7}, {-0.3}};
  const double uh = upper_hamiltonian(p, x, y, co);
  const double lh = lower_hamiltonian(p, x, y, co);
  const double shift = 2.5;
  auto base = p.costs.running;
  p.costs.running = [base, shift](const Vec& x, const Vec& y, const Vec& a, const Vec& b) {
    return base(x, y, a, b) + shift;
  };
  CHECK(upper_hamiltonian(p, x, y, co) == doctest::Approx(uh - shift));
  CHECK(lower_hamiltonian(p, x, y, co) == doctest::Approx(lh - shift));
}

TEST_CASE("ties break toward the first listed control") {
  /* zero dynamics and cost: every pair ties, so the first indices win */
  auto p = instances::bilinear_1d1d({{1.0}, {-1.0}}, {{0.5}, {-0.5}});
  p.dynamics.drift_x = [](const Vec&, const Vec&, Vec& out) { out = {0.0}; };
  p.dynamics.drift_y = [](const Vec&, const Vec&, Vec& out) { out = {0.0}; };
  const auto sp = saddle_point(p, {0.5}, {0.5}, {{1.0}, {1.0}}, Convention::lower);
  CHECK(sp.a_index == 0);
  CHECK(sp.b_index == 0);
}
