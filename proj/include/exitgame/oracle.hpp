#pragma once

#include "exitgame/solver.hpp"

/* Exact finite shadow of the semi-Lagrangian game for instances whose Euler
 * feet land exactly on grid nodes, plus an independently coded brute-force
 * fixed point. Used as ground truth: on exactifiable instances both
 * conventions of the solver must agree with brute_value to 1e-9 per state.
 * The value recursion here is deliberately disjoint from the solver's sweep
 * code (memoized recursion over a finite horizon vs Jacobi sweeps). */

namespace exitgame {

struct DiscreteGame {
  std::size_t n_states = 0, n_a = 0, n_b = 0;
  std::vector<std::size_t> next;   // [s][ia][ib], flattened
  std::vector<double> stage;       // dt * running cost
  double discount = 0.5;           // e^{-lambda dt}
  std::vector<NodeRole> roles;
  std::vector<double> psi_x, psi_y;  // exit data per state (0 where unused)

  std::size_t at(std::size_t s, std::size_t ia, std::size_t ib) const {
    return (s * n_a + ia) * n_b + ib;
  }
};

/* Builds the DiscreteGame whose Bellman operator coincides with
 * bellman_update on this grid. Errors when any clamped Euler foot misses a
 * node by more than the snap tolerance. */
inline DiscreteGame exactify(const GameProblem& p, const ValueGrid& g,
                             const SchemeParams& sp, double snap_tol = 1e-9) {
  p.check_dimensions();
  check_scheme(p, g, sp);
  DiscreteGame d;
  d.n_states = g.size();
  d.n_a = p.controls_a.size();
  d.n_b = p.controls_b.size();
  d.discount = std::exp(-p.costs.discount_lambda * sp.dt);
  d.next.assign(d.n_states * d.n_a * d.n_b, 0);
  d.stage.assign(d.n_states * d.n_a * d.n_b, 0.0);
  d.roles = g.roles;
  d.psi_x.assign(d.n_states, 0.0);
  d.psi_y.assign(d.n_states, 0.0);
  Vec z, x, y, vx, vy, foot(g.dims());
  for (std::size_t s = 0; s < d.n_states; ++s) {
    g.node_coords(s, z);
    x.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(g.dim_x));
    y.assign(z.begin() + static_cast<std::ptrdiff_t>(g.dim_x), z.end());
    if (g.roles[s] == NodeRole::x_face || g.roles[s] == NodeRole::corner)
      d.psi_x[s] = p.costs.exit_x(x, y);
    if (g.roles[s] == NodeRole::y_face || g.roles[s] == NodeRole::corner)
      d.psi_y[s] = p.costs.exit_y(x, y);
    for (std::size_t ia = 0; ia < d.n_a; ++ia)
      for (std::size_t ib = 0; ib < d.n_b; ++ib) {
        const Vec& a = p.controls_a.points[ia];
        const Vec& b = p.controls_b.points[ib];
        p.velocity_x(x, a, b, vx);
        for (std::size_t k = 0; k < g.dim_x; ++k) {
          double f = x[k] + sp.dt * vx[k];
          foot[k] = std::min(std::max(f, p.omega_x.lo[k]), p.omega_x.hi[k]);
        }
        if (g.dims() > g.dim_x) {
          p.velocity_y(y, b, vy);
          for (std::size_t k = g.dim_x; k < g.dims(); ++k) {
            double f = y[k - g.dim_x] + sp.dt * vy[k - g.dim_x];
            foot[k] = std::min(std::max(f, p.omega_y.lo[k - g.dim_x]),
                               p.omega_y.hi[k - g.dim_x]);
          }
        }
        std::size_t node = 0;
        for (std::size_t k = 0; k < g.dims(); ++k) {
          const GridAxis& ax = g.axes[k];
          const double u = (foot[k] - ax.lo) / ax.h();
          const auto idx = static_cast<std::size_t>(std::llround(u));
          if (idx >= ax.count)
            fail("exactify: foot index out of range on axis ", k);
          const double at_node = idx + 1 == ax.count ? ax.hi : ax.lo + ax.h() * idx;
          if (std::abs(foot[k] - at_node) > snap_tol)
            fail("exactify: instance not exactifiable; foot misses a node by ",
                 std::abs(foot[k] - at_node), " on axis ", k);
          node += idx * g.strides[k];
        }
        d.next[d.at(s, ia, ib)] = node;
        d.stage[d.at(s, ia, ib)] = sp.dt * p.running(x, y, a, b);
      }
  }
  return d;
}

namespace detail {

inline double discrete_boundary_op(const DiscreteGame& d, std::size_t s, double v) {
  switch (d.roles[s]) {
    case NodeRole::interior: return v;
    case NodeRole::x_face: return std::min(d.psi_x[s], v);
    case NodeRole::y_face: return std::max(d.psi_y[s], v);
    case NodeRole::corner: {
      double lo = d.psi_y[s], hi = d.psi_x[s];
      if (lo > hi) std::swap(lo, hi);
      return std::min(std::max(v, lo), hi);
    }
  }
  return v;
}

/* memoized finite-horizon recursion: value after k applications of the
 * operator to the zero field */
inline double brute_recurse(const DiscreteGame& d, Convention conv, std::size_t s,
                            std::size_t k, std::vector<double>& memo,
                            std::vector<char>& have) {
  if (k == 0) return discrete_boundary_op(d, s, 0.0);
  const std::size_t slot = (k - 1) * d.n_states + s;
  if (have[slot]) return memo[slot];
  const bool outer_b = conv == Convention::lower;
  const std::size_t n_outer = outer_b ? d.n_b : d.n_a;
  const std::size_t n_inner = outer_b ? d.n_a : d.n_b;
  double best_outer = 0;
  for (std::size_t i = 0; i < n_outer; ++i) {
    double best_inner = 0;
    for (std::size_t j = 0; j < n_inner; ++j) {
      const std::size_t ia = outer_b ? j : i;
      const std::size_t ib = outer_b ? i : j;
      const double w =
          d.stage[d.at(s, ia, ib)] +
          d.discount * brute_recurse(d, conv, d.next[d.at(s, ia, ib)], k - 1, memo, have);
      if (j == 0 || (outer_b ? w < best_inner : w > best_inner)) best_inner = w;
    }
    if (i == 0 || (outer_b ? best_inner > best_outer : best_inner < best_outer))
      best_outer = best_inner;
  }
  const double v = discrete_boundary_op(d, s, best_outer);
  memo[slot] = v;
  have[slot] = 1;
  return v;
}

}  // namespace detail

/* Exact fixed point by exhaustive recursion with memoization over a horizon
 * N chosen so that discount^N times the value bound is below 1e-12. */
inline std::vector<double> brute_value(const DiscreteGame& d, Convention conv) {
  if (d.n_states == 0) return {};
  if (!(d.discount > 0 && d.discount < 1))
    fail_arg("brute_value: discount must lie in (0,1)");
  double stage_max = 0, psi_max = 0;
  for (double s : d.stage) stage_max = std::max(stage_max, std::abs(s));
  for (std::size_t s = 0; s < d.n_states; ++s) {
    psi_max = std::max(psi_max, std::abs(d.psi_x[s]));
    psi_max = std::max(psi_max, std::abs(d.psi_y[s]));
  }
  const double vbound = stage_max / (1.0 - d.discount) + psi_max + 1.0;
  const auto horizon = static_cast<std::size_t>(
      std::ceil(std::log(1e-12 / vbound) / std::log(d.discount))) + 1;
  std::vector<double> memo(horizon * d.n_states, 0.0);
  std::vector<char> have(horizon * d.n_states, 0);
  std::vector<double> out(d.n_states);
  for (std::size_t s = 0; s < d.n_states; ++s)
    out[s] = detail::brute_recurse(d, conv, s, horizon, memo, have);
  return out;
}

}  // namespace exitgame
