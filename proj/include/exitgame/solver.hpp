#pragma once

#include <utility>

#include "exitgame/grid.hpp"
#include "exitgame/hamiltonian.hpp"

/* Fixed point of the monotone, contracting semi-Lagrangian operator for the
 * Dirichlet problems of the lower and upper value. One node update is
 *
 *   S = opt_b opt_a { dt·l(x,y,a,b) + e^{-lambda dt}·I[v](x + dt f, y + dt g) }
 *
 * with feet clamped to the closed boxes, followed by the boundary operator
 *   X_FACE   min(psi_X, S)     (the minimizer may stop, exiting immediately)
 *   Y_FACE   max(psi_Y, S)
 *   CORNER   clamp(S, psi_Y, psi_X)
 * which realizes the Dirichlet data in the viscosity sense. psi_XY plays no
 * role here; it enters only the simulator's cost accounting. */

namespace exitgame {

struct SchemeParams {
  double dt = 0.01;
  double tol = 1e-6;       // sup-norm distance to the fixed point
  std::size_t max_iters = 200000;
  Convention convention = Convention::lower;
};

struct SolveReport {
  std::size_t iterations = 0;
  double final_residual = 0.0;        // last sup-norm sweep change
  double contraction_estimate = 0.0;  // max ratio of successive sweep changes
  std::size_t boundary_violations = 0;  // corner nodes with psi_Y > psi_X
  bool converged = false;
  double stop_threshold = 0.0;  // sweep-change threshold enforcing tol
};

struct ConvergenceError : std::runtime_error {
  double last_residual;
  explicit ConvergenceError(std::size_t iters, double residual)
      : std::runtime_error("solve: no convergence within " + std::to_string(iters) +
                           " sweeps; last residual " + std::to_string(residual)),
        last_residual(residual) {}
};

/* dt·lambda < 1 and dt·M <= min cell spacing (feet stay within one cell ring) */
inline void check_scheme(const GameProblem& p, const ValueGrid& g, const SchemeParams& sp) {
  if (sp.dt <= 0 || sp.tol <= 0 || sp.max_iters == 0)
    fail_arg("scheme: dt, tol must be positive and max_iters >= 1");
  if (sp.dt * p.costs.discount_lambda >= 1.0)
    fail_arg("scheme: dt*lambda = ", sp.dt * p.costs.discount_lambda, " must be < 1");
  const double h = g.min_spacing();
  if (sp.dt * p.dynamics.bound_M > h * (1.0 + 1e-12))
    fail_arg("scheme: dt*M = ", sp.dt * p.dynamics.bound_M,
             " exceeds the minimum cell spacing ", h);
}

namespace detail {

struct BellmanScratch {
  Vec x, y, vx, vy, foot, yfoot;
};

inline double bellman_node(const GameProblem& p, const ValueGrid& g,
                           const SchemeParams& sp, std::size_t node,
                           BellmanScratch& s, bool* corner_swapped) {
  const std::size_t n = g.dim_x, d = g.dims();
  s.foot.resize(d);
  s.x.resize(n);
  s.y.resize(d - n);
  for (std::size_t i = 0; i < d; ++i) {
    const GridAxis& ax = g.axes[i];
    const std::size_t idx = (node / g.strides[i]) % ax.count;
    const double c = idx + 1 == ax.count ? ax.hi : ax.lo + ax.h() * idx;
    (i < n ? s.x[i] : s.y[i - n]) = c;
  }
  const double disc = std::exp(-p.costs.discount_lambda * sp.dt);
  const auto& A = p.controls_a.points;
  const auto& B = p.controls_b.points;
  const bool outer_b = sp.convention == Convention::lower;

  double outer_best = 0;
  bool outer_first = true;
  const std::size_t n_outer = outer_b ? B.size() : A.size();
  const std::size_t n_inner = outer_b ? A.size() : B.size();
  for (std::size_t i = 0; i < n_outer; ++i) {
    double inner_best = 0;
    bool inner_first = true;
    if (outer_b && d > n) {
      p.velocity_y(s.y, B[i], s.vy);
      add_scaled(s.yfoot, s.y, sp.dt, s.vy);
      p.omega_y.clamp(s.yfoot);
    }
    for (std::size_t j = 0; j < n_inner; ++j) {
      const Vec& a = outer_b ? A[j] : A[i];
      const Vec& b = outer_b ? B[i] : B[j];
      if (!outer_b && d > n) {
        p.velocity_y(s.y, b, s.vy);
        add_scaled(s.yfoot, s.y, sp.dt, s.vy);
        p.omega_y.clamp(s.yfoot);
      }
      p.velocity_x(s.x, a, b, s.vx);
      for (std::size_t k = 0; k < n; ++k) {
        double f = s.x[k] + sp.dt * s.vx[k];
        f = std::min(std::max(f, p.omega_x.lo[k]), p.omega_x.hi[k]);
        s.foot[k] = f;
      }
      for (std::size_t k = n; k < d; ++k) s.foot[k] = s.yfoot[k - n];
      const double v =
          sp.dt * p.running(s.x, s.y, a, b) + disc * interpolate(g, s.foot);
      const bool better = outer_b ? v < inner_best : v > inner_best;
      if (inner_first || better) {
        inner_best = v;
        inner_first = false;
      }
    }
    const bool better = outer_b ? inner_best > outer_best : inner_best < outer_best;
    if (outer_first || better) {
      outer_best = inner_best;
      outer_first = false;
    }
  }

  switch (g.roles[node]) {
    case NodeRole::interior:
      return outer_best;
    case NodeRole::x_face:
      return std::min(p.costs.exit_x(s.x, s.y), outer_best);
    case NodeRole::y_face:
      return std::max(p.costs.exit_y(s.x, s.y), outer_best);
    case NodeRole::corner: {
      double lo = p.costs.exit_y(s.x, s.y);
      double hi = p.costs.exit_x(s.x, s.y);
      if (lo > hi) {  // compatibility (2) violated here; keep well-defined
        std::swap(lo, hi);
        if (corner_swapped) *corner_swapped = true;
      }
      return std::min(std::max(outer_best, lo), hi);
    }
  }
  return outer_best;
}

}  // namespace detail

/* One-step DPP value at a node, boundary operator applied per role. */
inline double bellman_update(const GameProblem& p, const ValueGrid& g,
                             const SchemeParams& sp, std::size_t node) {
  detail::BellmanScratch s;
  return detail::bellman_node(p, g, sp, node, s, nullptr);
}

/* Jacobi (double-buffered) iteration to the unique fixed point. Stops when
 * the sweep change is below tol*(1-q)/q, q = e^{-lambda dt}, which bounds
 * the sup distance to the fixed point by tol. Deterministic given inputs. */
inline std::pair<ValueGrid, SolveReport> solve(const GameProblem& p, ValueGrid g,
                                               const SchemeParams& sp) {
  p.check_dimensions();
  check_scheme(p, g, sp);
  const double q = std::exp(-p.costs.discount_lambda * sp.dt);
  SolveReport rep;
  rep.stop_threshold = sp.tol * (1.0 - q) / q;
  std::vector<double> next(g.size());
  detail::BellmanScratch scratch;
  double prev_residual = -1.0;
  double value_scale = 1.0;
  for (std::size_t iter = 1; iter <= sp.max_iters; ++iter) {
    double residual = 0.0;
    std::size_t violations = 0;
    double scale = 1.0;
    for (std::size_t node = 0; node < g.size(); ++node) {
      bool swapped = false;
      const double v = detail::bellman_node(p, g, sp, node, scratch, &swapped);
      if (swapped) ++violations;
      residual = std::max(residual, std::abs(v - g.values[node]));
      scale = std::max(scale, std::abs(v));
      next[node] = v;
    }
    g.values.swap(next);
    value_scale = scale;
    rep.iterations = iter;
    rep.final_residual = residual;
    rep.boundary_violations = violations;
    if (prev_residual > 1e-13 * value_scale)
      rep.contraction_estimate = std::max(rep.contraction_estimate, residual / prev_residual);
    prev_residual = residual;
    if (residual <= rep.stop_threshold) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged) throw ConvergenceError(sp.max_iters, rep.final_residual);
  return {std::move(g), rep};
}

/* Discrete form of the Theorem-1 boundary inequalities at a converged grid:
 * V <= psi_X + tol on X_FACE and CORNER, V >= psi_Y - tol on Y_FACE and
 * CORNER. Corners where the compatibility ordering psi_Y <= psi_X fails are
 * excluded (the two inequalities contradict each other there) and counted. */
struct BoundaryInequalityReport {
  bool ok = true;
  double worst_x_slack = kInfinity;  // min over nodes of psi_X + tol - V
  double worst_y_slack = kInfinity;  // min over nodes of V - psi_Y + tol
  std::size_t nodes_checked = 0;
  std::size_t corners_excluded = 0;
};

inline BoundaryInequalityReport check_boundary_inequalities(const GameProblem& p,
                                                            const ValueGrid& g,
                                                            double tol) {
  BoundaryInequalityReport rep;
  Vec z, x, y;
  for (std::size_t node = 0; node < g.size(); ++node) {
    const NodeRole role = g.roles[node];
    if (role == NodeRole::interior) continue;
    g.node_coords(node, z);
    x.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(g.dim_x));
    y.assign(z.begin() + static_cast<std::ptrdiff_t>(g.dim_x), z.end());
    const double v = g.values[node];
    bool check_x = role == NodeRole::x_face, check_y = role == NodeRole::y_face;
    if (role == NodeRole::corner) {
      if (p.costs.exit_y(x, y) <= p.costs.exit_x(x, y)) {
        check_x = check_y = true;
      } else {
        ++rep.corners_excluded;
      }
    }
    if (check_x) {
      const double slack = p.costs.exit_x(x, y) + tol - v;
      rep.worst_x_slack = std::min(rep.worst_x_slack, slack);
      if (slack < 0) rep.ok = false;
      ++rep.nodes_checked;
    }
    if (check_y) {
      const double slack = v - p.costs.exit_y(x, y) + tol;
      rep.worst_y_slack = std::min(rep.worst_y_slack, slack);
      if (slack < 0) rep.ok = false;
      ++rep.nodes_checked;
    }
  }
  return rep;
}

struct BothValues {
  ValueGrid lower, upper;
  SolveReport lower_report, upper_report;
  double gap = 0.0;  // sup-node |Vbar - Vlower|
};

/* Runs both conventions from the same initial grid; with decoupled running
 * cost the two fixed points coincide (the Isaacs condition holds). */
inline BothValues solve_both(const GameProblem& p, const ValueGrid& g,
                             SchemeParams sp) {
  BothValues out;
  sp.convention = Convention::lower;
  std::tie(out.lower, out.lower_report) = solve(p, g, sp);
  sp.convention = Convention::upper;
  std::tie(out.upper, out.upper_report) = solve(p, g, sp);
  for (std::size_t i = 0; i < out.lower.size(); ++i)
    out.gap = std::max(out.gap, std::abs(out.upper.values[i] - out.lower.values[i]));
  return out;
}

}  // namespace exitgame
