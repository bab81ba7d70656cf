#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "exitgame/core.hpp"

/* Definition and validation of a complete exit-time game instance:
 * decoupled dynamics for the two players (optionally weakly coupled in the
 * minimizer, f(x)+a+Db), finite control sets, running cost, the three exit
 * costs psi_X / psi_Y / psi_XY and the discount. */

namespace exitgame {

/* Axis-aligned box domain. A 0-dimensional box is allowed for a trivial
 * player state (pure-disturbance opponent); it is never exited. */
struct Box {
  Vec lo, hi;

  std::size_t dims() const { return lo.size(); }

  void validate() const {
    if (lo.size() != hi.size()) fail_arg("box: lo/hi dimension mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (!(lo[i] < hi[i]))
        fail_arg("box: lo[", i, "]=", lo[i], " must be < hi[", i, "]=", hi[i]);
  }

  bool contains(const Vec& z) const {  // closed box
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (z[i] < lo[i] || z[i] > hi[i]) return false;
    return true;
  }

  bool strictly_contains(const Vec& z) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (z[i] <= lo[i] || z[i] >= hi[i]) return false;
    return true;
  }

  /* sup-norm distance to the closed box; 0 inside */
  double exterior_distance(const Vec& z) const {
    double d = 0;
    for (std::size_t i = 0; i < lo.size(); ++i) {
      d = std::max(d, lo[i] - z[i]);
      d = std::max(d, z[i] - hi[i]);
    }
    return std::max(d, 0.0);
  }

  void clamp(Vec& z) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      z[i] = std::min(std::max(z[i], lo[i]), hi[i]);
  }

  Vec clamped(Vec z) const {
    clamp(z);
    return z;
  }

  double span(std::size_t axis) const { return hi[axis] - lo[axis]; }
};

/* One flat face of a box; the outward unit normal is +-e_axis. */
struct Face {
  std::size_t axis = 0;
  bool upper = false;

  double outward_sign() const { return upper ? 1.0 : -1.0; }
  /* outward normal component of a velocity */
  double outward_speed(const Vec& v) const { return outward_sign() * v[axis]; }
  /* inward normal component (xi in the boundary estimates) */
  double inward_speed(const Vec& v) const { return -outward_speed(v); }
  double coordinate(const Box& b) const { return upper ? b.hi[axis] : b.lo[axis]; }
};

inline std::vector<Face> faces_of(const Box& b) {
  std::vector<Face> f;
  for (std::size_t i = 0; i < b.dims(); ++i) {
    f.push_back({i, false});
    f.push_back({i, true});
  }
  return f;
}

/* Finite sample of a compact control set. */
struct ControlSet {
  std::vector<Vec> points;

  std::size_t size() const { return points.size(); }
  std::size_t dims() const { return points.empty() ? 0 : points.front().size(); }

  void validate() const {
    if (points.empty()) fail_arg("control set must be nonempty");
    for (const auto& p : points)
      if (p.size() != points.front().size())
        fail_arg("control set: inconsistent point dimensions");
    for (std::size_t i = 0; i < points.size(); ++i)
      for (std::size_t j = i + 1; j < points.size(); ++j)
        if (points[i] == points[j]) fail_arg("control set: duplicate point at indices ", i, ", ", j);
  }

  bool contains(const Vec& p) const {
    return std::find(points.begin(), points.end(), p) != points.end();
  }
};

using DriftFn = std::function<void(const Vec& state, const Vec& control, Vec& out)>;

struct Dynamics {
  DriftFn drift_x;  // (x, a) -> dx/dt; with coupling_D this is f(x)+a
  DriftFn drift_y;  // (y, b) -> dy/dt
  std::optional<Matrix> coupling_D;  // maps b into x-velocity units
  double lipschitz_L = 0.0;  // declared Lipschitz constant (dynamics and costs)
  double bound_M = 1.0;      // declared bound for dynamics and costs
};

using RunningCostFn = std::function<double(const Vec& x, const Vec& y, const Vec& a, const Vec& b)>;
using ExitCostFn = std::function<double(const Vec& x, const Vec& y)>;

/* Which structural split of the running cost is declared to hold:
 * fully_decoupled    l = l1(x,y) + l2(a) + l3(b)
 * control_separated  l = l1(x,y,a) + l2(x,y,b) */
enum class CostSplit { none, fully_decoupled, control_separated };

inline const char* cost_split_name(CostSplit s) {
  switch (s) {
    case CostSplit::fully_decoupled: return "fully_decoupled";
    case CostSplit::control_separated: return "control_separated";
    default: return "none";
  }
}

struct Costs {
  RunningCostFn running;
  ExitCostFn exit_x;   // on dOmega_X x cl(Omega_Y)
  ExitCostFn exit_y;   // on cl(Omega_X) x dOmega_Y
  ExitCostFn exit_xy;  // on dOmega_X x dOmega_Y
  double discount_lambda = 1.0;
  CostSplit split = CostSplit::none;
};

struct GameProblem {
  Box omega_x, omega_y;
  Dynamics dynamics;
  ControlSet controls_a, controls_b;
  Costs costs;

  std::size_t dim_x() const { return omega_x.dims(); }
  std::size_t dim_y() const { return omega_y.dims(); }

  /* x-velocity; adds D*b when the weak coupling of eq-(21) form is present */
  void velocity_x(const Vec& x, const Vec& a, const Vec& b, Vec& out) const {
    dynamics.drift_x(x, a, out);
    if (dynamics.coupling_D) {
      const Matrix& D = *dynamics.coupling_D;
      for (std::size_t i = 0; i < D.rows; ++i) {
        double s = 0;
        for (std::size_t j = 0; j < D.cols; ++j) s += D.at(i, j) * b[j];
        out[i] += s;
      }
    }
  }

  void velocity_y(const Vec& y, const Vec& b, Vec& out) const {
    if (dim_y() == 0) { out.clear(); return; }
    dynamics.drift_y(y, b, out);
  }

  double running(const Vec& x, const Vec& y, const Vec& a, const Vec& b) const {
    return costs.running(x, y, a, b);
  }

  void check_dimensions() const {
    omega_x.validate();
    if (dim_y() > 0) omega_y.validate();
    controls_a.validate();
    controls_b.validate();
    if (dim_x() == 0) fail_arg("problem: X state must have dimension >= 1");
    if (costs.discount_lambda <= 0) fail_arg("problem: discount lambda must be positive");
    if (dynamics.bound_M <= 0) fail_arg("problem: bound_M must be positive");
    if (dynamics.lipschitz_L < 0) fail_arg("problem: lipschitz_L must be nonnegative");
    if (dynamics.coupling_D) {
      const Matrix& D = *dynamics.coupling_D;
      if (D.rows != dim_x())
        fail_arg("problem: coupling D has ", D.rows, " rows, expected ", dim_x());
      if (D.cols != controls_b.dims())
        fail_arg("problem: coupling D has ", D.cols, " cols, expected ", controls_b.dims());
      if (controls_a.dims() != dim_x())
        fail_arg("problem: with coupling D the controls A must live in the x-velocity "
                 "space (f(x)+a+Db), got dim ", controls_a.dims(), " expected ", dim_x());
    }
    Vec probe_x(dim_x(), 0.0), probe_y(dim_y(), 0.0), out;
    for (std::size_t i = 0; i < dim_x(); ++i)
      probe_x[i] = 0.5 * (omega_x.lo[i] + omega_x.hi[i]);
    for (std::size_t i = 0; i < dim_y(); ++i)
      probe_y[i] = 0.5 * (omega_y.lo[i] + omega_y.hi[i]);
    dynamics.drift_x(probe_x, controls_a.points.front(), out);
    if (out.size() != dim_x())
      fail_arg("problem: drift_x returns dimension ", out.size(), ", expected ", dim_x());
    if (dim_y() > 0) {
      dynamics.drift_y(probe_y, controls_b.points.front(), out);
      if (out.size() != dim_y())
        fail_arg("problem: drift_y returns dimension ", out.size(), ", expected ", dim_y());
    }
  }
};

enum class CheckStatus { pass, warn, fail };

inline const char* check_status_name(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "PASS";
    case CheckStatus::warn: return "WARN";
    default: return "FAIL";
  }
}

/* ---- exit-cost compatibility: psi_Y <= psi_XY <= psi_X on the corner ---- */

struct ExitCostViolation {
  Vec x, y;
  double psi_y, psi_xy, psi_x;
};

struct ValidationReport {
  CheckStatus status = CheckStatus::pass;
  std::size_t samples_checked = 0;
  std::vector<ExitCostViolation> violations;
};

namespace detail {

/* Uniform tensor samples of one box face (k points per free axis, endpoints
 * included; the face coordinate is pinned). */
inline void sample_face(const Box& box, const Face& face, int k,
                        const std::function<void(const Vec&)>& visit) {
  const std::size_t d = box.dims();
  Vec point(d, 0.0);
  point[face.axis] = face.coordinate(box);
  std::vector<std::size_t> free_axes;
  for (std::size_t i = 0; i < d; ++i)
    if (i != face.axis) free_axes.push_back(i);
  if (free_axes.empty()) {
    visit(point);
    return;
  }
  std::vector<int> idx(free_axes.size(), 0);
  while (true) {
    for (std::size_t j = 0; j < free_axes.size(); ++j) {
      const std::size_t ax = free_axes[j];
      const double t = k == 1 ? 0.5 : static_cast<double>(idx[j]) / (k - 1);
      point[ax] = box.lo[ax] + t * box.span(ax);
    }
    visit(point);
    std::size_t j = 0;
    for (; j < idx.size(); ++j) {
      if (++idx[j] < k) break;
      idx[j] = 0;
    }
    if (j == idx.size()) break;
  }
}

}  // namespace detail

/* Samples the corner set dOmega_X x dOmega_Y and reports every sampled point
 * violating psi_Y <= psi_XY <= psi_X. A violation is a warning: the solver
 * may still run, but continuity of the value is forfeit. */
inline ValidationReport validate_exit_costs(const GameProblem& p, int corner_samples) {
  if (corner_samples <= 0) fail_arg("validate_exit_costs: corner_samples must be positive");
  p.check_dimensions();
  ValidationReport rep;
  if (p.dim_y() == 0) return rep;  // no corner set
  for (const Face& fx : faces_of(p.omega_x)) {
    detail::sample_face(p.omega_x, fx, corner_samples, [&](const Vec& x) {
      for (const Face& fy : faces_of(p.omega_y)) {
        detail::sample_face(p.omega_y, fy, corner_samples, [&](const Vec& y) {
          ++rep.samples_checked;
          const double py = p.costs.exit_y(x, y);
          const double pxy = p.costs.exit_xy(x, y);
          const double px = p.costs.exit_x(x, y);
          if (!(py <= pxy && pxy <= px))
            rep.violations.push_back({x, y, py, pxy, px});
        });
      }
    });
  }
  rep.status = rep.violations.empty() ? CheckStatus::pass : CheckStatus::warn;
  return rep;
}

/* ---- boundary controllability (Assumption 1 / eq-(22) margin) ---- */

struct BoundaryPointCheck {
  Vec point;
  Face face;
  int inward_index = -1;   // index into the player's control set, -1 if none
  int outward_index = -1;
  double margin = 0.0;     // best inward normal speed (f+a)·xi; the zeta of eq-(22)
};

struct PlayerControllability {
  std::vector<BoundaryPointCheck> checks;
  bool ok = true;
  double min_margin = kInfinity;  // over sampled points; the certified zeta
};

struct ControllabilityReport {
  CheckStatus status = CheckStatus::pass;
  PlayerControllability x, y;
  double coupling_bound = 0.0;  // sup |(D b)·xi| over X-faces and b; the C-tilde
};

namespace detail {

/* Best strictly-inward control at a boundary point. With coupling the
 * margin condition is the eq-(22) one: inf over b of (f(x)+a+Db)·xi > 0,
 * and the recorded margin is (f(x)+a)·xi. */
inline void inward_outward_at(const GameProblem& p, Player player, const Vec& z,
                              const Face& face, BoundaryPointCheck& out) {
  const ControlSet& own = player == Player::x ? p.controls_a : p.controls_b;
  out.point = z;
  out.face = face;
  out.inward_index = -1;
  out.outward_index = -1;
  out.margin = 0.0;
  Vec v;
  double best_in = 0.0, best_out = 0.0;
  for (std::size_t i = 0; i < own.size(); ++i) {
    double inward, worst_inward, best_outward;
    if (player == Player::x) {
      p.dynamics.drift_x(z, own.points[i], v);
      inward = face.inward_speed(v);
      worst_inward = inward;
      best_outward = -inward;
      if (p.dynamics.coupling_D) {
        double lo = kInfinity, hi = -kInfinity;
        Vec db;
        for (const Vec& b : p.controls_b.points) {
          p.dynamics.coupling_D->apply(b, db);
          const double s = face.inward_speed(db);
          lo = std::min(lo, s);
          hi = std::max(hi, s);
        }
        worst_inward = inward + lo;   // inf over b of (f+a+Db)·xi
        best_outward = -(inward + hi);  // inf over b of outward speed
      }
    } else {
      p.dynamics.drift_y(z, own.points[i], v);
      inward = face.inward_speed(v);
      worst_inward = inward;
      best_outward = -inward;
    }
    if (worst_inward > 0 && (out.inward_index < 0 || inward > best_in)) {
      out.inward_index = static_cast<int>(i);
      best_in = inward;
    }
    if (best_outward > 0 && (out.outward_index < 0 || best_outward > best_out)) {
      out.outward_index = static_cast<int>(i);
      best_out = best_outward;
    }
  }
  out.margin = out.inward_index >= 0 ? best_in : 0.0;
}

inline void check_player_boundary(const GameProblem& p, Player player,
                                  int samples, PlayerControllability& pc) {
  const Box& box = player == Player::x ? p.omega_x : p.omega_y;
  for (const Face& face : faces_of(box)) {
    detail::sample_face(box, face, samples, [&](const Vec& z) {
      BoundaryPointCheck c;
      inward_outward_at(p, player, z, face, c);
      if (c.inward_index < 0 || c.outward_index < 0) pc.ok = false;
      if (c.inward_index >= 0) pc.min_margin = std::min(pc.min_margin, c.margin);
      pc.checks.push_back(std::move(c));
    });
  }
  if (pc.checks.empty()) pc.min_margin = 0.0;  // trivial (0-dim) player
  if (!pc.ok) pc.min_margin = 0.0;
}

}  // namespace detail

/* For each sampled boundary point, searches the player's control set for a
 * strictly entering and a strictly exiting control (Assumption 1); under
 * coupling, checks the eq-(22) margin condition. FAIL if any sampled point
 * lacks one of the two. */
inline ControllabilityReport validate_controllability(const GameProblem& p,
                                                      int boundary_samples) {
  if (boundary_samples <= 0)
    fail_arg("validate_controllability: boundary_samples must be positive");
  p.check_dimensions();
  ControllabilityReport rep;
  detail::check_player_boundary(p, Player::x, boundary_samples, rep.x);
  if (p.dim_y() > 0) detail::check_player_boundary(p, Player::y, boundary_samples, rep.y);
  if (p.dynamics.coupling_D) {
    Vec db;
    for (const Face& face : faces_of(p.omega_x)) {
      for (const Vec& b : p.controls_b.points) {
        p.dynamics.coupling_D->apply(b, db);
        rep.coupling_bound = std::max(rep.coupling_bound, std::abs(db[face.axis]));
      }
    }
  }
  rep.status = (rep.x.ok && rep.y.ok) ? CheckStatus::pass : CheckStatus::fail;
  return rep;
}

struct InwardControl {
  int index = -1;
  double margin = 0.0;
};

/* Inward control for a player at a boundary point (used when a tuned
 * trajectory hits its boundary). Fails when Assumption 1 does not hold
 * there. */
inline InwardControl find_inward_control(const GameProblem& p, Player player,
                                         const Vec& z, const Face& face) {
  BoundaryPointCheck c;
  detail::inward_outward_at(p, player, z, face, c);
  if (c.inward_index < 0)
    fail("no strictly inward control for player ", player_name(player),
         " at the boundary hit point (Assumption 1 fails there)");
  return {c.inward_index, c.margin};
}

/* ---- sampled bound check: declared M dominates dynamics and costs ---- */

struct BoundsReport {
  CheckStatus status = CheckStatus::pass;
  double max_dynamics = 0.0;  // largest sampled ||f||, ||g||
  double max_cost = 0.0;      // largest sampled |l|, |psi|
  bool costs_nonnegative = true;
};

inline BoundsReport validate_bounds(const GameProblem& p, int samples_per_axis = 5) {
  p.check_dimensions();
  BoundsReport rep;
  const int k = std::max(2, samples_per_axis);
  std::vector<Vec> xs, ys;
  const auto grid_points = [&](const Box& box, std::vector<Vec>& out) {
    out.clear();
    if (box.dims() == 0) { out.push_back({}); return; }
    std::vector<int> idx(box.dims(), 0);
    while (true) {
      Vec z(box.dims());
      for (std::size_t i = 0; i < box.dims(); ++i)
        z[i] = box.lo[i] + box.span(i) * idx[i] / (k - 1);
      out.push_back(std::move(z));
      std::size_t j = 0;
      for (; j < idx.size(); ++j) {
        if (++idx[j] < k) break;
        idx[j] = 0;
      }
      if (j == idx.size()) break;
    }
  };
  grid_points(p.omega_x, xs);
  grid_points(p.omega_y, ys);
  Vec v;
  for (const Vec& x : xs)
    for (const Vec& y : ys)
      for (const Vec& a : p.controls_a.points)
        for (const Vec& b : p.controls_b.points) {
          p.velocity_x(x, a, b, v);
          rep.max_dynamics = std::max(rep.max_dynamics, norm(v));
          if (p.dim_y() > 0) {
            p.velocity_y(y, b, v);
            rep.max_dynamics = std::max(rep.max_dynamics, norm(v));
          }
          const double l = p.running(x, y, a, b);
          if (!std::isfinite(l)) fail("running cost not finite at a sampled point");
          if (l < 0) rep.costs_nonnegative = false;
          rep.max_cost = std::max(rep.max_cost, std::abs(l));
        }
  const auto check_exit = [&](const ExitCostFn& fn, const Box& bx, const Box& by, bool x_side) {
    (void)bx; (void)by;
    for (const Vec& x : xs)
      for (const Vec& y : ys) {
        (void)x_side;
        const double c = fn(x, y);
        if (!std::isfinite(c)) fail("exit cost not finite at a sampled point");
        if (c < 0) rep.costs_nonnegative = false;
        rep.max_cost = std::max(rep.max_cost, std::abs(c));
      }
  };
  check_exit(p.costs.exit_x, p.omega_x, p.omega_y, true);
  if (p.dim_y() > 0) {
    check_exit(p.costs.exit_y, p.omega_x, p.omega_y, false);
    check_exit(p.costs.exit_xy, p.omega_x, p.omega_y, false);
  }
  const double M = p.dynamics.bound_M;
  if (rep.max_dynamics > M || rep.max_cost > M || !rep.costs_nonnegative)
    rep.status = CheckStatus::warn;
  return rep;
}

}  // namespace exitgame
