#pragma once

#include <cstdio>
#include <ostream>

#include "exitgame/strategy.hpp"

/* Trajectory integration with exact first-exit detection, the four-branch
 * exit classification, and the discounted cost
 *   J = int_0^tau e^{-lambda t} l dt + e^{-lambda tau} psi(exit states),
 * left-endpoint quadrature, crossing instants refined by linear
 * interpolation within the step. Also evaluates one- and multi-step DPP
 * residuals of converged grids. */

namespace exitgame {

enum class ExitCase { x_only, y_only, simultaneous, never };

inline const char* exit_case_name(ExitCase c) {
  switch (c) {
    case ExitCase::x_only: return "X_ONLY";
    case ExitCase::y_only: return "Y_ONLY";
    case ExitCase::simultaneous: return "SIMULTANEOUS";
    default: return "NEVER";
  }
}

struct GameOutcome {
  std::vector<double> times;       // step boundaries up to min(tau, T)
  std::vector<Vec> path_x, path_y; // states at those times (frozen after exit)
  std::vector<Vec> path_a, path_b; // controls in effect on [t_k, t_{k+1})
  double tau_x = kInfinity, tau_y = kInfinity, tau = kInfinity;
  ExitCase exit_case = ExitCase::never;
  double cost = 0.0;
  double tail_bound = 0.0;         // M e^{-lambda T}/lambda when never exited
  Vec exit_state_x, exit_state_y;  // crossing points projected to the faces
};

namespace detail {

struct PlayerPath {
  std::vector<Vec> states;  // step boundaries until exit (last entry = crossing)
  double tau = kInfinity;
  Vec exit_state;

  /* state at a time before the exit (linear within the step) */
  Vec at(double t, double dt) const {
    const auto k = static_cast<std::size_t>(std::floor(t / dt + 1e-9));
    if (k + 1 >= states.size()) return states.back();
    const double w = std::min(std::max(t / dt - static_cast<double>(k), 0.0), 1.0);
    Vec z(states[k].size());
    for (std::size_t i = 0; i < z.size(); ++i)
      z[i] = (1.0 - w) * states[k][i] + w * states[k + 1][i];
    return z;
  }
};

/* Integrates one player until its own first exit or the horizon. The other
 * player's control enters only through the coupling D (player X). */
inline PlayerPath integrate_player(const GameProblem& p, Player player, const Vec& z0,
                                   const ControlSignal& own, const ControlSignal& opp,
                                   double T) {
  PlayerPath path;
  const Box& box = player == Player::x ? p.omega_x : p.omega_y;
  const double dt = own.dt;
  Vec z = z0, v;
  path.states.push_back(z);
  if (box.dims() == 0) return path;
  if (box.exterior_distance(z0) > 0)
    fail_arg("integrate: start state outside the closed domain of player ",
             player_name(player));
  double t = 0;
  for (std::size_t k = 0; t < T - 1e-12; ++k) {
    const double h = std::min(dt, T - t);
    if (player == Player::x)
      p.velocity_x(z, own.at_step(k), opp.at_step(k), v);
    else
      p.velocity_y(z, own.at_step(k), v);
    const StepOutcome s = euler_step(box, z, v, h);
    if (s.exits) {
      path.tau = t + s.theta * h;
      path.exit_state = s.crossing;
      path.states.push_back(s.crossing);
      return path;
    }
    z = s.next;
    t += h;
    path.states.push_back(z);
  }
  return path;
}

}  // namespace detail

/* Explicit Euler integration of both trajectories under given signals.
 * Exit times are computed independently per player (the dynamics are
 * decoupled up to the D feedthrough into X); SIMULTANEOUS is declared when
 * |tau_X - tau_Y| <= dt, the finite-precision proxy for the corner branch. */
inline GameOutcome integrate(const GameProblem& p, const Vec& x0, const Vec& y0,
                             const ControlSignal& alpha, const ControlSignal& beta,
                             double T) {
  p.check_dimensions();
  if (T <= 0) fail_arg("integrate: horizon must be positive");
  if (alpha.dt != beta.dt)
    fail_arg("integrate: alpha and beta must share dt (got ", alpha.dt, " vs ", beta.dt, ")");
  const double dt = alpha.dt;
  const double lam = p.costs.discount_lambda;

  const auto px = detail::integrate_player(p, Player::x, x0, alpha, beta, T);
  const auto py = detail::integrate_player(p, Player::y, y0, beta, alpha, T);

  GameOutcome out;
  out.tau_x = px.tau;
  out.tau_y = py.tau;
  out.tau = std::min(px.tau, py.tau);
  if (px.tau == kInfinity && py.tau == kInfinity)
    out.exit_case = ExitCase::never;
  else if (px.tau != kInfinity && py.tau != kInfinity &&
           std::abs(px.tau - py.tau) <= dt)
    out.exit_case = ExitCase::simultaneous;
  else
    out.exit_case = px.tau < py.tau ? ExitCase::x_only : ExitCase::y_only;

  const double t_end = std::min(out.tau, T);

  /* running cost, left-endpoint quadrature with a partial final step */
  double cost = 0, t = 0;
  for (std::size_t k = 0; t < t_end - 1e-12; ++k) {
    const double seg = std::min(dt, t_end - t);
    const Vec& xk = px.states[std::min(k, px.states.size() - 1)];
    const Vec& yk = py.states[std::min(k, py.states.size() - 1)];
    cost += seg * std::exp(-lam * t) * p.running(xk, yk, alpha.at_step(k), beta.at_step(k));
    t += seg;
  }

  switch (out.exit_case) {
    case ExitCase::never:
      out.tail_bound = p.dynamics.bound_M * std::exp(-lam * T) / lam;
      break;
    case ExitCase::x_only:
      out.exit_state_x = px.exit_state;
      cost += std::exp(-lam * out.tau) * p.costs.exit_x(px.exit_state, py.at(out.tau, dt));
      break;
    case ExitCase::y_only:
      out.exit_state_y = py.exit_state;
      cost += std::exp(-lam * out.tau) * p.costs.exit_y(px.at(out.tau, dt), py.exit_state);
      break;
    case ExitCase::simultaneous:
      out.exit_state_x = px.exit_state;
      out.exit_state_y = py.exit_state;
      cost += std::exp(-lam * out.tau) * p.costs.exit_xy(px.exit_state, py.exit_state);
      break;
  }
  out.cost = cost;

  /* sampled trajectory for dumping, frozen at the exit states */
  const auto n_rows = static_cast<std::size_t>(std::ceil(t_end / dt - 1e-12)) + 1;
  for (std::size_t k = 0; k < n_rows; ++k) {
    const double tk = std::min(dt * static_cast<double>(k), t_end);
    out.times.push_back(tk);
    out.path_x.push_back(k < px.states.size() ? px.states[k] : px.states.back());
    out.path_y.push_back(k < py.states.size() ? py.states[k] : py.states.back());
    out.path_a.push_back(alpha.at_step(k));
    out.path_b.push_back(beta.at_step(k));
  }
  return out;
}

/* Realizes J(x, y, gamma[beta], beta): evaluates the strategy against the
 * signal (step-by-step non-anticipation is the strategy's contract), then
 * integrates. A Y-strategy plays the symmetric J(x, y, alpha, xi[alpha]). */
inline GameOutcome play(const GameProblem& p, const Vec& x0, const Vec& y0,
                        const StrategyMap& strategy, const ControlSignal& opponent,
                        double T) {
  const ControlSignal own = strategy.respond(x0, y0, opponent);
  if (strategy.player == Player::x) return integrate(p, x0, y0, own, opponent, T);
  return integrate(p, x0, y0, opponent, own, T);
}

/* DPP residual of a grid at an interior state over horizon t (a multiple of
 * sp.dt): |v(z0) - opt over probe signals of { int e^{-lambda s} l ds +
 * e^{-lambda tau} v(z(tau)) }| with tau = min(t, tau_X, tau_Y). The inner
 * player responds with the one-step DPP feedback; the outer opt runs over
 * constant opponent probes. On a converged grid the one-step residual
 * reproduces the solver's update exactly. */
inline double dpp_residual(const GameProblem& p, const ValueGrid& g,
                           const SchemeParams& sp, const Vec& z0, double t,
                           int probe_controls) {
  p.check_dimensions();
  if (probe_controls <= 0) fail_arg("dpp_residual: probe_controls must be positive");
  const double dt = sp.dt;
  const auto n_steps = static_cast<std::size_t>(std::llround(t / dt));
  if (n_steps == 0 || std::abs(t - dt * static_cast<double>(n_steps)) > 1e-9)
    fail_arg("dpp_residual: t must be a positive multiple of dt");
  Vec x0(z0.begin(), z0.begin() + static_cast<std::ptrdiff_t>(g.dim_x));
  Vec y0(z0.begin() + static_cast<std::ptrdiff_t>(g.dim_x), z0.end());
  if (!p.omega_x.strictly_contains(x0) ||
      (p.dim_y() > 0 && !p.omega_y.strictly_contains(y0)))
    fail_arg("dpp_residual: z0 must be an interior state");

  const bool lower = sp.convention == Convention::lower;
  const Player inner_player = lower ? Player::x : Player::y;
  const ControlSet& probe_set = lower ? p.controls_b : p.controls_a;
  const double lam = p.costs.discount_lambda;
  const std::size_t n_probes =
      std::min<std::size_t>(static_cast<std::size_t>(probe_controls), probe_set.size());

  double opt = 0;
  bool first = true;
  Vec v;
  for (std::size_t pi = 0; pi < n_probes; ++pi) {
    const Vec& probe_u = probe_set.points[pi];
    Vec x = x0, y = y0;
    double acc = 0, tk = 0, tau = t;
    Vec x_end, y_end;
    bool exited = false;
    for (std::size_t k = 0; k < n_steps && !exited; ++k) {
      const std::size_t own_idx = detail::dpp_step_control(
          p, g, dt, inner_player, sp.convention, x, y, &probe_u);
      const Vec& own_u =
          (inner_player == Player::x ? p.controls_a : p.controls_b).points[own_idx];
      const Vec& a = inner_player == Player::x ? own_u : probe_u;
      const Vec& b = inner_player == Player::x ? probe_u : own_u;
      p.velocity_x(x, a, b, v);
      const StepOutcome sx = euler_step(p.omega_x, x, v, dt);
      StepOutcome sy;
      if (p.dim_y() > 0) {
        p.velocity_y(y, b, v);
        sy = euler_step(p.omega_y, y, v, dt);
      } else {
        sy.next = y;
      }
      double theta = 1.0;
      if (sx.exits) theta = std::min(theta, sx.theta);
      if (sy.exits) theta = std::min(theta, sy.theta);
      const double seg = theta * dt;
      acc += seg * std::exp(-lam * tk) * p.running(x, y, a, b);
      if (sx.exits || sy.exits) {
        exited = true;
        tau = tk + seg;
        /* first crosser stops at its crossing point; the other player is
         * advanced to the same instant */
        Vec vv, z;
        p.velocity_x(x, a, b, vv);
        add_scaled(z, x, seg, vv);
        x_end = sx.exits && sx.theta <= theta ? sx.crossing : p.omega_x.clamped(z);
        if (p.dim_y() > 0) {
          p.velocity_y(y, b, vv);
          add_scaled(z, y, seg, vv);
          y_end = sy.exits && sy.theta <= theta ? sy.crossing : p.omega_y.clamped(z);
        } else {
          y_end = y;
        }
      } else {
        x = sx.next;
        y = sy.next;
        tk += dt;
      }
    }
    if (!exited) {
      x_end = p.omega_x.clamped(x);
      y_end = p.omega_y.clamped(y);
    }
    Vec z_end = concat(x_end, y_end);
    const double value = acc + std::exp(-lam * tau) * interpolate(g, z_end);
    const bool better = lower ? value > opt : value < opt;
    if (first || better) {
      opt = value;
      first = false;
    }
  }
  return std::abs(interpolate(g, z0) - opt);
}

/* Largest one-step DPP residual over all interior nodes of a grid. */
inline double max_interior_dpp_residual(const GameProblem& p, const ValueGrid& g,
                                        const SchemeParams& sp, int probe_controls) {
  double worst = 0;
  Vec z;
  for (std::size_t node = 0; node < g.size(); ++node) {
    if (g.roles[node] != NodeRole::interior) continue;
    g.node_coords(node, z);
    worst = std::max(worst, dpp_residual(p, g, sp, z, sp.dt, probe_controls));
  }
  return worst;
}

/* CSV: trajectory rows (t, x..., y..., a..., b...) then a summary block. */
inline void dump_csv(const GameOutcome& o, std::ostream& os) {
  const std::size_t nx = o.path_x.empty() ? 0 : o.path_x.front().size();
  const std::size_t ny = o.path_y.empty() ? 0 : o.path_y.front().size();
  const std::size_t na = o.path_a.empty() ? 0 : o.path_a.front().size();
  const std::size_t nb = o.path_b.empty() ? 0 : o.path_b.front().size();
  os << "t";
  for (std::size_t i = 0; i < nx; ++i) os << ",x" << i;
  for (std::size_t i = 0; i < ny; ++i) os << ",y" << i;
  for (std::size_t i = 0; i < na; ++i) os << ",a" << i;
  for (std::size_t i = 0; i < nb; ++i) os << ",b" << i;
  os << "\n";
  char buf[32];
  const auto put = [&](double x) {
    std::snprintf(buf, sizeof buf, "%.17g", x);
    os << buf;
  };
  for (std::size_t k = 0; k < o.times.size(); ++k) {
    put(o.times[k]);
    for (double c : o.path_x[k]) { os << ","; put(c); }
    for (double c : o.path_y[k]) { os << ","; put(c); }
    for (double c : o.path_a[k]) { os << ","; put(c); }
    for (double c : o.path_b[k]) { os << ","; put(c); }
    os << "\n";
  }
  os << "# tauX="; put(o.tau_x);
  os << " tauY="; put(o.tau_y);
  os << " tau="; put(o.tau);
  os << " exit_case=" << exit_case_name(o.exit_case);
  os << " cost="; put(o.cost);
  os << " tail_bound="; put(o.tail_bound);
  os << "\n";
}

}  // namespace exitgame
