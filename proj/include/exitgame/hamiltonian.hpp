#pragma once

#include "exitgame/problem.hpp"

/* Upper and lower Hamiltonians by exact enumeration over the finite control
 * sets:
 *   UH(x,y,p,q) = min_b max_a { -f(x,a[,b])·p - g(y,b)·q - l(x,y,a,b) }
 *   LH(x,y,p,q) = max_a min_b { ... }
 * Ties break toward the first index in the control-set listing so that
 * extracted optimizers are reproducible. */

namespace exitgame {

struct Costate {
  Vec p;  // gradient w.r.t. x
  Vec q;  // gradient w.r.t. y
};

namespace detail {

inline double hamiltonian_term(const GameProblem& prob, const Vec& x, const Vec& y,
                               const Costate& co, const Vec& a, const Vec& b,
                               Vec& scratch) {
  prob.velocity_x(x, a, b, scratch);
  double s = -dot(scratch, co.p);
  if (prob.dim_y() > 0) {
    prob.velocity_y(y, b, scratch);
    s -= dot(scratch, co.q);
  }
  return s - prob.running(x, y, a, b);
}

struct HamiltonianOpt {
  double value = 0;
  std::size_t a_index = 0, b_index = 0;
};

/* outer_min_b = true: min_b max_a (upper Hamiltonian); false: max_a min_b */
inline HamiltonianOpt enumerate(const GameProblem& prob, const Vec& x, const Vec& y,
                                const Costate& co, bool outer_min_b) {
  HamiltonianOpt best;
  bool first_outer = true;
  Vec scratch;
  const auto& A = prob.controls_a.points;
  const auto& B = prob.controls_b.points;
  const std::size_t n_outer = outer_min_b ? B.size() : A.size();
  const std::size_t n_inner = outer_min_b ? A.size() : B.size();
  for (std::size_t i = 0; i < n_outer; ++i) {
    double inner_best = 0;
    std::size_t inner_idx = 0;
    bool first_inner = true;
    for (std::size_t j = 0; j < n_inner; ++j) {
      const Vec& a = outer_min_b ? A[j] : A[i];
      const Vec& b = outer_min_b ? B[i] : B[j];
      const double v = hamiltonian_term(prob, x, y, co, a, b, scratch);
      const bool better = outer_min_b ? v > inner_best : v < inner_best;
      if (first_inner || better) {
        inner_best = v;
        inner_idx = j;
        first_inner = false;
      }
    }
    const bool better = outer_min_b ? inner_best < best.value : inner_best > best.value;
    if (first_outer || better) {
      best.value = inner_best;
      if (outer_min_b) {
        best.b_index = i;
        best.a_index = inner_idx;
      } else {
        best.a_index = i;
        best.b_index = inner_idx;
      }
      first_outer = false;
    }
  }
  return best;
}

}  // namespace detail

inline double upper_hamiltonian(const GameProblem& p, const Vec& x, const Vec& y,
                                const Costate& co) {
  return detail::enumerate(p, x, y, co, true).value;
}

inline double lower_hamiltonian(const GameProblem& p, const Vec& x, const Vec& y,
                                const Costate& co) {
  return detail::enumerate(p, x, y, co, false).value;
}

struct SaddlePoint {
  std::size_t a_index = 0, b_index = 0;
  Vec a, b;
  double gap = 0;  // UH - LH >= 0 at this point
};

/* Optimizing control pair for the requested convention (lower pairs with
 * UH, upper with LH) plus the duality gap at that point. */
inline SaddlePoint saddle_point(const GameProblem& p, const Vec& x, const Vec& y,
                                const Costate& co, Convention convention) {
  const auto uh = detail::enumerate(p, x, y, co, true);
  const auto lh = detail::enumerate(p, x, y, co, false);
  SaddlePoint sp;
  const auto& pick = convention == Convention::lower ? uh : lh;
  sp.a_index = pick.a_index;
  sp.b_index = pick.b_index;
  sp.a = p.controls_a.points[sp.a_index];
  sp.b = p.controls_b.points[sp.b_index];
  sp.gap = uh.value - lh.value;
  return sp;
}

}  // namespace exitgame
