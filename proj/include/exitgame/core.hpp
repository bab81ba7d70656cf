#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

/* Small dense helpers shared across the library. States and controls are
 * plain std::vector<double>; dimensions are tiny (n+m <= 4 by default), so
 * no linear-algebra dependency is warranted. Hot loops reuse scratch
 * buffers instead of allocating. */

namespace exitgame {

using Vec = std::vector<double>;

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

inline double dot(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

inline double distance(const Vec& a, const Vec& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

/* out = a + s*b, in place */
inline void add_scaled(Vec& out, const Vec& a, double s, const Vec& b) {
  out.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + s * b[i];
}

inline Vec concat(const Vec& a, const Vec& b) {
  Vec z;
  z.reserve(a.size() + b.size());
  z.insert(z.end(), a.begin(), a.end());
  z.insert(z.end(), b.begin(), b.end());
  return z;
}

/* Dense row-major matrix, used for the control-coupling map D and for
 * linear builtin dynamics. */
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> data;  // rows*cols, row-major

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  void apply(const Vec& v, Vec& out) const {
    out.assign(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      double s = 0;
      for (std::size_t j = 0; j < cols; ++j) s += data[i * cols + j] * v[j];
      out[i] = s;
    }
  }

  Vec apply(const Vec& v) const {
    Vec out;
    apply(v, out);
    return out;
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1.0;
    return m;
  }

  bool is_identity(double tol = 0.0) const {
    if (rows != cols) return false;
    for (std::size_t i = 0; i < rows; ++i)
      for (std::size_t j = 0; j < cols; ++j)
        if (std::abs(at(i, j) - (i == j ? 1.0 : 0.0)) > tol) return false;
    return true;
  }
};

enum class Player { x, y };

inline const char* player_name(Player p) { return p == Player::x ? "X" : "Y"; }

/* Optimization ordering of the discrete one-step game.
 *   lower: outer max over b, inner min over a  (pairs with the upper
 *          Hamiltonian and the Dirichlet problem for the lower value)
 *   upper: outer min over a, inner max over b  (lower Hamiltonian,
 *          problem for the upper value) */
enum class Convention { lower, upper };

inline const char* convention_name(Convention c) {
  return c == Convention::lower ? "lower" : "upper";
}

template <class... Args>
[[noreturn]] inline void fail(const Args&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  throw std::runtime_error(os.str());
}

template <class... Args>
[[noreturn]] inline void fail_arg(const Args&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  throw std::invalid_argument(os.str());
}

}  // namespace exitgame
