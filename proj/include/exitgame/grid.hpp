#pragma once

#include <cstdint>
#include <ostream>
#include <vector>

#include "exitgame/problem.hpp"

/* Uniform tensor grid over cl(Omega_X) x cl(Omega_Y) with per-node
 * boundary-role tags and multilinear interpolation. The roles follow the
 * boundary partition d(Omega_X x Omega_Y) =
 * (dOmega_X x Omega_Y) u (Omega_X x dOmega_Y) u (dOmega_X x dOmega_Y). */

namespace exitgame {

enum class NodeRole : std::uint8_t { interior, x_face, y_face, corner };

inline const char* node_role_name(NodeRole r) {
  switch (r) {
    case NodeRole::interior: return "INTERIOR";
    case NodeRole::x_face: return "X_FACE";
    case NodeRole::y_face: return "Y_FACE";
    default: return "CORNER";
  }
}

struct GridAxis {
  double lo = 0, hi = 1;
  std::size_t count = 2;
  double h() const { return (hi - lo) / static_cast<double>(count - 1); }
};

struct GridLimits {
  std::size_t max_dims = 4;
  std::size_t max_nodes = 8'000'000;
};

struct ValueGrid {
  std::vector<GridAxis> axes;  // leading dim_x axes cover Omega_X
  std::size_t dim_x = 0;
  std::vector<double> values;
  std::vector<NodeRole> roles;
  std::vector<std::size_t> strides;  // row-major, last axis fastest

  std::size_t dims() const { return axes.size(); }
  std::size_t size() const { return values.size(); }
  double min_spacing() const {
    double h = kInfinity;
    for (const auto& ax : axes) h = std::min(h, ax.h());
    return h;
  }

  void node_coords(std::size_t node, Vec& z) const {
    z.resize(dims());
    for (std::size_t i = 0; i < dims(); ++i) {
      const std::size_t idx = (node / strides[i]) % axes[i].count;
      z[i] = idx + 1 == axes[i].count ? axes[i].hi : axes[i].lo + axes[i].h() * idx;
    }
  }

  Vec node_coords(std::size_t node) const {
    Vec z;
    node_coords(node, z);
    return z;
  }
};

inline ValueGrid build_grid(const GameProblem& p,
                            std::vector<std::size_t> nodes_per_axis,
                            const GridLimits& limits = {}) {
  p.check_dimensions();
  const std::size_t d = p.dim_x() + p.dim_y();
  if (d > limits.max_dims)
    fail_arg("build_grid: ", d, " state dimensions exceed the configured cap of ",
             limits.max_dims);
  if (nodes_per_axis.size() == 1) nodes_per_axis.assign(d, nodes_per_axis.front());
  if (nodes_per_axis.size() != d)
    fail_arg("build_grid: got ", nodes_per_axis.size(), " axis counts for ", d, " axes");
  ValueGrid g;
  g.dim_x = p.dim_x();
  std::size_t total = 1;
  for (std::size_t i = 0; i < d; ++i) {
    if (nodes_per_axis[i] < 2) fail_arg("build_grid: need >= 2 nodes per axis");
    const bool x_side = i < p.dim_x();
    const Box& box = x_side ? p.omega_x : p.omega_y;
    const std::size_t k = x_side ? i : i - p.dim_x();
    g.axes.push_back({box.lo[k], box.hi[k], nodes_per_axis[i]});
    if (total > limits.max_nodes / nodes_per_axis[i])
      fail_arg("build_grid: total node count exceeds the cap of ", limits.max_nodes,
               "; use a coarser grid");
    total *= nodes_per_axis[i];
  }
  g.strides.assign(d, 1);
  for (std::size_t i = d; i-- > 1;) g.strides[i - 1] = g.strides[i] * g.axes[i].count;
  g.values.assign(total, 0.0);
  g.roles.assign(total, NodeRole::interior);
  for (std::size_t node = 0; node < total; ++node) {
    bool on_x = false, on_y = false;
    for (std::size_t i = 0; i < d; ++i) {
      const std::size_t idx = (node / g.strides[i]) % g.axes[i].count;
      if (idx == 0 || idx + 1 == g.axes[i].count)
        (i < g.dim_x ? on_x : on_y) = true;
    }
    g.roles[node] = on_x ? (on_y ? NodeRole::corner : NodeRole::x_face)
                         : (on_y ? NodeRole::y_face : NodeRole::interior);
  }
  return g;
}

/* Multilinear interpolation. Exact at nodes and on affine fields; monotone
 * and sup-norm nonexpansive in the nodal values (both needed by the solver's
 * contraction argument). z must lie in the closed box product; callers clamp
 * first. */
inline double interpolate(const ValueGrid& g, const Vec& z) {
  const std::size_t d = g.dims();
  std::size_t base[8];
  double w[8];
  for (std::size_t i = 0; i < d; ++i) {
    const GridAxis& ax = g.axes[i];
    const double slack = 1e-9 * (ax.hi - ax.lo);
    if (z[i] < ax.lo - slack || z[i] > ax.hi + slack)
      throw std::domain_error("interpolate: point outside the closed domain");
    double u = (z[i] - ax.lo) / ax.h();
    double cell = std::floor(u);
    if (cell < 0) cell = 0;
    if (cell > static_cast<double>(ax.count - 2)) cell = static_cast<double>(ax.count - 2);
    base[i] = static_cast<std::size_t>(cell);
    double wi = u - cell;
    if (wi < 0) wi = 0;
    if (wi > 1) wi = 1;
    w[i] = wi;
  }
  double acc = 0;
  const std::size_t corners = std::size_t{1} << d;
  for (std::size_t c = 0; c < corners; ++c) {
    double weight = 1;
    std::size_t node = 0;
    for (std::size_t i = 0; i < d; ++i) {
      const bool hi = (c >> i) & 1u;
      weight *= hi ? w[i] : 1.0 - w[i];
      node += (base[i] + (hi ? 1 : 0)) * g.strides[i];
    }
    if (weight != 0.0) acc += weight * g.values[node];
  }
  return acc;
}

/* CSV dump: one row per node with coordinates, role tag and value. */
inline void dump_csv(const ValueGrid& g, std::ostream& os) {
  for (std::size_t i = 0; i < g.dims(); ++i)
    os << (i < g.dim_x ? "x" : "y") << (i < g.dim_x ? i : i - g.dim_x) << ",";
  os << "role,value\n";
  Vec z;
  char buf[32];
  for (std::size_t node = 0; node < g.size(); ++node) {
    g.node_coords(node, z);
    for (double c : z) {
      std::snprintf(buf, sizeof buf, "%.17g", c);
      os << buf << ",";
    }
    std::snprintf(buf, sizeof buf, "%.17g", g.values[node]);
    os << node_role_name(g.roles[node]) << "," << buf << "\n";
  }
}

}  // namespace exitgame
