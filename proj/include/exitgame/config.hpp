#pragma once

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "exitgame/exitgame.hpp"

/* Problem definition files: TOML-style sections of key = value pairs.
 * Values are numbers, quoted strings, booleans, and single-line arrays
 * (optionally nested one level, for matrices and point lists). Parse errors
 * carry file and line. The full schema is documented in the README. */

namespace exitgame::config {

struct Value {
  enum class Kind { number, string, boolean, list };
  Kind kind = Kind::number;
  double num = 0;
  std::string str;
  bool flag = false;
  std::vector<Value> items;
  int line = 0;
};

namespace detail {

inline void strip(std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  s = b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

inline std::string strip_comment(const std::string& s) {
  bool in_str = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_str = !in_str;
    if (s[i] == '#' && !in_str) return s.substr(0, i);
  }
  return s;
}

[[noreturn]] inline void parse_fail(const std::string& file, int line,
                                    const std::string& msg) {
  fail_arg(file, ":", line, ": ", msg);
}

inline Value parse_value(const std::string& file, int line, const std::string& raw);

inline std::vector<Value> parse_list_items(const std::string& file, int line,
                                           const std::string& body) {
  std::vector<Value> items;
  int depth = 0;
  std::string cur;
  for (char c : body) {
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      items.push_back(parse_value(file, line, cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  strip(cur);
  if (!cur.empty()) items.push_back(parse_value(file, line, cur));
  return items;
}

inline Value parse_value(const std::string& file, int line, const std::string& raw) {
  std::string s = raw;
  strip(s);
  Value v;
  v.line = line;
  if (s.empty()) parse_fail(file, line, "missing value");
  if (s.front() == '"') {
    if (s.size() < 2 || s.back() != '"')
      parse_fail(file, line, "unterminated string");
    v.kind = Value::Kind::string;
    v.str = s.substr(1, s.size() - 2);
    return v;
  }
  if (s == "true" || s == "false") {
    v.kind = Value::Kind::boolean;
    v.flag = s == "true";
    return v;
  }
  if (s.front() == '[') {
    if (s.back() != ']') parse_fail(file, line, "unterminated array");
    v.kind = Value::Kind::list;
    v.items = parse_list_items(file, line, s.substr(1, s.size() - 2));
    return v;
  }
  char* end = nullptr;
  v.num = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0')
    parse_fail(file, line, "expected a number, string, boolean or array, got '" + s + "'");
  v.kind = Value::Kind::number;
  return v;
}

}  // namespace detail

struct File {
  std::string name;
  std::map<std::string, Value> entries;

  bool has(const std::string& key) const { return entries.count(key) > 0; }

  const Value& get(const std::string& key) const {
    const auto it = entries.find(key);
    if (it == entries.end()) fail_arg(name, ": missing required key '", key, "'");
    return it->second;
  }

  double number(const std::string& key) const {
    const Value& v = get(key);
    if (v.kind != Value::Kind::number)
      fail_arg(name, ":", v.line, ": '", key, "' must be a number");
    return v.num;
  }

  double number_or(const std::string& key, double dflt) const {
    return has(key) ? number(key) : dflt;
  }

  std::string str(const std::string& key) const {
    const Value& v = get(key);
    if (v.kind != Value::Kind::string)
      fail_arg(name, ":", v.line, ": '", key, "' must be a string");
    return v.str;
  }

  std::string str_or(const std::string& key, const std::string& dflt) const {
    return has(key) ? str(key) : dflt;
  }

  /* a number or flat list of numbers */
  Vec vec(const std::string& key) const {
    const Value& v = get(key);
    if (v.kind == Value::Kind::number) return {v.num};
    if (v.kind != Value::Kind::list)
      fail_arg(name, ":", v.line, ": '", key, "' must be a number or array");
    Vec out;
    for (const Value& it : v.items) {
      if (it.kind != Value::Kind::number)
        fail_arg(name, ":", v.line, ": '", key, "' must contain numbers only");
      out.push_back(it.num);
    }
    return out;
  }

  /* list of points; a flat number list is read as 1-d points */
  std::vector<Vec> points(const std::string& key) const {
    const Value& v = get(key);
    if (v.kind != Value::Kind::list)
      fail_arg(name, ":", v.line, ": '", key, "' must be an array");
    std::vector<Vec> out;
    for (const Value& it : v.items) {
      if (it.kind == Value::Kind::number) {
        out.push_back({it.num});
      } else if (it.kind == Value::Kind::list) {
        Vec p;
        for (const Value& c : it.items) {
          if (c.kind != Value::Kind::number)
            fail_arg(name, ":", v.line, ": '", key, "' points must be numeric");
          p.push_back(c.num);
        }
        out.push_back(std::move(p));
      } else {
        fail_arg(name, ":", v.line, ": '", key, "' must be a list of points");
      }
    }
    return out;
  }

  Matrix matrix(const std::string& key) const {
    const auto rows = points(key);
    if (rows.empty()) fail_arg(name, ": matrix '", key, "' is empty");
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != m.cols)
        fail_arg(name, ": matrix '", key, "' has ragged rows");
      for (std::size_t j = 0; j < m.cols; ++j) m.at(i, j) = rows[i][j];
    }
    return m;
  }
};

inline File parse(std::istream& in, const std::string& name) {
  File f;
  f.name = name;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_comment(line);
    detail::strip(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        detail::parse_fail(name, lineno, "unterminated section header");
      section = line.substr(1, line.size() - 2);
      detail::strip(section);
      if (section.empty()) detail::parse_fail(name, lineno, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      detail::parse_fail(name, lineno, "expected 'key = value'");
    std::string key = line.substr(0, eq);
    detail::strip(key);
    if (key.empty()) detail::parse_fail(name, lineno, "empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    if (f.entries.count(full))
      detail::parse_fail(name, lineno, "duplicate key '" + full + "'");
    f.entries[full] = detail::parse_value(name, lineno, line.substr(eq + 1));
  }
  return f;
}

inline File load(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail_arg("cannot open config file '", path, "'");
  return parse(in, path);
}

/* ---- polynomial tables ---- */

/* Sum of coefficient * product of powers over a fixed variable layout;
 * each term row is [coeff, e_1, ..., e_nvars]. */
struct Polynomial {
  std::size_t n_vars = 0;
  std::vector<std::vector<double>> terms;

  double eval(const double* vars) const {
    double acc = 0;
    for (const auto& t : terms) {
      double prod = t[0];
      for (std::size_t i = 0; i < n_vars; ++i) {
        const auto e = static_cast<int>(t[1 + i]);
        for (int k = 0; k < e; ++k) prod *= vars[i];
      }
      acc += prod;
    }
    return acc;
  }
};

inline Polynomial read_polynomial(const File& cfg, const std::string& key,
                                  std::size_t n_vars) {
  Polynomial poly;
  poly.n_vars = n_vars;
  for (const Vec& row : cfg.points(key)) {
    if (row.size() != 1 + n_vars)
      fail_arg(cfg.name, ": '", key, "' terms need 1+", n_vars,
               " entries [coeff, exponents...], got ", row.size());
    std::vector<double> term(row.begin(), row.end());
    poly.terms.push_back(std::move(term));
  }
  return poly;
}

/* ---- problem building ---- */

namespace detail {

inline ControlSet read_controls(const File& cfg, const std::string& key) {
  ControlSet set;
  if (cfg.has("controls." + key + "_linspace")) {
    const Vec spec = cfg.vec("controls." + key + "_linspace");
    if (spec.size() != 3 || spec[2] < 1)
      fail_arg(cfg.name, ": ", key, "_linspace must be [lo, hi, count]");
    const auto n = static_cast<std::size_t>(spec[2]);
    for (std::size_t i = 0; i < n; ++i)
      set.points.push_back(
          {n == 1 ? spec[0] : spec[0] + (spec[1] - spec[0]) * i / (n - 1)});
  } else {
    set.points = cfg.points("controls." + key);
  }
  set.validate();
  return set;
}

inline ExitCostFn read_exit_cost(const File& cfg, const std::string& section,
                                 std::size_t nx, std::size_t ny) {
  const std::string type = cfg.str_or(section + ".type", "constant");
  if (type == "constant") {
    const double c = cfg.number(section + ".value");
    return [c](const Vec&, const Vec&) { return c; };
  }
  if (type == "polynomial") {
    Polynomial poly = read_polynomial(cfg, section + ".terms", nx + ny);
    return [poly, nx, ny](const Vec& x, const Vec& y) {
      double vars[8];
      for (std::size_t i = 0; i < nx; ++i) vars[i] = x[i];
      for (std::size_t i = 0; i < ny; ++i) vars[nx + i] = y[i];
      return poly.eval(vars);
    };
  }
  fail_arg(cfg.name, ": unknown exit-cost type '", type, "' in [", section, "]");
}

inline RunningCostFn read_running_cost(const File& cfg, std::size_t nx, std::size_t ny,
                                       std::size_t na, std::size_t nb) {
  const std::string type = cfg.str_or("costs.running.type", "constant");
  if (type == "constant") {
    const double c = cfg.number("costs.running.value");
    return [c](const Vec&, const Vec&, const Vec&, const Vec&) { return c; };
  }
  if (type == "quadratic_b") {  // offset + weight*|b|^2
    const double off = cfg.number_or("costs.running.offset", 0.0);
    const double w = cfg.number_or("costs.running.weight", 1.0);
    return [off, w](const Vec&, const Vec&, const Vec&, const Vec& b) {
      return off + w * dot(b, b);
    };
  }
  if (type == "polynomial") {
    Polynomial poly = read_polynomial(cfg, "costs.running.terms", nx + ny + na + nb);
    return [poly, nx, ny, na, nb](const Vec& x, const Vec& y, const Vec& a, const Vec& b) {
      double vars[16];
      std::size_t k = 0;
      for (std::size_t i = 0; i < nx; ++i) vars[k++] = x[i];
      for (std::size_t i = 0; i < ny; ++i) vars[k++] = y[i];
      for (std::size_t i = 0; i < na; ++i) vars[k++] = a[i];
      for (std::size_t i = 0; i < nb; ++i) vars[k++] = b[i];
      return poly.eval(vars);
    };
  }
  fail_arg(cfg.name, ": unknown running-cost type '", type, "'");
}

inline DriftFn linear_drift(Matrix A, Matrix Bu, Vec c) {
  return [A = std::move(A), Bu = std::move(Bu), c = std::move(c)](
             const Vec& z, const Vec& u, Vec& out) {
    out.assign(c.begin(), c.end());
    for (std::size_t i = 0; i < A.rows; ++i) {
      double s = out[i];
      for (std::size_t j = 0; j < A.cols; ++j) s += A.at(i, j) * z[j];
      for (std::size_t j = 0; j < Bu.cols; ++j) s += Bu.at(i, j) * u[j];
      out[i] = s;
    }
  };
}

inline Matrix zero_or(const File& cfg, const std::string& key, std::size_t r,
                      std::size_t c) {
  if (cfg.has(key)) {
    Matrix m = cfg.matrix(key);
    if (m.rows != r || m.cols != c)
      fail_arg(cfg.name, ": matrix '", key, "' must be ", r, "x", c);
    return m;
  }
  return Matrix(r, c);
}

}  // namespace detail

inline GameProblem build_problem(const File& cfg) {
  GameProblem p;
  p.omega_x.lo = cfg.vec("omegaX.lo");
  p.omega_x.hi = cfg.vec("omegaX.hi");
  if (cfg.has("omegaY.lo")) {
    p.omega_y.lo = cfg.vec("omegaY.lo");
    p.omega_y.hi = cfg.vec("omegaY.hi");
  }
  p.controls_a = detail::read_controls(cfg, "A");
  p.controls_b = detail::read_controls(cfg, "B");

  const std::size_t nx = p.dim_x(), ny = p.dim_y();
  const std::size_t na = p.controls_a.dims(), nb = p.controls_b.dims();

  const std::string type = cfg.str("dynamics.type");
  if (type == "eikonal") {  // x' = a, y' = 0
    if (na != nx) fail_arg(cfg.name, ": eikonal dynamics need dim(A) = dim(x)");
    p.dynamics.drift_x = [](const Vec&, const Vec& a, Vec& out) { out = a; };
    p.dynamics.drift_y = [ny](const Vec&, const Vec&, Vec& out) { out.assign(ny, 0.0); };
  } else if (type == "surge_tank") {  // x1' = x2, x2' = a2 + b (D fixed)
    if (nx != 2) fail_arg(cfg.name, ": surge_tank dynamics need a 2-d X state");
    if (na != 2) fail_arg(cfg.name, ": surge_tank controls A live in the x-velocity space");
    if (nb != 1) fail_arg(cfg.name, ": surge_tank disturbance B must be 1-d");
    p.dynamics.drift_x = [](const Vec& x, const Vec& a, Vec& out) {
      out = {x[1] + a[0], a[1]};
    };
    p.dynamics.drift_y = [ny](const Vec&, const Vec&, Vec& out) { out.assign(ny, 0.0); };
    Matrix D(2, 1);
    D.at(1, 0) = 1.0;
    p.dynamics.coupling_D = D;
  } else if (type == "linear") {
    Matrix Ax = detail::zero_or(cfg, "dynamics.Ax", nx, nx);
    Matrix Ba = detail::zero_or(cfg, "dynamics.Ba", nx, na);
    Vec cx = cfg.has("dynamics.cx") ? cfg.vec("dynamics.cx") : Vec(nx, 0.0);
    if (cx.size() != nx) fail_arg(cfg.name, ": dynamics.cx must have dim(x) entries");
    p.dynamics.drift_x = detail::linear_drift(std::move(Ax), std::move(Ba), std::move(cx));
    if (ny > 0) {
      Matrix Ay = detail::zero_or(cfg, "dynamics.Ay", ny, ny);
      Matrix Bb = detail::zero_or(cfg, "dynamics.Bb", ny, nb);
      Vec cy = cfg.has("dynamics.cy") ? cfg.vec("dynamics.cy") : Vec(ny, 0.0);
      if (cy.size() != ny) fail_arg(cfg.name, ": dynamics.cy must have dim(y) entries");
      p.dynamics.drift_y = detail::linear_drift(std::move(Ay), std::move(Bb), std::move(cy));
    } else {
      p.dynamics.drift_y = [](const Vec&, const Vec&, Vec& out) { out.clear(); };
    }
  } else if (type == "polynomial") {
    std::vector<Polynomial> fx, gy;
    for (std::size_t i = 0; i < nx; ++i)
      fx.push_back(read_polynomial(cfg, "dynamics.fx" + std::to_string(i), nx + na));
    for (std::size_t i = 0; i < ny; ++i)
      gy.push_back(read_polynomial(cfg, "dynamics.gy" + std::to_string(i), ny + nb));
    p.dynamics.drift_x = [fx, nx, na](const Vec& x, const Vec& a, Vec& out) {
      double vars[8];
      for (std::size_t i = 0; i < nx; ++i) vars[i] = x[i];
      for (std::size_t i = 0; i < na; ++i) vars[nx + i] = a[i];
      out.resize(fx.size());
      for (std::size_t i = 0; i < fx.size(); ++i) out[i] = fx[i].eval(vars);
    };
    p.dynamics.drift_y = [gy, ny, nb](const Vec& y, const Vec& b, Vec& out) {
      double vars[8];
      for (std::size_t i = 0; i < ny; ++i) vars[i] = y[i];
      for (std::size_t i = 0; i < nb; ++i) vars[ny + i] = b[i];
      out.resize(gy.size());
      for (std::size_t i = 0; i < gy.size(); ++i) out[i] = gy[i].eval(vars);
    };
  } else {
    fail_arg(cfg.name, ": unknown dynamics type '", type, "'");
  }

  if (cfg.has("dynamics.D")) {
    if (type == "surge_tank") fail_arg(cfg.name, ": surge_tank fixes its own D");
    Matrix D = cfg.matrix("dynamics.D");
    if (type == "linear" && cfg.has("dynamics.Ba") &&
        !cfg.matrix("dynamics.Ba").is_identity())
      fail_arg(cfg.name, ": with coupling D the dynamics must be f(x)+a+Db; Ba must be "
               "the identity");
    p.dynamics.coupling_D = std::move(D);
  }
  p.dynamics.lipschitz_L = cfg.number_or("dynamics.lipschitz_L", 0.0);
  p.dynamics.bound_M = cfg.number("dynamics.bound_M");

  p.costs.discount_lambda = cfg.number("costs.lambda");
  const std::string split = cfg.str_or("costs.split", "none");
  if (split == "fully_decoupled")
    p.costs.split = CostSplit::fully_decoupled;
  else if (split == "control_separated")
    p.costs.split = CostSplit::control_separated;
  else if (split == "none")
    p.costs.split = CostSplit::none;
  else
    fail_arg(cfg.name, ": unknown costs.split '", split, "'");
  p.costs.running = detail::read_running_cost(cfg, nx, ny, na, nb);
  p.costs.exit_x = detail::read_exit_cost(cfg, "costs.exitX", nx, ny);
  if (ny > 0) {
    p.costs.exit_y = detail::read_exit_cost(cfg, "costs.exitY", nx, ny);
    p.costs.exit_xy = detail::read_exit_cost(cfg, "costs.exitXY", nx, ny);
  } else {
    p.costs.exit_y = [](const Vec&, const Vec&) { return 0.0; };
    p.costs.exit_xy = [](const Vec&, const Vec&) { return 0.0; };
  }

  p.check_dimensions();
  return p;
}

inline std::vector<std::size_t> read_grid_nodes(const File& cfg) {
  if (!cfg.has("grid.nodes")) fail_arg(cfg.name, ": missing [grid] nodes");
  std::vector<std::size_t> nodes;
  for (double v : cfg.vec("grid.nodes")) {
    if (v < 2) fail_arg(cfg.name, ": grid nodes must be >= 2");
    nodes.push_back(static_cast<std::size_t>(v));
  }
  return nodes;
}

inline SchemeParams read_scheme(const File& cfg) {
  SchemeParams sp;
  sp.dt = cfg.number("scheme.dt");
  sp.tol = cfg.number_or("scheme.tol", 1e-6);
  sp.max_iters = static_cast<std::size_t>(cfg.number_or("scheme.max_iters", 200000));
  const std::string conv = cfg.str_or("scheme.convention", "lower");
  if (conv == "lower")
    sp.convention = Convention::lower;
  else if (conv == "upper")
    sp.convention = Convention::upper;
  else
    fail_arg(cfg.name, ": unknown scheme.convention '", conv, "'");
  return sp;
}

}  // namespace exitgame::config
