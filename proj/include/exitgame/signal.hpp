#pragma once

#include <cstdio>
#include <ostream>

#include "exitgame/problem.hpp"

/* Piecewise-constant time-indexed control paths, the discrete stand-in for
 * the measurable controls alpha, beta. Past the recorded horizon a signal
 * repeats its last sample: after the exit time controls may be arbitrarily
 * defined, and the cost only depends on what happened before it. */

namespace exitgame {

struct ControlSignal {
  double dt = 0.01;
  std::vector<Vec> samples;

  std::size_t steps() const { return samples.size(); }
  double horizon() const { return dt * static_cast<double>(samples.size()); }

  const Vec& at_step(std::size_t k) const {
    if (samples.empty()) fail_arg("control signal has no samples");
    return k < samples.size() ? samples[k] : samples.back();
  }
};

inline ControlSignal constant_signal(const Vec& u, double dt, std::size_t steps) {
  if (steps == 0) fail_arg("constant_signal: need at least one step");
  ControlSignal s;
  s.dt = dt;
  s.samples.assign(steps, u);
  return s;
}

inline bool signal_in_set(const ControlSignal& s, const ControlSet& set) {
  for (const Vec& u : s.samples)
    if (!set.contains(u)) return false;
  return true;
}

/* CSV: step index, time, control components. */
inline void dump_csv(const ControlSignal& s, std::ostream& os) {
  os << "step,time";
  for (std::size_t i = 0; i < (s.samples.empty() ? 0 : s.samples[0].size()); ++i)
    os << ",u" << i;
  os << "\n";
  char buf[32];
  for (std::size_t k = 0; k < s.samples.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", s.dt * static_cast<double>(k));
    os << k << "," << buf;
    for (double c : s.samples[k]) {
      std::snprintf(buf, sizeof buf, "%.17g", c);
      os << "," << buf;
    }
    os << "\n";
  }
}

/* ---- explicit Euler stepping with exact box-crossing detection ---- */

/* Outcome of one Euler step against a closed box: whether the step leaves
 * the box, the first-crossing fraction, the face crossed, and the crossing
 * point with the exit coordinate snapped exactly onto the face. */
struct StepOutcome {
  Vec next;
  bool exits = false;
  double theta = 1.0;
  Face face;
  Vec crossing;
};

inline StepOutcome euler_step(const Box& box, const Vec& z, const Vec& v, double h) {
  StepOutcome out;
  add_scaled(out.next, z, h, v);
  if (box.dims() == 0 || box.contains(out.next)) return out;
  out.exits = true;
  out.theta = kInfinity;
  for (std::size_t i = 0; i < box.dims(); ++i) {
    if (out.next[i] > box.hi[i]) {
      const double th = v[i] > 0 ? (box.hi[i] - z[i]) / (h * v[i]) : 0.0;
      if (th < out.theta) {
        out.theta = th;
        out.face = {i, true};
      }
    } else if (out.next[i] < box.lo[i]) {
      const double th = v[i] < 0 ? (box.lo[i] - z[i]) / (h * v[i]) : 0.0;
      if (th < out.theta) {
        out.theta = th;
        out.face = {i, false};
      }
    }
  }
  out.theta = std::min(std::max(out.theta, 0.0), 1.0);
  add_scaled(out.crossing, z, out.theta * h, v);
  out.crossing[out.face.axis] = out.face.coordinate(box);
  box.clamp(out.crossing);
  return out;
}

}  // namespace exitgame
