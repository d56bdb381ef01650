#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tunnel/errors.hpp"
#include "tunnel/potential.hpp"
#include "tunnel/roots.hpp"
#include "tunnel/semiclassics.hpp"

namespace tunnel {

using cplx = std::complex<double>;

struct ComplexState {
  cplx q, p;
};

enum class Direction { real, imaginary };

struct PathSegment {
  Direction direction;
  double duration;
};

// Staircase in the complex time plane: real steps forward, imaginary steps
// downward, so Im t never increases.
struct ComplexTimePath {
  std::vector<PathSegment> segments;

  ComplexTimePath& then(Direction d, double duration) {
    require(std::isfinite(duration) && duration > 0, "time path: segment durations must be positive");
    if (!segments.empty() && segments.back().direction == d)
      segments.back().duration += duration;
    else
      segments.push_back({d, duration});
    return *this;
  }
  cplx total() const {
    cplx t = 0;
    for (auto& s : segments) t += s.direction == Direction::real ? cplx(s.duration, 0) : cplx(0, -s.duration);
    return t;
  }
  int steps() const { return int(segments.size()); }
};

inline cplx time_factor(Direction d) { return d == Direction::real ? cplx(1, 0) : cplx(0, -1); }

struct Sample {
  double s;
  cplx t, q, p, action;
};

struct Trajectory {
  std::vector<Sample> samples;
  Eigen::Matrix2cd monodromy = Eigen::Matrix2cd::Identity();
  double max_drift = 0;
  int steps_per_segment = 0;

  const Sample& back() const { return samples.back(); }
  ComplexState end() const { return {samples.back().q, samples.back().p}; }
};

namespace detail {

// q, p, action and the tangent map (row major).
using Flow = std::array<cplx, 7>;

inline Flow flow_rhs(const Potential& v, const Flow& y, cplx c) {
  cplx q = y[0], p = y[1];
  cplx v0 = v.eval(q, 0), v1 = v.eval(q, 1), v2 = v.eval(q, 2);
  Flow d;
  d[0] = c * p;
  d[1] = -c * v1;
  d[2] = c * (0.5 * p * p - v0);
  d[3] = c * y[5];
  d[4] = c * y[6];
  d[5] = -c * v2 * y[3];
  d[6] = -c * v2 * y[4];
  return d;
}

inline Flow rk4(const Potential& v, const Flow& y, double h, cplx c) {
  auto add = [](const Flow& a, const Flow& b, double f) {
    Flow r;
    for (int i = 0; i < 7; ++i) r[i] = a[i] + f * b[i];
    return r;
  };
  Flow k1 = flow_rhs(v, y, c);
  Flow k2 = flow_rhs(v, add(y, k1, h / 2), c);
  Flow k3 = flow_rhs(v, add(y, k2, h / 2), c);
  Flow k4 = flow_rhs(v, add(y, k3, h), c);
  Flow r;
  for (int i = 0; i < 7; ++i) r[i] = y[i] + h / 6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  return r;
}

inline Flow start_flow(const ComplexState& s) { return {s.q, s.p, 0, 1, 0, 0, 1}; }

inline cplx energy_of(const Potential& v, const Flow& y) { return 0.5 * y[1] * y[1] + v.eval(y[0], 0); }

inline Eigen::Matrix2cd tangent(const Flow& y) {
  Eigen::Matrix2cd m;
  m << y[3], y[4], y[5], y[6];
  return m;
}

inline constexpr double drift_tolerance = 1e-10;
inline constexpr int max_steps = 1 << 22;

}  // namespace detail

// Fixed-step RK4 along each segment of the path; the step count is doubled
// until the complex energy stays within tolerance.
inline Trajectory integrate_complex(const Potential& v, ComplexState start, const ComplexTimePath& path,
                                    int steps_per_segment = 1000) {
  require(!path.segments.empty(), "integrate_complex: empty time path");
  require(steps_per_segment >= 1, "integrate_complex: need at least one step per segment");
  for (int n = steps_per_segment; n <= detail::max_steps; n *= 2) {
    Trajectory tr;
    tr.steps_per_segment = n;
    detail::Flow y = detail::start_flow(start);
    cplx h0 = detail::energy_of(v, y), t = 0;
    double s = 0, tol = detail::drift_tolerance * std::max(1.0, std::abs(h0));
    tr.samples.push_back({0, 0, y[0], y[1], 0});
    bool ok = true;
    for (auto& seg : path.segments) {
      cplx c = time_factor(seg.direction);
      double h = seg.duration / n;
      for (int k = 0; k < n; ++k) {
        y = detail::rk4(v, y, h, c);
        s += h;
        t += c * h;
        tr.samples.push_back({s, t, y[0], y[1], y[2]});
        double drift = std::abs(detail::energy_of(v, y) - h0);
        tr.max_drift = std::max(tr.max_drift, drift);
        if (!std::isfinite(drift) || drift > tol) {
          ok = false;
          break;
        }
      }
      if (!ok) break;
    }
    if (ok) {
      tr.monodromy = detail::tangent(y);
      return tr;
    }
  }
  throw IntegrationAccuracy("integrate_complex: energy drift tolerance not reached within the step budget");
}

inline cplx orbit_action(const Trajectory& tr) { return tr.back().action; }

// Trapezoid accumulation of p dq - H dt along the samples.
inline cplx orbit_action_trapezoid(const Potential& v, const Trajectory& tr) {
  cplx s = 0;
  for (std::size_t i = 1; i < tr.samples.size(); ++i) {
    auto& a = tr.samples[i - 1];
    auto& b = tr.samples[i];
    cplx ha = 0.5 * a.p * a.p + v.eval(a.q, 0), hb = 0.5 * b.p * b.p + v.eval(b.q, 0);
    s += 0.5 * (a.p + b.p) * (b.q - a.q) - 0.5 * (ha + hb) * (b.t - a.t);
  }
  return s;
}

enum class LegKind { allowed, forbidden, rotation, barrier };

inline const char* to_string(LegKind k) {
  switch (k) {
    case LegKind::allowed: return "allowed";
    case LegKind::forbidden: return "forbidden";
    case LegKind::rotation: return "rotation";
    case LegKind::barrier: return "barrier";
  }
  return "unknown";
}

struct Leg {
  LegKind kind;
  int from = -1, to = -1;
  int crossings = 1;
};

enum class OrbitFamily { double_well, triple_well, pendulum, generic };

// Ordered turning-point sequence (indices into the sorted turning points at
// the orbit energy) and the legs joining them. Pendulum orbits are built
// from rotation legs and crossings of the line Re q = pi.
struct OrbitTopology {
  OrbitFamily family = OrbitFamily::generic;
  double energy = 0;
  std::vector<double> turning_points;
  std::vector<int> sequence;
  std::vector<Leg> legs;
  int w_r = 0, w_c = 0, w_m = 0;
  int eta = 1;
  int maslov = 0;

  ComplexState start(const Potential& v) const {
    if (family == OrbitFamily::pendulum)
      return {std::numbers::pi, std::sqrt(2 * (energy - v.gamma()))};
    return {turning_points[sequence.front()], 0};
  }
};

namespace detail {

inline std::vector<double> all_turning_points(const Potential& v, double energy) {
  return turning_points(v, energy, -confining_radius(v, energy), confining_radius(v, energy)).positions();
}

inline void build_legs(const Potential& v, OrbitTopology& t) {
  t.legs.clear();
  for (std::size_t i = 1; i < t.sequence.size(); ++i) {
    int a = t.sequence[i - 1], b = t.sequence[i];
    if (std::abs(a - b) != 1)
      throw TopologyError("orbit topology: consecutive turning points must be adjacent");
    double mid = 0.5 * (t.turning_points[a] + t.turning_points[b]);
    t.legs.push_back({v(mid) < t.energy ? LegKind::allowed : LegKind::forbidden, a, b, 1});
  }
  if (t.legs.empty()) throw TopologyError("orbit topology: need at least two turning points");
}

inline int index_of(const std::vector<double>& tps, double q) {
  for (std::size_t i = 0; i < tps.size(); ++i)
    if (std::abs(tps[i] - q) < 1e-6 * std::max(1.0, std::abs(q))) return int(i);
  throw TopologyError("orbit topology: " + std::to_string(q) + " is not a turning point at this energy");
}

inline void check_closure_rule(const OrbitTopology& t) {
  int first = t.sequence.front(), last = t.sequence.back();
  if (t.eta == 1 && first != last) throw TopologyError("orbit topology: eta = +1 orbits must close");
  if (t.eta == -1) {
    double a = t.turning_points[first], b = t.turning_points[last];
    if (std::abs(a + b) > 1e-8 * std::max(1.0, std::abs(a)))
      throw TopologyError("orbit topology: eta = -1 orbits must end at the parity image of the start");
  }
}

}  // namespace detail

inline OrbitTopology from_sequence(const Potential& v, double energy, const std::vector<double>& points, int eta) {
  if (eta != 1 && eta != -1) throw TopologyError("orbit topology: eta must be +1 or -1");
  if (v.topology() != Topology::line) throw TopologyError("orbit topology: sequences need a potential on the line");
  OrbitTopology t;
  t.energy = energy;
  t.eta = eta;
  t.turning_points = detail::all_turning_points(v, energy);
  for (double q : points) t.sequence.push_back(detail::index_of(t.turning_points, q));
  detail::build_legs(v, t);
  detail::check_closure_rule(t);
  t.maslov = (int(t.legs.size()) + (eta == -1 ? 1 : 0)) / 2;
  return t;
}

// Starts at the inner turning point of the right well: w_r lateral loops,
// w_c barrier loops, then half a barrier crossing when eta = -1.
inline OrbitTopology double_well_topology(const Potential& v, double energy, int w_r, int w_c, int eta) {
  if (w_r < 0 || w_c < 0) throw TopologyError("orbit topology: winding numbers must be non-negative");
  if (eta != 1 && eta != -1) throw TopologyError("orbit topology: eta must be +1 or -1");
  OrbitTopology t;
  t.family = OrbitFamily::double_well;
  t.energy = energy;
  t.eta = eta;
  t.w_r = w_r;
  t.w_c = w_c;
  t.turning_points = detail::all_turning_points(v, energy);
  if (t.turning_points.size() != 4) throw TopologyError("double-well orbit: expected four turning points");
  t.sequence = {2};
  for (int k = 0; k < w_r; ++k) t.sequence.insert(t.sequence.end(), {3, 2});
  for (int k = 0; k < w_c; ++k) t.sequence.insert(t.sequence.end(), {1, 2});
  if (eta == -1) t.sequence.push_back(1);
  detail::build_legs(v, t);
  t.maslov = w_r + w_c + (1 - eta) / 2;
  return t;
}

// Parity-changing triple-well orbit r -> c -> m -> -c -> l.
inline OrbitTopology triple_well_topology(const Potential& v, double energy, int w_r, int w_m) {
  if (w_r < 0 || w_m < 0) throw TopologyError("orbit topology: winding numbers must be non-negative");
  OrbitTopology t;
  t.family = OrbitFamily::triple_well;
  t.energy = energy;
  t.eta = -1;
  t.w_r = w_r;
  t.w_m = w_m;
  t.turning_points = detail::all_turning_points(v, energy);
  if (t.turning_points.size() != 6) throw TopologyError("triple-well orbit: expected six turning points");
  t.sequence = {4};
  for (int k = 0; k < w_r; ++k) t.sequence.insert(t.sequence.end(), {5, 4});
  t.sequence.insert(t.sequence.end(), {3, 2});
  for (int k = 0; k < w_m; ++k) t.sequence.insert(t.sequence.end(), {3, 2});
  t.sequence.push_back(1);
  detail::build_legs(v, t);
  t.maslov = w_r + w_m + 3;
  return t;
}

// Pendulum above the separatrix: w_r rotations, w_c loops across Re q = pi,
// and half a loop (reversing the rotation) when eta = -1.
inline OrbitTopology pendulum_topology(const Potential& v, double energy, int w_r, int w_c, int eta) {
  if (v.kind() != PotentialKind::pendulum) throw TopologyError("pendulum orbit: needs the pendulum");
  if (w_r < 0 || w_c < 0) throw TopologyError("orbit topology: winding numbers must be non-negative");
  if (eta != 1 && eta != -1) throw TopologyError("orbit topology: eta must be +1 or -1");
  if (!(energy > v.gamma())) throw TopologyError("pendulum orbit: energy must exceed the separatrix value");
  OrbitTopology t;
  t.family = OrbitFamily::pendulum;
  t.energy = energy;
  t.eta = eta;
  t.w_r = w_r;
  t.w_c = w_c;
  for (int k = 0; k < w_r; ++k) t.legs.push_back({LegKind::rotation});
  int crossings = 2 * w_c + (eta == -1 ? 1 : 0);
  if (crossings > 0) t.legs.push_back({LegKind::barrier, -1, -1, crossings});
  if (t.legs.empty()) throw TopologyError("pendulum orbit: empty topology");
  t.maslov = w_r + w_c + (1 - eta) / 2;
  return t;
}

struct LegValues {
  cplx duration;
  cplx action;
  double parameter_length;
};

namespace detail {

inline std::vector<double> turning_points_like(const Potential& v, const OrbitTopology& t, double energy) {
  if (energy == t.energy) return t.turning_points;
  auto tps = all_turning_points(v, energy);
  if (tps.size() != t.turning_points.size())
    throw TopologyError("orbit topology: turning-point structure changes at the shifted energy");
  return tps;
}

}  // namespace detail

// Time and action of every leg from the quadrature tables: an allowed leg
// spans half a loop (S/2 - E T/2), a forbidden leg adds i (S/2 + E T/2).
inline std::vector<LegValues> leg_values(const Potential& v, const OrbitTopology& t, double energy) {
  std::vector<LegValues> out;
  if (t.family == OrbitFamily::pendulum) {
    auto p = pendulum_actions(v.gamma(), energy);
    for (auto& leg : t.legs) {
      if (leg.kind == LegKind::rotation) {
        out.push_back({p.rotation_period, p.rotation_action - energy * p.rotation_period, p.rotation_period});
      } else {
        double f = 0.5 * leg.crossings;
        out.push_back({cplx(0, -f * p.barrier_period), cplx(0, f * (energy * p.barrier_period - p.barrier_action)),
                       f * p.barrier_period});
      }
    }
    return out;
  }
  auto tps = detail::turning_points_like(v, t, energy);
  for (auto& leg : t.legs) {
    double lo = std::min(tps[leg.from], tps[leg.to]), hi = std::max(tps[leg.from], tps[leg.to]);
    bool allowed = leg.kind == LegKind::allowed;
    auto r = detail::region_integrals(v, energy, lo, hi, allowed, true, true, Traversals::once);
    if (allowed)
      out.push_back({r.period, r.action - energy * r.period, r.period});
    else
      out.push_back({cplx(0, -r.period), cplx(0, r.action + energy * r.period), r.period});
  }
  return out;
}

struct OrbitComposition {
  cplx period, action;
};

// Period and action from the primitive orbits and winding numbers.
inline OrbitComposition orbit_composition(const Potential& v, const OrbitTopology& t, double energy) {
  const cplx i(0, 1);
  switch (t.family) {
    case OrbitFamily::double_well: {
      auto tab = double_well_table(v, energy);
      auto& r = tab[OrbitKind::r];
      auto& c = tab[OrbitKind::c];
      double sr = r.action - energy * r.period, sc = c.action + energy * c.period;
      double wc = t.w_c + (1 - t.eta) / 4.0;
      return {t.w_r * r.period - i * wc * c.period, t.w_r * sr + i * wc * sc};
    }
    case OrbitFamily::triple_well: {
      auto tab = triple_well_table(v, energy);
      auto& r = tab[OrbitKind::r];
      auto& m = tab[OrbitKind::m];
      auto& c = tab[OrbitKind::c];
      double sr = r.action - energy * r.period, sm = m.action - energy * m.period;
      double sc = c.action + energy * c.period;
      double wm = t.w_m + 0.5;
      return {t.w_r * r.period + wm * m.period - i * c.period, t.w_r * sr + wm * sm + i * sc};
    }
    case OrbitFamily::pendulum: {
      auto p = pendulum_actions(v.gamma(), energy);
      double wc = t.w_c + (1 - t.eta) / 4.0;
      return {t.w_r * p.rotation_period - i * wc * p.barrier_period,
              t.w_r * (p.rotation_action - energy * p.rotation_period) +
                  i * wc * (energy * p.barrier_period - p.barrier_action)};
    }
    case OrbitFamily::generic: break;
  }
  OrbitComposition out{0, 0};
  for (auto& l : leg_values(v, t, energy)) {
    out.period += l.duration;
    out.action += l.action;
  }
  return out;
}

inline cplx orbit_period(const OrbitTopology& t, const Potential& v) { return orbit_composition(v, t, t.energy).period; }
inline cplx orbit_period(const OrbitTopology& t, const Potential& v, double energy) {
  return orbit_composition(v, t, energy).period;
}

struct RealQOrbit {
  OrbitTopology topology;
  Trajectory trajectory;
  ComplexTimePath path;
  ComplexState start, end;
  cplx total_time, action;
  cplx expected_time, expected_action;
  double closure_residual = 0;
  double period_residual = 0;
  double action_residual = 0;
  double determinant_residual = 0;
  double reality_residual = 0;
  double max_drift = 0;
  int steps_per_leg = 0;
};

namespace detail {

struct LegRun {
  Flow end;
  double duration;
  std::vector<Sample> samples;
};

// Integrates one leg until its event function has changed sign `crossings`
// times, then locates the last crossing inside the final step.
template <class Event>
LegRun run_leg(const Potential& v, const Flow& start, cplx c, double expected, int crossings, int n, Event g,
               double s0, cplx t0) {
  double h = expected / n;
  LegRun run;
  Flow y = start;
  double s = 0, prev = 0;
  int seen = 0;
  run.samples.push_back({s0, t0, y[0], y[1], y[2]});
  for (int k = 0; k < 4 * n; ++k) {
    Flow next = rk4(v, y, h, c);
    double gn = g(next);
    if (k > 0 && (prev < 0) != (gn < 0) && gn != prev) {
      if (++seen == crossings) {
        auto f = [&](double th) { return g(rk4(v, y, th * h, c)); };
        double th = bracketed_root(f, 0.0, 1.0, 1e-15);
        run.end = rk4(v, y, th * h, c);
        run.duration = s + th * h;
        run.samples.push_back({s0 + run.duration, t0 + c * run.duration, run.end[0], run.end[1], run.end[2]});
        return run;
      }
    }
    y = next;
    s += h;
    prev = gn;
    run.samples.push_back({s0 + s, t0 + c * s, y[0], y[1], y[2]});
  }
  throw IntegrationAccuracy("orbit leg: turning-point event not reached");
}

inline LegRun integrate_leg(const Potential& v, const Flow& start, const Leg& leg, double expected, int n,
                            double s0, cplx t0) {
  switch (leg.kind) {
    case LegKind::allowed:
      return run_leg(v, start, 1.0, expected, 1, n, [](const Flow& y) { return y[1].real(); }, s0, t0);
    case LegKind::forbidden:
      return run_leg(v, start, cplx(0, -1), expected, 1, n, [](const Flow& y) { return y[1].imag(); }, s0, t0);
    case LegKind::rotation: {
      double from = start[0].real();
      return run_leg(v, start, 1.0, expected, 1, n,
                     [from](const Flow& y) { return std::sin(0.5 * (y[0].real() - from)); }, s0, t0);
    }
    case LegKind::barrier:
      return run_leg(v, start, cplx(0, -1), expected, leg.crossings, n,
                     [](const Flow& y) { return y[0].imag(); }, s0, t0);
  }
  throw ContractViolation("unknown leg kind");
}

struct OrbitRun {
  Flow end;
  std::vector<double> durations;
  Trajectory trajectory;
  double reality = 0;
};

inline OrbitRun run_orbit(const Potential& v, const OrbitTopology& t, const std::vector<LegValues>& expected,
                          int n) {
  OrbitRun out;
  Flow y = start_flow(t.start(v));
  double s = 0;
  cplx time = 0;
  out.trajectory.samples.push_back({0, 0, y[0], y[1], 0});
  for (std::size_t i = 0; i < t.legs.size(); ++i) {
    auto& leg = t.legs[i];
    auto run = integrate_leg(v, y, leg, expected[i].parameter_length, n, s, time);
    cplx c = (leg.kind == LegKind::allowed || leg.kind == LegKind::rotation) ? cplx(1, 0) : cplx(0, -1);
    for (std::size_t k = 1; k < run.samples.size(); ++k) {
      auto& smp = run.samples[k];
      out.trajectory.samples.push_back(smp);
      if (leg.kind == LegKind::forbidden)
        out.reality = std::max({out.reality, std::abs(smp.p.real()), std::abs(smp.q.imag())});
      else if (leg.kind == LegKind::barrier)
        out.reality = std::max({out.reality, std::abs(smp.p.imag()), std::abs(std::remainder(smp.q.real() - std::numbers::pi, 2 * std::numbers::pi))});
      else
        out.reality = std::max({out.reality, std::abs(smp.p.imag()), std::abs(smp.q.imag())});
    }
    y = run.end;
    s += run.duration;
    time += c * run.duration;
    out.durations.push_back(run.duration);
  }
  out.end = y;
  out.trajectory.monodromy = tangent(y);
  out.trajectory.steps_per_segment = n;
  return out;
}

inline double phase_distance(const Potential& v, ComplexState a, ComplexState b) {
  cplx dq = a.q - b.q;
  if (v.topology() == Topology::circle) {
    double two_pi = 2 * std::numbers::pi;
    dq = cplx(std::remainder(dq.real(), two_pi), dq.imag());
  }
  return std::sqrt(std::norm(dq) + std::norm(a.p - b.p));
}

}  // namespace detail

// Real-q orbit for the given topology: real-time legs in the allowed region,
// imaginary-time legs under the barrier, joined at turning-point events. The
// step count per leg is doubled until the endpoint and leg times settle.
inline RealQOrbit build_real_q_orbit(const Potential& v, const OrbitTopology& t, int initial_steps = 2000) {
  require(initial_steps >= 16, "build_real_q_orbit: need at least 16 steps per leg");
  auto expected = leg_values(v, t, t.energy);
  detail::OrbitRun prev = detail::run_orbit(v, t, expected, initial_steps);
  int n = initial_steps;
  for (;;) {
    if (2 * n > detail::max_steps) throw IntegrationAccuracy("build_real_q_orbit: step refinement did not converge");
    n *= 2;
    auto next = detail::run_orbit(v, t, expected, n);
    double change = 0, scale = 1;
    for (int i = 0; i < 3; ++i) {
      change = std::max(change, std::abs(next.end[i] - prev.end[i]));
      scale = std::max(scale, std::abs(next.end[i]));
    }
    for (std::size_t i = 0; i < next.durations.size(); ++i) {
      change = std::max(change, std::abs(next.durations[i] - prev.durations[i]));
      scale = std::max(scale, next.durations[i]);
    }
    prev = std::move(next);
    if (change <= 1e-12 * scale) break;
  }

  RealQOrbit o;
  o.topology = t;
  o.steps_per_leg = n;
  o.trajectory = std::move(prev.trajectory);
  o.start = t.start(v);
  o.end = {prev.end[0], prev.end[1]};
  o.action = prev.end[2];
  for (std::size_t i = 0; i < t.legs.size(); ++i) {
    bool real = t.legs[i].kind == LegKind::allowed || t.legs[i].kind == LegKind::rotation;
    o.path.then(real ? Direction::real : Direction::imaginary, prev.durations[i]);
  }
  o.total_time = o.path.total();
  auto comp = orbit_composition(v, t, t.energy);
  o.expected_time = comp.period;
  o.expected_action = comp.action;
  ComplexState target = t.eta == 1 ? o.start : ComplexState{-o.start.q, -o.start.p};
  o.closure_residual = detail::phase_distance(v, o.end, target);
  o.period_residual = std::abs(o.total_time - comp.period);
  o.action_residual = std::abs(o.action - comp.action);
  o.determinant_residual = std::abs(o.trajectory.monodromy.determinant() - 1.0);
  o.reality_residual = prev.reality;
  cplx h0 = 0.5 * o.start.p * o.start.p + v.eval(o.start.q, 0);
  for (auto& smp : o.trajectory.samples)
    o.max_drift = std::max(o.max_drift, std::abs(0.5 * smp.p * smp.p + v.eval(smp.q, 0) - h0));
  o.trajectory.max_drift = o.max_drift;
  return o;
}

// Tangent map of the real flow over `period` from a phase-space point.
inline Eigen::Matrix2d monodromy(const Potential& v, ComplexState start, double period, int steps = 20000) {
  require(period > 0, "monodromy: period must be positive");
  ComplexTimePath path;
  path.then(Direction::real, period);
  auto tr = integrate_complex(v, start, path, steps);
  Eigen::Matrix2d m = tr.monodromy.real();
  if ((tr.monodromy.imag().array().abs() > 1e-12).any())
    throw ContractViolation("monodromy: orbit is not real");
  return m;
}

inline cplx equilibrium_contribution(double energy, cplx lambda, cplx t, int eta, double hbar) {
  require(eta == 1 || eta == -1, "equilibrium_contribution: eta must be +1 or -1");
  require(hbar > 0, "equilibrium_contribution: hbar must be positive");
  cplx a = std::exp(0.5 * lambda * t), b = std::exp(-0.5 * lambda * t);
  cplx den = a - double(eta) * b;
  if (std::abs(den) <= 1e-12 * std::max(std::abs(a), std::abs(b)))
    throw NongenericTime("equilibrium_contribution: denominator vanishes at this T");
  return std::exp(cplx(0, -1) * energy * t / hbar) / den;
}

// Sum over the stable equilibria (local minima) of a potential on the line.
inline cplx equilibrium_trace(const Potential& v, cplx t, double hbar, int eta = 1) {
  require(v.topology() == Topology::line, "equilibrium_trace: needs a potential on the line");
  double r = detail::confining_radius(v, v(0) + 1);
  cplx sum = 0;
  for (double q : critical_points(v, -r, r)) {
    if (eta == -1 && std::abs(q) > 1e-9) continue;
    double d2 = v.eval(q, 2);
    if (d2 <= 0) continue;
    sum += equilibrium_contribution(v(q), cplx(0, std::sqrt(d2)), t, eta, hbar);
  }
  return sum;
}

// Contribution of a family of orbits with the given branch times; an empty
// list means sum T_beta = 2T for eta = -1 and T for eta = +1.
inline cplx orbit_contribution(const OrbitTopology& t, const Potential& v, double hbar,
                               const std::vector<cplx>& branch_times = {}) {
  require(hbar > 0, "orbit_contribution: hbar must be positive");
  auto comp = orbit_composition(v, t, t.energy);
  double h = 1e-5 * std::max(std::abs(t.energy), 1e-3);
  cplx dtde = (orbit_period(t, v, t.energy + h) - orbit_period(t, v, t.energy - h)) / (2 * h);
  if (!(std::abs(dtde) > 1e-300) || !std::isfinite(std::abs(dtde)))
    throw CausticError("orbit_contribution: dT/dE vanishes");
  cplx sum_t = 0;
  if (branch_times.empty())
    sum_t = (t.eta == -1 ? 2.0 : 1.0) * comp.period;
  else
    for (cplx b : branch_times) sum_t += b;
  double sign = t.maslov % 2 == 0 ? 1.0 : -1.0;
  cplx root = std::sqrt(cplx(0, -2.0 * t.eta * std::numbers::pi * hbar));
  return sign * sum_t / root * std::sqrt(1.0 / dtde) * std::exp(cplx(0, 1) * comp.action / hbar);
}

// Ground splitting rebuilt from the semiclassical traces of S U and U at the
// complex time of the given eta = -1 double-well orbit.
inline SplittingEstimate rebuilt_ground_splitting(const Potential& v, const OrbitTopology& t, double hbar) {
  require(t.eta == -1, "rebuilt_ground_splitting: needs a parity-changing orbit");
  cplx period = orbit_period(t, v);
  cplx tsu = orbit_contribution(t, v, hbar);
  cplx tu = equilibrium_trace(v, period, hbar, 1);
  cplx d = 2 * hbar / (cplx(0, 1) * period) * tsu / tu;
  SplittingEstimate est;
  est.method = Method::orbit_rebuild;
  est.hbar = hbar;
  est.value = std::abs(d);
  est.diagnostics["re"] = d.real();
  est.diagnostics["im"] = d.imag();
  est.diagnostics["energy"] = t.energy;
  est.diagnostics["T_re"] = period.real();
  est.diagnostics["T_im"] = period.imag();
  return est;
}

}  // namespace tunnel
