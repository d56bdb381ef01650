#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <vector>

#include "tunnel/elliptic.hpp"
#include "tunnel/errors.hpp"
#include "tunnel/estimate.hpp"
#include "tunnel/potential.hpp"
#include "tunnel/quadrature.hpp"
#include "tunnel/roots.hpp"

namespace tunnel {

enum class OrbitKind { r, c, m, l, island_c };

inline const char* to_string(OrbitKind k) {
  switch (k) {
    case OrbitKind::r: return "r";
    case OrbitKind::c: return "c";
    case OrbitKind::m: return "m";
    case OrbitKind::l: return "l";
    case OrbitKind::island_c: return "island_c";
  }
  return "unknown";
}

// How many times the interval between the endpoints is swept.
enum class Traversals { once = 1, loop = 2, double_loop = 4 };

struct LoopIntegrals {
  double action;
  double period;
};

struct PrimitiveAction {
  OrbitKind kind;
  double energy;
  double action;
  double period;
  double q_lo, q_hi;
};

struct ActionTable {
  double energy = 0;
  std::vector<PrimitiveAction> orbits;

  bool has(OrbitKind k) const {
    return std::any_of(orbits.begin(), orbits.end(), [k](auto& o) { return o.kind == k; });
  }
  const PrimitiveAction& operator[](OrbitKind k) const {
    for (auto& o : orbits)
      if (o.kind == k) return o;
    throw ContractViolation(std::string("action table has no orbit ") + to_string(k));
  }
};

namespace detail {

inline constexpr double taylor_window = 1e-4;

// E - V(end + s d) from the derivatives at the endpoint.
template <class P>
double gap_near(const P& v, double energy, double end, double d, double s) {
  double x = s * d;
  double v1 = v.eval(end, 1), v2 = v.eval(end, 2), v3 = v.eval(end, 3), v4 = v.eval(end, 4);
  return (energy - v.eval(end, 0)) - x * (v1 + x * (v2 / 2 + x * (v3 / 6 + x * v4 / 24)));
}

template <class P>
LoopIntegrals region_integrals(const P& v, double energy, double lo, double hi, bool allowed,
                               bool lo_turns, bool hi_turns, Traversals t, bool with_period = true) {
  double sign = allowed ? 1.0 : -1.0, width = hi - lo;
  auto gap = [&](double q, double to_lo, double to_hi) {
    double g;
    if (lo_turns && to_lo < taylor_window * width)
      g = gap_near(v, energy, lo, to_lo, 1.0);
    else if (hi_turns && to_hi < taylor_window * width)
      g = gap_near(v, energy, hi, to_hi, -1.0);
    else
      g = energy - v.eval(q, 0);
    return std::max(0.0, sign * g);
  };
  auto action = integrate_sine(
      [&](double q, double a, double b, double jac) { return std::sqrt(2 * gap(q, a, b)) * jac; }, lo, hi);
  if (!with_period) return {double(static_cast<int>(t)) * action.value, std::numeric_limits<double>::quiet_NaN()};
  auto period = integrate_sine(
      [&](double q, double a, double b, double jac) {
        double g = gap(q, a, b);
        return g > 0 ? jac / std::sqrt(2 * g) : 0.0;
      },
      lo, hi);
  double m = double(static_cast<int>(t));
  return {m * action.value, m * period.value};
}

inline bool is_turning_point(const Potential& v, double energy, double q) {
  return std::abs(v(q) - energy) <= 1e-8 * std::max(1.0, std::abs(energy));
}

inline LoopIntegrals checked_region(const Potential& v, double energy, double lo, double hi, bool allowed,
                                    Traversals t) {
  require(std::isfinite(energy) && std::isfinite(lo) && std::isfinite(hi) && lo < hi,
          "action integral: bad interval");
  bool full_circle = v.topology() == Topology::circle &&
                     std::abs((hi - lo) - 2 * std::numbers::pi) < 1e-12;
  bool lo_turns = is_turning_point(v, energy, lo), hi_turns = is_turning_point(v, energy, hi);
  if (!full_circle) {
    require(lo_turns || (v.symmetric() && lo == 0.0), "action integral: lower endpoint is not a turning point");
    require(hi_turns || (v.symmetric() && hi == 0.0), "action integral: upper endpoint is not a turning point");
  }
  if (lo_turns && std::abs(v.eval(lo, 1)) <= 1e-9 * std::max(1.0, std::abs(v.eval(lo, 2))))
    throw DegenerateTurningPoint("action integral: energy at a critical value of V");
  if (hi_turns && std::abs(v.eval(hi, 1)) <= 1e-9 * std::max(1.0, std::abs(v.eval(hi, 2))))
    throw DegenerateTurningPoint("action integral: energy at a critical value of V");
  double mid = v(0.5 * (lo + hi));
  require(allowed ? mid < energy : mid > energy, "action integral: interval is in the wrong region");
  return region_integrals(v, energy, lo, hi, allowed, lo_turns, hi_turns, t);
}

}  // namespace detail

// Reduced action and period over a classically allowed interval.
inline LoopIntegrals action_allowed(const Potential& v, double energy, double lo, double hi,
                                    Traversals t = Traversals::loop) {
  return detail::checked_region(v, energy, lo, hi, true, t);
}

inline LoopIntegrals action_forbidden(const Potential& v, double energy, double lo, double hi,
                                      Traversals t = Traversals::loop) {
  return detail::checked_region(v, energy, lo, hi, false, t);
}

// Pendulum above the separatrix: rotation r on the real circle and the
// barrier loop c, which lives on Re q = pi where V = gamma cosh(Im q).
struct PendulumActions {
  double rotation_action, rotation_period;
  double barrier_action, barrier_period;
};

inline PendulumActions pendulum_actions(double gamma, double energy) {
  require(gamma > 0, "pendulum_actions: gamma must be positive");
  if (!(energy > gamma)) throw AboveBarrier("pendulum_actions: energy must exceed the separatrix value");
  double s = energy + gamma;
  double kr = std::sqrt(2 * gamma / s), kc = std::sqrt((energy - gamma) / s);
  PendulumActions out;
  out.rotation_action = 4 * std::sqrt(2 * s) * elliptic_E(kr);
  out.rotation_period = 2 * std::numbers::sqrt2 / std::sqrt(s) * elliptic_K(kr);
  double kk = elliptic_K(kc), ee = elliptic_E(kc);
  out.barrier_action = 8 * std::sqrt(2 * s) * (kk - ee);
  out.barrier_period = 4 * std::numbers::sqrt2 / std::sqrt(s) * kk;
  return out;
}

namespace detail {

struct CoshWell {
  double gamma;
  double eval(double y, int order) const { return order % 2 == 0 ? gamma * std::cosh(y) : gamma * std::sinh(y); }
};

}  // namespace detail

// Same quantities by direct quadrature, as an independent check.
inline PendulumActions pendulum_actions_quadrature(double gamma, double energy) {
  require(gamma > 0, "pendulum_actions: gamma must be positive");
  if (!(energy > gamma)) throw AboveBarrier("pendulum_actions: energy must exceed the separatrix value");
  auto pend = Potential::pendulum(gamma);
  auto r = action_allowed(pend, energy, -std::numbers::pi, std::numbers::pi, Traversals::once);
  double yt = std::acosh(energy / gamma);
  auto c = detail::region_integrals(detail::CoshWell{gamma}, energy, -yt, yt, true, true, true, Traversals::loop);
  return {r.action, r.period, c.action, c.period};
}

// Region a quantized torus lives in.
struct WellRegion {
  enum class Kind { libration, rotation };
  Kind kind = Kind::libration;
  double center = 0;

  static WellRegion around(double minimum) { return {Kind::libration, minimum}; }
  static WellRegion rotation() { return {Kind::rotation, 0}; }
};

struct WellBounds {
  std::optional<double> left_max, right_max;
  double top = std::numeric_limits<double>::infinity();
};

inline WellBounds well_bounds(const Potential& v, double center) {
  require(v.topology() == Topology::line, "well_bounds: needs a potential on the line");
  require(v.eval(center, 2) > 0, "well_bounds: center is not a minimum");
  double r = 1;
  while (v(center + r) < v(center) + 1 && v(center - r) < v(center) + 1 && r < 1e6) r *= 2;
  r *= 4;
  WellBounds b;
  for (double c : critical_points(v, center - r, center + r)) {
    if (std::abs(c - center) < 1e-9 * std::max(1.0, std::abs(center))) continue;
    if (v.eval(c, 2) >= 0) continue;
    if (c < center && (!b.left_max || c > *b.left_max)) b.left_max = c;
    if (c > center && (!b.right_max || c < *b.right_max)) b.right_max = c;
  }
  if (b.left_max) b.top = std::min(b.top, v(*b.left_max));
  if (b.right_max) b.top = std::min(b.top, v(*b.right_max));
  return b;
}

namespace detail {

inline double outward_turning_point(const Potential& v, double energy, double center, std::optional<double> wall,
                                    double direction) {
  auto f = [&](double q) { return v(q) - energy; };
  double far;
  if (wall && v(*wall) > energy) {
    far = *wall;
  } else {
    double step = 1;
    far = center + direction * step;
    while (f(far) <= 0) {
      step *= 2;
      far = center + direction * step;
      require(step < 1e6, "turning point search: potential does not confine");
    }
  }
  return direction > 0 ? bracketed_root(f, center, far, 1e-15) : bracketed_root(f, far, center, 1e-15);
}

inline double root_radius(const std::vector<double>& c) {
  double lead = c.back(), r = 0;
  int n = int(c.size()) - 1;
  for (int k = 1; k <= n; ++k) r = std::max(r, std::pow(std::abs(c[n - k] / lead), 1.0 / k));
  return 2 * r;
}

// Radius enclosing every real root of V - E and of V'.
inline double confining_radius(const Potential& v, double energy) {
  require(v.is_polynomial() && v.coefficients().size() >= 3, "confining radius needs a polynomial potential");
  require(v.coefficients().back() > 0 && v.coefficients().size() % 2 == 1,
          "potential must confine: even degree and positive leading coefficient");
  auto c = v.coefficients();
  c[0] -= energy;
  return 1.01 * std::max({root_radius(c), root_radius(derivative(v.coefficients())), 1e-3});
}

}  // namespace detail

// Turning points of the torus at the given energy around a minimum.
inline std::pair<double, double> well_turning_points(const Potential& v, double energy, double center) {
  auto b = well_bounds(v, center);
  require(energy > v(center), "well_turning_points: energy below the well bottom");
  if (!(energy < b.top)) throw AboveBarrier("well_turning_points: energy above the barrier top");
  return {detail::outward_turning_point(v, energy, center, b.left_max, -1),
          detail::outward_turning_point(v, energy, center, b.right_max, +1)};
}

inline LoopIntegrals torus_action(const Potential& v, const WellRegion& well, double energy,
                                  bool with_period = true) {
  if (well.kind == WellRegion::Kind::rotation) {
    require(v.kind() == PotentialKind::pendulum, "rotational tori need the pendulum");
    auto p = pendulum_actions(v.gamma(), energy);
    return {p.rotation_action, p.rotation_period};
  }
  auto [lo, hi] = well_turning_points(v, energy, well.center);
  return detail::region_integrals(v, energy, lo, hi, true, true, true, Traversals::loop, with_period);
}

// Torus energy with S(E) = (n + 1/2) 2 pi hbar for librations and
// S(E) = 2 pi hbar n for pendulum rotations.
inline double ebk_energy(const Potential& v, const WellRegion& well, int n, double hbar) {
  require(n >= 0 && hbar > 0, "ebk_energy: need n >= 0 and hbar > 0");
  if (well.kind == WellRegion::Kind::rotation) {
    require(n >= 1, "ebk_energy: rotational quantum number must be at least 1");
    double gamma = v.gamma(), target = 2 * std::numbers::pi * hbar * n;
    if (!(target > 8 * std::sqrt(gamma)))
      throw AboveBarrier("ebk_energy: rotational level lies below the separatrix");
    auto f = [&](double e) { return pendulum_actions(gamma, e).rotation_action - target; };
    double lo = gamma * (1 + 1e-12), hi = 2 * gamma + target * target;
    while (f(hi) < 0) hi *= 2;
    return bracketed_root(f, lo, hi, 1e-15 * hi);
  }
  auto b = well_bounds(v, well.center);
  double bottom = v(well.center), target = (n + 0.5) * 2 * std::numbers::pi * hbar;
  auto f = [&](double e) { return torus_action(v, well, e, false).action - target; };
  double hi = std::isfinite(b.top) ? b.top - 1e-9 * std::max(1.0, std::abs(b.top)) : bottom + 1;
  if (!std::isfinite(b.top))
    while (f(hi) < 0) hi = bottom + 2 * (hi - bottom);
  if (f(hi) < 0) throw AboveBarrier("ebk_energy: no quantized torus below the barrier top");
  double scale = std::max(1.0, std::abs(hi));
  double lo = bottom + 1e-3 * (hi - bottom);
  while (f(lo) > 0) lo = bottom + 1e-3 * (lo - bottom);
  return bracketed_root(f, lo, hi, 1e-12 * scale);
}

// Double well: lateral r (right well), its mirror l, and the barrier loop c
// across [-q_r, q_r] (four times the half-barrier integral).
inline ActionTable double_well_table(const Potential& v, double energy) {
  require(v.symmetric() && v.topology() == Topology::line, "double_well_table: needs a symmetric double well");
  if (!(v(0) > energy)) throw AboveBarrier("double_well_table: energy must lie below the central barrier");
  auto tp = turning_points(v, energy, 0, detail::confining_radius(v, energy));
  require(tp.size() == 2, "double_well_table: expected two positive turning points");
  double qr = tp[0].q, qr2 = tp[1].q;
  ActionTable t;
  t.energy = energy;
  auto r = detail::region_integrals(v, energy, qr, qr2, true, true, true, Traversals::loop);
  auto c = detail::region_integrals(v, energy, -qr, qr, false, true, true, Traversals::loop);
  t.orbits.push_back({OrbitKind::r, energy, r.action, r.period, qr, qr2});
  t.orbits.push_back({OrbitKind::l, energy, r.action, r.period, -qr2, -qr});
  t.orbits.push_back({OrbitKind::c, energy, c.action, c.period, -qr, qr});
  return t;
}

// Triple well with positive turning points q_r < q_r' < q_r'': central m over
// [-q_r, q_r], barrier c over [q_r, q_r'], lateral r over [q_r', q_r''].
inline ActionTable triple_well_table(const Potential& v, double energy) {
  require(v.symmetric() && v.topology() == Topology::line, "triple_well_table: needs a symmetric potential");
  auto tp = turning_points(v, energy, 0, detail::confining_radius(v, energy));
  if (tp.size() != 3) throw AboveBarrier("triple_well_table: need three positive turning points");
  double q0 = tp[0].q, q1 = tp[1].q, q2 = tp[2].q;
  auto m = detail::region_integrals(v, energy, -q0, q0, true, true, true, Traversals::loop);
  auto c = detail::region_integrals(v, energy, q0, q1, false, true, true, Traversals::loop);
  auto r = detail::region_integrals(v, energy, q1, q2, true, true, true, Traversals::loop);
  ActionTable t;
  t.energy = energy;
  t.orbits.push_back({OrbitKind::m, energy, m.action, m.period, -q0, q0});
  t.orbits.push_back({OrbitKind::c, energy, c.action, c.period, q0, q1});
  t.orbits.push_back({OrbitKind::r, energy, r.action, r.period, q1, q2});
  t.orbits.push_back({OrbitKind::l, energy, r.action, r.period, -q2, -q1});
  return t;
}

inline ActionTable pendulum_table(const Potential& v, double energy) {
  require(v.kind() == PotentialKind::pendulum, "pendulum_table: needs the pendulum");
  auto p = pendulum_actions(v.gamma(), energy);
  ActionTable t;
  t.energy = energy;
  t.orbits.push_back({OrbitKind::r, energy, p.rotation_action, p.rotation_period, -std::numbers::pi, std::numbers::pi});
  t.orbits.push_back({OrbitKind::l, energy, p.rotation_action, p.rotation_period, -std::numbers::pi, std::numbers::pi});
  double yt = std::acosh(energy / v.gamma());
  t.orbits.push_back({OrbitKind::c, energy, p.barrier_action, p.barrier_period, -yt, yt});
  return t;
}

struct AsymptoticConstants {
  double A = 0, B = 0, omega = 0, a = 0;
  double barrier_action_at_zero = 0;
};

inline double positive_minimum(const Potential& v) {
  double r = 1;
  while (v(r) <= v(0) && r < 1e6) r *= 2;
  double best = std::numeric_limits<double>::quiet_NaN();
  for (double c : critical_points(v, 1e-9, 4 * r))
    if (v.eval(c, 2) > 0 && (std::isnan(best) || v(c) < v(best))) best = c;
  require(!std::isnan(best), "positive_minimum: no minimum at q > 0");
  return best;
}

inline AsymptoticConstants asymptotic_constants(const Potential& v) {
  require(v.symmetric() && v.topology() == Topology::line, "asymptotic_constants: needs a symmetric double well");
  double a = positive_minimum(v);
  double scale = std::max({1.0, std::abs(v(0)), std::abs(v.eval(a, 2))});
  require(std::abs(v(a)) <= 1e-12 * scale, "asymptotic_constants: minima must sit at V = 0");
  AsymptoticConstants c;
  c.a = a;
  c.omega = harmonic_frequency(v, a);
  double w = c.omega, w2 = w * w, v3 = v.eval(a, 3), v4 = v.eval(a, 4);
  auto integrand = [&](double q) {
    double x = a - q;
    if (x < 1e-3 * a) {
      double u = -(v3 / (3 * w2)) * x + (v4 / (12 * w2)) * x * x;
      return std::expm1(-0.5 * std::log1p(u)) / x;
    }
    return w / std::sqrt(2 * v(q)) - 1 / x;
  };
  c.A = integrate(integrand, 0, a, 1e-13, 1e-15).value;
  c.B = std::numbers::pi / (24 * std::pow(w, 7)) * (5 * v3 * v3 - 3 * w2 * v4);
  c.barrier_action_at_zero =
      2 * integrate([&](double q) { return std::sqrt(2 * std::max(0.0, v(q))); }, -a, a, 1e-13).value;
  return c;
}

struct AsymptoticActions {
  double barrier, lateral;
};

inline AsymptoticActions asymptotic_actions(const AsymptoticConstants& c, double energy) {
  require(energy > 0, "asymptotic_actions: energy must be positive");
  double w = c.omega;
  return {c.barrier_action_at_zero + 4 * energy / w * std::log(std::sqrt(2 * energy) / (2 * c.a * w)) -
              2 * (2 * c.A + 1) * energy / w,
          2 * std::numbers::pi * energy / w + c.B * energy * energy};
}

inline double energy_from_imaginary_time(const AsymptoticConstants& c, double im_t) {
  require(im_t < 0, "energy_from_imaginary_time: Im T must be negative");
  return 2 * c.a * c.a * c.omega * c.omega * std::exp(2 * c.A) * std::exp(c.omega * im_t);
}

namespace detail {

inline SplittingEstimate estimate(Method m, double value, double hbar, int level) {
  SplittingEstimate e;
  e.method = m;
  e.value = value;
  e.hbar = hbar;
  e.level = level;
  return e;
}

}  // namespace detail

// Ground doublet: hbar w / sqrt(pi) exp(-S_c(hbar w / 2) / 2 hbar) and its
// small-energy expansion 2 a w sqrt(e hbar w / pi) e^A exp(-S_c(0) / 2 hbar).
inline SplittingEstimate splitting_ground_instanton(const Potential& v, double hbar) {
  require(hbar > 0, "splitting_ground_instanton: hbar must be positive");
  auto c = asymptotic_constants(v);
  double w = c.omega, e = 0.5 * hbar * w;
  double sc = double_well_table(v, e)[OrbitKind::c].action;
  double log_first = std::log(hbar * w / std::sqrt(std::numbers::pi)) - sc / (2 * hbar);
  double log_second = std::log(2 * c.a * w * std::sqrt(std::numbers::e * hbar * w / std::numbers::pi)) + c.A -
                      c.barrier_action_at_zero / (2 * hbar);
  double lambda = -sc / (2 * hbar) + std::log(hbar * w / std::numbers::pi);
  auto est = detail::estimate(Method::instanton_ground, std::exp(log_first), hbar, 0);
  est.diagnostics["energy"] = e;
  est.diagnostics["barrier_action"] = sc;
  est.diagnostics["log_value"] = log_first;
  est.diagnostics["expanded_value"] = std::exp(log_second);
  est.diagnostics["form_difference"] = std::expm1(log_second - log_first);
  est.diagnostics["lambda"] = lambda;
  est.diagnostics["log_minus_lambda"] = log_first - lambda;
  est.diagnostics["without_sqrt_e"] = std::exp(log_first - 0.5);
  return est;
}

enum class EnergyRule { ebk, harmonic };

// Excited doublet: 2 hbar / T_r(E_n) exp(-S_c(E_n) / 2 hbar). The harmonic
// rule uses E_n = (n + 1/2) hbar w and T_r = 2 pi / w.
inline SplittingEstimate splitting_excited(const Potential& v, int n, double hbar, EnergyRule rule = EnergyRule::ebk) {
  require(n >= 0 && hbar > 0, "splitting_excited: need n >= 0 and hbar > 0");
  double energy, period, sc;
  if (v.kind() == PotentialKind::pendulum) {
    require(rule == EnergyRule::ebk, "splitting_excited: the pendulum uses rotational quantization");
    energy = ebk_energy(v, WellRegion::rotation(), n, hbar);
    auto p = pendulum_actions(v.gamma(), energy);
    period = p.rotation_period;
    sc = p.barrier_action;
  } else {
    double a = positive_minimum(v);
    if (rule == EnergyRule::ebk) {
      energy = ebk_energy(v, WellRegion::around(a), n, hbar);
      auto t = double_well_table(v, energy);
      period = t[OrbitKind::r].period;
      sc = t[OrbitKind::c].action;
    } else {
      double w = harmonic_frequency(v, a);
      energy = (n + 0.5) * hbar * w;
      if (!(energy < v(0))) throw AboveBarrier("splitting_excited: harmonic level above the barrier");
      period = 2 * std::numbers::pi / w;
      sc = double_well_table(v, energy)[OrbitKind::c].action;
    }
  }
  double log_value = std::log(2 * hbar / period) - sc / (2 * hbar);
  auto est = detail::estimate(Method::excited_semiclassical, std::exp(log_value), hbar, n);
  est.diagnostics["energy"] = energy;
  est.diagnostics["lateral_period"] = period;
  est.diagnostics["barrier_action"] = sc;
  est.diagnostics["log_value"] = log_value;
  if (v.kind() != PotentialKind::pendulum) {
    double w = harmonic_frequency(v, positive_minimum(v));
    est.diagnostics["lambda"] = -double_well_table(v, 0.5 * hbar * w)[OrbitKind::c].action / (2 * hbar) +
                                std::log(hbar * w / std::numbers::pi);
    est.diagnostics["log_minus_lambda"] = log_value - est.diagnostics["lambda"];
  }
  return est;
}

// Fast-rotation limit of the pendulum splitting, evaluated in logarithms.
inline SplittingEstimate pendulum_splitting_asymptotic(int n, double gamma, double hbar) {
  require(n >= 1 && gamma >= 0 && hbar > 0, "pendulum_splitting_asymptotic: need n >= 1, gamma >= 0, hbar > 0");
  auto est = detail::estimate(Method::pendulum_asymptotic, 0.0, hbar, n);
  est.diagnostics["energy"] = 0.5 * n * n * hbar * hbar;
  if (gamma == 0) {
    est.diagnostics["log_value"] = -std::numeric_limits<double>::infinity();
    return est;
  }
  double log_value = -std::log(std::numbers::pi) - (4.0 * n - 1) * std::log(double(n)) +
                     4.0 * n * (1 - std::numbers::ln2) + 2 * std::log(hbar) +
                     2.0 * n * (std::log(gamma) - 2 * std::log(hbar));
  est.value = std::exp(log_value);
  est.diagnostics["log_value"] = log_value;
  if (est.diagnostics["energy"] < 4 * gamma) est.warn("slow_rotation");
  return est;
}

struct ResonanceData {
  double energy;
  ActionTable table;
  double nu_r, nu_m;
};

inline ResonanceData resonance_data(const Potential& v, int n, double hbar) {
  require(v.kind() == PotentialKind::triple_well || v.symmetric(), "resonance_data: needs a symmetric triple well");
  double a = positive_minimum(v);
  double e = ebk_energy(v, WellRegion::around(a), n, hbar);
  auto t = triple_well_table(v, e);
  double twopih = 2 * std::numbers::pi * hbar;
  return {e, t, t[OrbitKind::r].action / twopih - 0.5, t[OrbitKind::m].action / twopih - 0.5};
}

struct LatticeOptions {
  double tolerance_fraction = 1.0 / 20;
  double tau = 0;
};

// Multiple passes through the central well, summed over all winding pairs
// (w_r, w_m) with w_r T_r + w_m T_m = Re T - tau - T_m / 2.
inline SplittingEstimate resonant_splitting_sum(const Potential& v, int n, double hbar, std::complex<double> t,
                                               LatticeOptions opt = {}) {
  require(std::abs(t) > 0, "resonant_splitting_sum: T must be nonzero");
  auto d = resonance_data(v, n, hbar);
  const auto& tab = d.table;
  double tr = tab[OrbitKind::r].period, tm = tab[OrbitKind::m].period;
  double sr = tab[OrbitKind::r].action, sm = tab[OrbitKind::m].action, sc = tab[OrbitKind::c].action;
  double reach = t.real() - opt.tau - 0.5 * tm, tol = opt.tolerance_fraction * tr;
  std::complex<double> sum = 0;
  int terms = 0;
  for (int wm = 0; wm * tm <= reach + tol; ++wm) {
    double rest = reach - wm * tm;
    int wr = int(std::lround(rest / tr));
    if (wr < 0 || std::abs(wr * tr - rest) >= tol) continue;
    sum += double(wr + 1) * std::exp(std::complex<double>(0, wr * (sr / hbar - std::numbers::pi) +
                                                                   wm * (sm / hbar - std::numbers::pi)));
    ++terms;
  }
  if (terms == 0) throw EmptyLatticeSum("resonant_splitting_sum: no winding pair matches Re T");
  std::complex<double> delta = 2 * hbar / t * std::exp(-sc / hbar) * sum;
  auto est = detail::estimate(Method::resonant_sum, std::abs(delta), hbar, n);
  est.diagnostics["energy"] = d.energy;
  est.diagnostics["terms"] = terms;
  est.diagnostics["re"] = delta.real();
  est.diagnostics["im"] = delta.imag();
  est.diagnostics["nu_r"] = d.nu_r;
  est.diagnostics["nu_m"] = d.nu_m;
  est.diagnostics["rotation_angle"] = -std::arg(t);
  return est;
}

// T = (K + 1/2) T_m - i T_c at the lateral torus energy.
inline std::complex<double> resonant_time(const Potential& v, int n, double hbar, int k) {
  auto d = resonance_data(v, n, hbar);
  return {(k + 0.5) * d.table[OrbitKind::m].period, -d.table[OrbitKind::c].period};
}

inline SplittingEstimate resonant_splitting_limit(const Potential& v, int n, double hbar, int m = 2, int r = 1) {
  require(m >= 1 && r >= 1 && std::gcd(m, r) == 1, "resonant_splitting_limit: m and r must be coprime");
  auto d = resonance_data(v, n, hbar);
  double s = std::sin(std::numbers::pi * (m * d.nu_r - r * d.nu_m));
  if (std::abs(s) < 1e-12) throw ResonanceSingularity("resonant_splitting_limit: exact resonance");
  double tr = d.table[OrbitKind::r].period, sc = d.table[OrbitKind::c].action;
  double log_value = std::log(hbar / tr) - sc / hbar - std::log(std::abs(s));
  auto est = detail::estimate(Method::resonant_limit, std::exp(log_value), hbar, n);
  est.diagnostics["energy"] = d.energy;
  est.diagnostics["nu_r"] = d.nu_r;
  est.diagnostics["nu_m"] = d.nu_m;
  est.diagnostics["sine"] = s;
  est.diagnostics["log_value"] = log_value;
  return est;
}

struct PeriodRatioReport {
  std::vector<double> energies, ratios;
  double max_deviation = 0;
  double spread = 0;
};

inline PeriodRatioReport period_ratio_check(const Potential& v, const std::vector<double>& energies,
                                            double expected = 2) {
  PeriodRatioReport rep;
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double e : energies) {
    auto t = triple_well_table(v, e);
    double ratio = t[OrbitKind::m].period / t[OrbitKind::r].period;
    rep.energies.push_back(e);
    rep.ratios.push_back(ratio);
    rep.max_deviation = std::max(rep.max_deviation, std::abs(ratio - expected));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  rep.spread = energies.empty() ? 0 : hi - lo;
  return rep;
}

struct EscapeOptions {
  double prefactor = 1;
  double center = 0;
};

// Decay out of the well around opt.center through the barrier on its right
// (and the mirror barrier when V is symmetric).
inline SplittingEstimate escape_rate_at(const Potential& v, double energy, double hbar, EscapeOptions opt = {}) {
  require(hbar > 0, "escape_rate: hbar must be positive");
  auto b = well_bounds(v, opt.center);
  if (!(energy < b.top)) throw AboveBarrier("escape_rate: energy above the barrier top");
  require(b.right_max.has_value(), "escape_rate: no barrier to the right of the well");
  auto [inner_l, inner_r] = well_turning_points(v, energy, opt.center);
  auto f = [&](double q) { return v(q) - energy; };
  double outer = *b.right_max, step = 1;
  while (f(outer) > 0) {
    outer = *b.right_max + step;
    step *= 2;
    require(step < 1e6, "escape_rate: barrier has no outer turning point");
  }
  double outer_r = bracketed_root(f, *b.right_max, outer, 1e-15);
  auto right = detail::region_integrals(v, energy, inner_r, outer_r, false, true, true, Traversals::loop);
  double log_rate = std::log(opt.prefactor / right.period) - right.action / hbar;
  auto est = detail::estimate(Method::escape_rate, 0, hbar, 0);
  est.diagnostics["energy"] = energy;
  est.diagnostics["barrier_action"] = right.action;
  est.diagnostics["barrier_period"] = right.period;
  est.diagnostics["inner_turning_point"] = inner_r;
  est.diagnostics["outer_turning_point"] = outer_r;
  if (v.symmetric() && opt.center == 0.0) {
    log_rate += std::numbers::ln2;
    est.diagnostics["barriers"] = 2;
  } else {
    est.diagnostics["barriers"] = 1;
    if (b.left_max) {
      double far = *b.left_max, s = 1;
      while (f(far) > 0 && s < 1e6) {
        far = *b.left_max - s;
        s *= 2;
      }
      if (f(far) <= 0) {
        double outer_l = bracketed_root(f, far, *b.left_max, 1e-15);
        auto left = detail::region_integrals(v, energy, outer_l, inner_l, false, true, true, Traversals::loop);
        est.diagnostics["left_barrier_action"] = left.action;
        if (left.action <= right.action) est.warn("left_barrier_dominates");
      }
    }
  }
  est.value = std::exp(log_rate);
  est.diagnostics["log_value"] = log_rate;
  return est;
}

inline SplittingEstimate escape_rate(const Potential& v, int n, double hbar, EscapeOptions opt = {}) {
  double e = ebk_energy(v, WellRegion::around(opt.center), n, hbar);
  auto est = escape_rate_at(v, e, hbar, opt);
  est.level = n;
  return est;
}

// Barrier action of a harmonic island of frequency w and phase-space area
// `area`, cut off sharply at its border.
inline double sharp_island_action(double energy, double omega, double area) {
  require(energy > 0 && omega > 0 && area > 0, "sharp_island_action: arguments must be positive");
  double a = omega * area / (2 * std::numbers::pi * energy);
  if (!(a > 1)) throw AboveBarrier("sharp_island_action: energy lies outside the island");
  double sa = std::sqrt(a), sb = std::sqrt(a - 1);
  return 2 * energy / omega * (sa * sb - std::log(sa + sb));
}

}  // namespace tunnel
