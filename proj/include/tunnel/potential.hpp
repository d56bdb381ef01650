#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "tunnel/errors.hpp"
#include "tunnel/roots.hpp"

namespace tunnel {

enum class Topology { line, circle };
enum class PotentialKind { quartic_double_well, pendulum, triple_well, island, polynomial };

inline const char* to_string(PotentialKind k) {
  switch (k) {
    case PotentialKind::quartic_double_well: return "quartic_double_well";
    case PotentialKind::pendulum: return "pendulum";
    case PotentialKind::triple_well: return "triple_well";
    case PotentialKind::island: return "island";
    case PotentialKind::polynomial: return "polynomial";
  }
  return "unknown";
}

// One-dimensional potential, unit mass. Polynomial kinds keep their ascending
// coefficients; the pendulum is -gamma cos q on the circle.
class Potential {
 public:
  static Potential quartic_double_well(double a) {
    require(std::isfinite(a) && a > 0, "quartic_double_well: a must be positive");
    Potential p(PotentialKind::quartic_double_well, {a * a * a * a, 0, -2 * a * a, 0, 1});
    p.a_ = a;
    return p;
  }

  static Potential pendulum(double gamma) {
    require(std::isfinite(gamma) && gamma > 0, "pendulum: gamma must be positive");
    Potential p;
    p.kind_ = PotentialKind::pendulum;
    p.topology_ = Topology::circle;
    p.symmetric_ = true;
    p.gamma_ = gamma;
    return p;
  }

  static Potential triple_well(double a, double b) {
    require(std::isfinite(a) && std::isfinite(b) && a > b && b > 0,
            "triple_well: need a > b > 0");
    double a2 = a * a, b2 = b * b;
    Potential p(PotentialKind::triple_well,
                {-a2 * a2 * b2, 0, a2 * a2 + 2 * a2 * b2, 0, -(2 * a2 + b2), 0, 1});
    p.a_ = a;
    p.b_ = b;
    return p;
  }

  static Potential island(std::vector<double> coefficients) {
    return Potential(PotentialKind::island, std::move(coefficients));
  }

  static Potential polynomial(std::vector<double> coefficients) {
    return Potential(PotentialKind::polynomial, std::move(coefficients));
  }

  PotentialKind kind() const { return kind_; }
  Topology topology() const { return topology_; }
  bool symmetric() const { return symmetric_; }
  bool is_polynomial() const { return kind_ != PotentialKind::pendulum; }
  const std::vector<double>& coefficients() const { return coeffs_[0]; }
  double a() const { return a_; }
  double b() const { return b_; }
  double gamma() const { return gamma_; }

  template <class T>
  T eval(T q, int order = 0) const {
    require(order >= 0 && order <= 4, "eval: derivative order must be in 0..4");
    switch (kind_) {
      case PotentialKind::pendulum: {
        switch (order) {
          case 0: return -gamma_ * std::cos(q);
          case 1: return gamma_ * std::sin(q);
          case 2: return gamma_ * std::cos(q);
          case 3: return -gamma_ * std::sin(q);
          default: return -gamma_ * std::cos(q);
        }
      }
      case PotentialKind::quartic_double_well: {
        T a2 = T(a_ * a_);
        switch (order) {
          case 0: { T u = q * q - a2; return u * u; }
          case 1: return T(4) * q * (q * q - a2);
          case 2: return T(12) * q * q - T(4) * a2;
          case 3: return T(24) * q;
          default: return T(24);
        }
      }
      default: {
        const auto& c = coeffs_[order];
        T r = T(0);
        for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * q + T(*it);
        return r;
      }
    }
  }

  double operator()(double q) const { return eval(q, 0); }

 private:
  Potential() = default;
  Potential(PotentialKind kind, std::vector<double> c) : kind_(kind) {
    require(!c.empty(), "polynomial potential needs coefficients");
    for (double x : c) require(std::isfinite(x), "polynomial coefficients must be finite");
    while (c.size() > 1 && c.back() == 0.0) c.pop_back();
    coeffs_[0] = c;
    for (int k = 1; k <= 4; ++k) coeffs_[k] = derivative(coeffs_[k - 1]);
    symmetric_ = true;
    for (std::size_t k = 1; k < c.size(); k += 2)
      if (c[k] != 0.0) symmetric_ = false;
  }

  PotentialKind kind_ = PotentialKind::polynomial;
  Topology topology_ = Topology::line;
  bool symmetric_ = false;
  std::array<std::vector<double>, 5> coeffs_{};
  double a_ = 0, b_ = 0, gamma_ = 0;
};

inline double harmonic_frequency(const Potential& v, double q_eq) {
  double d2 = v.eval(q_eq, 2);
  if (!(d2 > 0)) throw NotAWell("harmonic_frequency: V'' <= 0 at the requested point");
  double d1 = v.eval(q_eq, 1);
  double scale = std::max(1.0, d2 * std::max(1.0, std::abs(q_eq)));
  require(std::abs(d1) <= 1e-8 * scale, "harmonic_frequency: point is not an equilibrium");
  return std::sqrt(d2);
}

enum class TurnKind { enters_allowed, enters_forbidden };

struct TurningPoint {
  double q;
  TurnKind kind;
};

struct TurningPointSet {
  std::vector<TurningPoint> points;
  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  const TurningPoint& operator[](std::size_t i) const { return points[i]; }
  std::vector<double> positions() const {
    std::vector<double> x;
    for (auto& p : points) x.push_back(p.q);
    return x;
  }
};

namespace detail {

inline constexpr int sample_intervals = 512;

template <class F>
std::vector<double> sampled_roots(F&& f, double lo, double hi) {
  std::vector<double> roots;
  double h = (hi - lo) / sample_intervals;
  double x0 = lo, f0 = f(lo);
  if (f0 == 0.0) roots.push_back(lo);
  for (int i = 1; i <= sample_intervals; ++i) {
    double x1 = i == sample_intervals ? hi : lo + i * h;
    double f1 = f(x1);
    if (f1 == 0.0)
      roots.push_back(x1);
    else if (f0 != 0.0 && (f0 < 0) != (f1 < 0))
      roots.push_back(bracketed_root(f, x0, x1));
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

inline void merge_roots(std::vector<double>& roots, double tol) {
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots)
    if (out.empty() || std::abs(r - out.back()) > tol) out.push_back(r);
  roots = std::move(out);
}

template <class F, class DF>
bool newton_polish(F&& f, DF&& df, double& x, double lo, double hi) {
  for (int it = 0; it < 50; ++it) {
    double d = df(x);
    if (d == 0.0) return false;
    double step = f(x) / d;
    x -= step;
    if (x < lo || x > hi) return false;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(x))) return true;
  }
  return std::abs(f(x)) < 1e-10;
}

}  // namespace detail

inline std::vector<double> critical_points(const Potential& v, double lo, double hi) {
  require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "critical_points: bad bracket");
  auto d1 = [&](double q) { return v.eval(q, 1); };
  auto d2 = [&](double q) { return v.eval(q, 2); };
  auto roots = detail::sampled_roots(d1, lo, hi);
  if (v.is_polynomial()) {
    for (double r : polynomial_real_roots(derivative(v.coefficients()), lo, hi)) {
      double x = r;
      if (detail::newton_polish(d1, d2, x, lo, hi)) roots.push_back(x);
    }
  }
  detail::merge_roots(roots, 1e-9 * std::max({1.0, std::abs(lo), std::abs(hi)}));
  return roots;
}

inline TurningPointSet turning_points(const Potential& v, double energy, double lo, double hi) {
  require(std::isfinite(energy), "turning_points: energy must be finite");
  require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "turning_points: bad bracket");
  double etol = 1e-9 * std::max(1.0, std::abs(energy));
  for (double c : critical_points(v, lo, hi))
    if (std::abs(v(c) - energy) <= etol)
      throw DegenerateTurningPoint("turning_points: energy at a critical value of V");

  auto f = [&](double q) { return v(q) - energy; };
  auto df = [&](double q) { return v.eval(q, 1); };
  auto roots = detail::sampled_roots(f, lo, hi);
  if (v.is_polynomial()) {
    auto c = v.coefficients();
    c[0] -= energy;
    for (double r : polynomial_real_roots(c, lo, hi)) {
      bool known = false;
      for (double x : roots)
        if (std::abs(x - r) < 1e-7 * std::max(1.0, std::abs(r))) known = true;
      double x = r;
      if (!known && detail::newton_polish(f, df, x, lo, hi)) roots.push_back(x);
    }
  }
  detail::merge_roots(roots, 1e-10 * std::max({1.0, std::abs(lo), std::abs(hi)}));

  TurningPointSet out;
  for (double q : roots) {
    double slope = df(q);
    double scale = std::max(1.0, std::abs(v.eval(q, 2)));
    if (std::abs(slope) <= 1e-9 * scale)
      throw DegenerateTurningPoint("turning_points: V' vanishes at a root");
    out.points.push_back({q, slope < 0 ? TurnKind::enters_allowed : TurnKind::enters_forbidden});
  }
  return out;
}

}  // namespace tunnel
