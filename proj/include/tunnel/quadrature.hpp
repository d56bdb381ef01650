#pragma once

#include <cmath>
#include <map>
#include <numbers>
#include <vector>

#include "tunnel/errors.hpp"

namespace tunnel {

struct GaussRule {
  std::vector<double> x, w;
};

inline GaussRule make_gauss_legendre(int n) {
  require(n >= 1, "Gauss-Legendre rule needs at least one node");
  GaussRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1, p1 = z;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2 * k - 1) * z * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1;
      dp = n * (z * p1 - p0) / (z * z - 1);
      double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2 / ((1 - z * z) * dp * dp);
  }
  return r;
}

inline const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

template <class F>
double gauss_panels(F&& f, double a, double b, int panels, const GaussRule& rule) {
  double h = (b - a) / panels, sum = 0;
  for (int p = 0; p < panels; ++p) {
    double c = a + (p + 0.5) * h, s = 0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * f(c + 0.5 * h * rule.x[i]);
    sum += 0.5 * h * s;
  }
  return sum;
}

struct QuadratureResult {
  double value;
  int nodes;
};

// Composite Gauss-Legendre: 64-node panels, 128 nodes to start, panel count
// doubled until successive estimates agree.
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double rtol = 1e-10, double atol = 1e-14) {
  const auto& rule = gauss_legendre(64);
  int panels = 2;
  double prev = gauss_panels(f, a, b, panels, rule);
  for (; panels < (1 << 14);) {
    panels *= 2;
    double next = gauss_panels(f, a, b, panels, rule);
    if (std::abs(next - prev) <= std::max(rtol * std::abs(next), atol))
      return {next, panels * 64};
    prev = next;
  }
  throw SolverFailure("quadrature did not converge");
}

// Integrates over [lo, hi] with q = mid + half sin(theta). The callback gets
// q together with accurate distances to both ends and the Jacobian.
template <class F>
QuadratureResult integrate_sine(F&& f, double lo, double hi, double rtol = 1e-10,
                                double atol = 1e-14) {
  double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
  auto g = [&](double th) {
    double s = std::sin(th);
    double to_hi = 2 * half * std::pow(std::sin(0.25 * std::numbers::pi - 0.5 * th), 2);
    double to_lo = 2 * half * std::pow(std::sin(0.25 * std::numbers::pi + 0.5 * th), 2);
    double q = th > 0 ? hi - to_hi : lo + to_lo;
    if (std::abs(th) < 1e-3) q = mid + half * s;
    return f(q, to_lo, to_hi, half * std::cos(th));
  };
  return integrate(g, -0.5 * std::numbers::pi, 0.5 * std::numbers::pi, rtol, atol);
}

}  // namespace tunnel
