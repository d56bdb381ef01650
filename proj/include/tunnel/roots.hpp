#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/toms748_solve.hpp>
#include <unsupported/Eigen/Polynomials>

#include "tunnel/errors.hpp"

namespace tunnel {

template <class F>
double bracketed_root(F&& f, double a, double b, double xtol = 1e-13) {
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa < 0) == (fb < 0)) throw SolverFailure("root not bracketed");
  std::uintmax_t iters = 200;
  auto done = [xtol](double x, double y) {
    return std::abs(y - x) <= std::max(xtol, 4 * std::numeric_limits<double>::epsilon() *
                                                 std::max(std::abs(x), std::abs(y)));
  };
  auto r = boost::math::tools::toms748_solve(f, a, b, fa, fb, done, iters);
  double x = 0.5 * (r.first + r.second);
  double fx = f(x);
  double f1 = f(r.first), f2 = f(r.second);
  if (std::abs(f1) < std::abs(fx)) { x = r.first; fx = f1; }
  if (std::abs(f2) < std::abs(fx)) x = r.second;
  return x;
}

// Real roots in [lo, hi] of sum c[k] x^k, via the companion matrix.
inline std::vector<double> polynomial_real_roots(std::vector<double> c, double lo, double hi,
                                                 double imag_tol = 1e-7) {
  while (!c.empty() && c.back() == 0.0) c.pop_back();
  std::vector<double> out;
  if (c.size() < 2) return out;
  if (c.size() == 2) {
    double x = -c[0] / c[1];
    if (x >= lo && x <= hi) out.push_back(x);
    return out;
  }
  Eigen::VectorXd coeffs(c.size());
  for (std::size_t k = 0; k < c.size(); ++k) coeffs[k] = c[k];
  Eigen::PolynomialSolver<double, Eigen::Dynamic> solver(coeffs);
  double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
  for (int i = 0; i < solver.roots().size(); ++i) {
    auto z = solver.roots()[i];
    if (std::abs(z.imag()) <= imag_tol * scale && z.real() >= lo && z.real() <= hi)
      out.push_back(z.real());
  }
  std::sort(out.begin(), out.end());
  return out;
}

inline double horner(const std::vector<double>& c, double x) {
  double r = 0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) r = r * x + *it;
  return r;
}

inline std::vector<double> derivative(const std::vector<double>& c) {
  std::vector<double> d;
  for (std::size_t k = 1; k < c.size(); ++k) d.push_back(double(k) * c[k]);
  return d;
}

}  // namespace tunnel
