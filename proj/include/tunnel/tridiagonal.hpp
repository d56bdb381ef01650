#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "tunnel/errors.hpp"

namespace tunnel {

// Number of eigenvalues below x of the symmetric tridiagonal matrix (d, e).
template <class Real>
int sturm_count(const std::vector<Real>& d, const std::vector<Real>& e, const Real& x,
                const Real& tiny) {
  using std::abs;
  int count = 0;
  Real q = d[0] - x;
  if (q < 0) ++count;
  for (std::size_t i = 1; i < d.size(); ++i) {
    if (abs(q) < tiny) q = q < 0 ? -tiny : tiny;
    q = d[i] - x - e[i - 1] * e[i - 1] / q;
    if (q < 0) ++count;
  }
  return count;
}

// k-th smallest eigenvalue (0-based) by Sturm bisection. An optional guess
// narrows the starting bracket when it is confirmed by the Sturm counts.
template <class Real>
Real tridiagonal_eigenvalue(const std::vector<Real>& d, const std::vector<Real>& e, int k,
                            const Real* guess = nullptr, double guess_width = 1e-9) {
  using std::abs;
  const std::size_t n = d.size();
  require(n > 0 && e.size() + 1 >= n, "tridiagonal_eigenvalue: inconsistent sizes");
  require(k >= 0 && std::size_t(k) < n, "tridiagonal_eigenvalue: index out of range");
  Real lo = d[0], hi = d[0], norm = 0;
  for (std::size_t i = 0; i < n; ++i) {
    Real r = 0;
    if (i > 0) r += abs(e[i - 1]);
    if (i + 1 < n) r += abs(e[i]);
    lo = std::min<Real>(lo, d[i] - r);
    hi = std::max<Real>(hi, d[i] + r);
    norm = std::max<Real>(norm, abs(d[i]) + r);
  }
  const Real eps = std::numeric_limits<Real>::epsilon();
  const Real tiny = eps * eps * (norm + 1);
  if (guess) {
    Real w = Real(guess_width) * std::max<Real>(Real(1), abs(*guess));
    Real glo = *guess - w, ghi = *guess + w;
    if (sturm_count(d, e, glo, tiny) <= k && sturm_count(d, e, ghi, tiny) > k) {
      lo = glo;
      hi = ghi;
    }
  }
  for (int it = 0; it < 4000; ++it) {
    Real mid = (lo + hi) / 2;
    if (mid <= lo || mid >= hi) break;
    if (hi - lo <= 2 * eps * std::max<Real>(abs(lo), abs(hi))) break;
    if (sturm_count(d, e, mid, tiny) > k)
      hi = mid;
    else
      lo = mid;
  }
  return (lo + hi) / 2;
}

template <class Real>
struct MathieuValues {
  std::vector<Real> even;  // a_0, a_2, a_4, ...
  std::vector<Real> odd;   // b_2, b_4, ...
  int tail = 0;
  const Real& a(int n) const { return even.at(std::size_t(n)); }
  const Real& b(int n) const {
    require(n >= 1, "Mathieu b_{2n} needs n >= 1");
    return odd.at(std::size_t(n - 1));
  }
};

namespace detail {

template <class Real>
Real mathieu_block_value(const Real& g, bool even, int index, int size,
                         const Real* guess = nullptr) {
  std::vector<Real> d(static_cast<std::size_t>(size)), e(static_cast<std::size_t>(size - 1), g);
  for (int k = 0; k < size; ++k) {
    int m = even ? 2 * k : 2 * k + 2;
    d[std::size_t(k)] = Real(m) * Real(m);
  }
  if (even && size > 1) {
    using std::sqrt;
    e[0] = sqrt(Real(2)) * g;
  }
  return tridiagonal_eigenvalue(d, e, index, guess);
}

}  // namespace detail

// Characteristic values a_{2n} (n = 0..count) and b_{2n} (n = 1..count) of
// y'' + (a - 2 g cos 2x) y = 0, from truncated Fourier blocks. The truncation
// is doubled until the highest returned value changes by less than tol.
template <class Real = double>
MathieuValues<Real> mathieu_characteristics(const Real& g, int count, double tol = 1e-12) {
  require(count >= 0, "mathieu_characteristics: count must be non-negative");
  double gd = std::abs(static_cast<double>(g));
  int size = count + 2 * int(std::ceil(std::sqrt(gd))) + 12;
  auto top = [&](int sz) {
    using std::abs;
    Real a = detail::mathieu_block_value(g, true, count, sz);
    Real b = count >= 1 ? detail::mathieu_block_value(g, false, count - 1, sz) : a;
    return std::pair<Real, Real>(a, b);
  };
  auto last = top(size);
  for (;;) {
    require(size < 100000, "mathieu_characteristics: truncation did not converge");
    int bigger = 2 * size;
    auto next = top(bigger);
    using std::abs;
    Real scale = std::max<Real>(Real(1), abs(next.first));
    if (abs(next.first - last.first) <= Real(tol) * scale &&
        abs(next.second - last.second) <= Real(tol) * scale) {
      size = bigger;
      break;
    }
    size = bigger;
    last = next;
  }
  MathieuValues<Real> out;
  out.tail = size;
  for (int n = 0; n <= count; ++n) out.even.push_back(detail::mathieu_block_value(g, true, n, size));
  for (int n = 1; n <= count; ++n)
    out.odd.push_back(detail::mathieu_block_value(g, false, n - 1, size));
  return out;
}

template <class Real>
struct MathieuPair {
  Real a, b;
  int tail;
};

// a_{2n} and b_{2n} alone; cheaper than the full table for extended precision.
template <class Real = double>
MathieuPair<Real> mathieu_pair(const Real& g, int n, double tol = 1e-12) {
  require(n >= 1, "mathieu_pair: n must be at least 1");
  double gd = static_cast<double>(g);
  int size = n + 2 * int(std::ceil(std::sqrt(std::abs(gd)))) + 12;
  auto eval = [&](int sz) {
    Real ga = Real(detail::mathieu_block_value(gd, true, n, sz));
    Real gb = Real(detail::mathieu_block_value(gd, false, n - 1, sz));
    return std::pair<Real, Real>(detail::mathieu_block_value(g, true, n, sz, &ga),
                                 detail::mathieu_block_value(g, false, n - 1, sz, &gb));
  };
  auto last = eval(size);
  for (;;) {
    require(size < 100000, "mathieu_pair: truncation did not converge");
    size *= 2;
    auto next = eval(size);
    using std::abs;
    Real scale = std::max<Real>(Real(1), abs(next.first));
    bool done = abs(next.first - last.first) <= Real(tol) * scale &&
                abs(next.second - last.second) <= Real(tol) * scale;
    last = next;
    if (done) break;
  }
  return {last.first, last.second, size};
}

}  // namespace tunnel
