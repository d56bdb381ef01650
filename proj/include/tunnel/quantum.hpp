#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "tunnel/errors.hpp"
#include "tunnel/tridiagonal.hpp"
#include "tunnel/estimate.hpp"
#include "tunnel/potential.hpp"

namespace tunnel {

using cplx = std::complex<double>;

struct BasisSpec {
  enum class Kind { fourier_grid, fourier_modes };
  Kind kind = Kind::fourier_grid;
  double half_width = 0;
  int points = 0;
  int modes = 0;
  double hbar = 0;

  static BasisSpec grid(double half_width, int points, double hbar) {
    BasisSpec b;
    b.kind = Kind::fourier_grid;
    b.half_width = half_width;
    b.points = points;
    b.hbar = hbar;
    b.validate();
    return b;
  }
  static BasisSpec fourier_modes(int modes, double hbar) {
    BasisSpec b;
    b.kind = Kind::fourier_modes;
    b.modes = modes;
    b.hbar = hbar;
    b.validate();
    return b;
  }

  void validate() const {
    require(std::isfinite(hbar) && hbar > 0, "basis: hbar must be positive");
    if (kind == Kind::fourier_grid) {
      require(std::isfinite(half_width) && half_width > 0, "basis: half width must be positive");
      require(points % 2 == 0, "basis: grid size must be even");
      if (points < 16) throw UnresolvedBasis("basis: at least 16 grid points are needed");
    } else {
      if (2 * modes + 1 < 16) throw UnresolvedBasis("basis: at least 16 Fourier modes are needed");
    }
  }

  int dimension() const { return kind == Kind::fourier_grid ? points : 2 * modes + 1; }
  int even_size() const { return kind == Kind::fourier_grid ? points / 2 + 1 : modes + 1; }
  int odd_size() const { return kind == Kind::fourier_grid ? points / 2 - 1 : modes; }
  double spacing() const { return 2 * half_width / points; }
  double position(int j) const { return -half_width + j * spacing(); }
};

struct HamiltonianBlocks {
  BasisSpec basis;
  Eigen::MatrixXd even, odd;
};

namespace detail {

// Parity-adapted basis on the periodic grid: even element j (0..N/2) is
// e_j for j = 0, N/2 and (e_j + e_{N-j})/sqrt2 otherwise; odd element j-1
// (j = 1..N/2-1) is (e_j - e_{N-j})/sqrt2.
struct GridComponent {
  int index;
  double weight;
};

inline std::vector<GridComponent> grid_even_element(int j, int n) {
  if (j == 0 || j == n / 2) return {{j, 1.0}};
  return {{j, std::numbers::sqrt2 / 2}, {n - j, std::numbers::sqrt2 / 2}};
}

inline std::vector<GridComponent> grid_odd_element(int i, int n) {
  int j = i + 1;
  return {{j, std::numbers::sqrt2 / 2}, {n - j, -std::numbers::sqrt2 / 2}};
}

inline std::vector<double> grid_kinetic_row(const BasisSpec& b) {
  const int n = b.points;
  const double c = b.hbar * b.hbar / (2.0 * n) * std::pow(std::numbers::pi / b.half_width, 2);
  std::vector<double> t(n);
  for (int d = 0; d < n; ++d) {
    double s = 0;
    for (int m = 1; m < n / 2; ++m) s += 2.0 * m * m * std::cos(2 * std::numbers::pi * double(m) * d / n);
    s += 0.25 * n * n * (d % 2 == 0 ? 1.0 : -1.0);
    t[d] = c * s;
  }
  return t;
}

}  // namespace detail

inline HamiltonianBlocks build_hamiltonian(const Potential& v, const BasisSpec& basis) {
  basis.validate();
  HamiltonianBlocks h{basis, {}, {}};
  if (basis.kind == BasisSpec::Kind::fourier_modes) {
    if (v.kind() != PotentialKind::pendulum)
      throw IncompatibleTopology("Fourier-mode basis requires the pendulum on the circle");
    const int k = basis.modes;
    const double g = v.gamma(), hb2 = basis.hbar * basis.hbar;
    h.even = Eigen::MatrixXd::Zero(k + 1, k + 1);
    h.odd = Eigen::MatrixXd::Zero(k, k);
    for (int m = 0; m <= k; ++m) h.even(m, m) = 0.5 * hb2 * m * m;
    for (int m = 0; m < k; ++m) {
      double c = m == 0 ? -g / std::numbers::sqrt2 : -0.5 * g;
      h.even(m, m + 1) = h.even(m + 1, m) = c;
    }
    for (int m = 1; m <= k; ++m) h.odd(m - 1, m - 1) = 0.5 * hb2 * m * m;
    for (int m = 1; m < k; ++m) h.odd(m - 1, m) = h.odd(m, m - 1) = -0.5 * g;
    return h;
  }
  if (v.topology() != Topology::line)
    throw IncompatibleTopology("grid basis requires a potential on the line");
  require(v.symmetric(), "parity blocks need a symmetric potential");
  const int n = basis.points;
  auto t = detail::grid_kinetic_row(basis);
  std::vector<double> pot(n);
  for (int j = 0; j < n; ++j) pot[j] = v(basis.position(j));
  auto hij = [&](int i, int j) {
    int d = ((i - j) % n + n) % n;
    return t[d] + (i == j ? pot[i] : 0.0);
  };
  auto fill = [&](Eigen::MatrixXd& m, int size, auto element) {
    m.resize(size, size);
    for (int a = 0; a < size; ++a) {
      auto ea = element(a, n);
      for (int b = a; b < size; ++b) {
        auto eb = element(b, n);
        double s = 0;
        for (auto& x : ea)
          for (auto& y : eb) s += x.weight * y.weight * hij(x.index, y.index);
        m(a, b) = m(b, a) = s;
      }
    }
  };
  fill(h.even, basis.even_size(), detail::grid_even_element);
  fill(h.odd, basis.odd_size(), detail::grid_odd_element);
  return h;
}

struct Level {
  double energy;
  int parity;
  int index;
};

struct SpectralDecomposition {
  BasisSpec basis;
  Eigen::VectorXd even_energies, odd_energies;
  Eigen::MatrixXd even_vectors, odd_vectors;
  double edge_amplitude = 0;
  bool edge_converged = false;

  std::vector<Level> levels() const {
    std::vector<Level> out;
    for (int i = 0; i < even_energies.size(); ++i) out.push_back({even_energies[i], +1, i});
    for (int i = 0; i < odd_energies.size(); ++i) out.push_back({odd_energies[i], -1, i});
    std::sort(out.begin(), out.end(), [](const Level& a, const Level& b) { return a.energy < b.energy; });
    return out;
  }
  int dimension() const { return int(even_energies.size() + odd_energies.size()); }
  double hbar() const { return basis.hbar; }
};

namespace detail {

inline double grid_position_edge(const BasisSpec& b, const Eigen::VectorXd& c, bool even) {
  double w = 0;
  for (int a = 0; a < c.size(); ++a) {
    int j = even ? a : a + 1;
    if (std::abs(b.position(j)) >= 0.9 * b.half_width) w += c[a] * c[a];
  }
  return w;
}

inline double grid_momentum_edge(const BasisSpec& b, const Eigen::VectorXd& c, bool even) {
  const int n = b.points;
  std::vector<double> psi(n, 0.0);
  for (int a = 0; a < c.size(); ++a) {
    auto el = even ? grid_even_element(a, n) : grid_odd_element(a, n);
    for (auto& x : el) psi[x.index] += x.weight * c[a];
  }
  double w = 0;
  int mmin = int(std::ceil(0.9 * n / 2));
  for (int m = mmin; m <= n / 2; ++m) {
    cplx s = 0;
    for (int j = 0; j < n; ++j) s += psi[j] * std::polar(1.0, -2 * std::numbers::pi * double(m) * j / n);
    double p = std::norm(s) / n;
    w += (m == n / 2) ? p : 2 * p;
  }
  return w;
}

inline double mode_edge(const BasisSpec& b, const Eigen::VectorXd& c, bool even) {
  double w = 0;
  for (int a = 0; a < c.size(); ++a) {
    int k = even ? a : a + 1;
    if (k >= 0.9 * b.modes) w += c[a] * c[a];
  }
  return w;
}

}  // namespace detail

inline constexpr double edge_tolerance = 1e-14;

inline SpectralDecomposition diagonalize(const HamiltonianBlocks& h, int levels_checked = 12) {
  SpectralDecomposition s;
  s.basis = h.basis;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> even(h.even), odd(h.odd);
  if (even.info() != Eigen::Success || odd.info() != Eigen::Success)
    throw SolverFailure("diagonalize: eigensolver failed");
  s.even_energies = even.eigenvalues();
  s.odd_energies = odd.eigenvalues();
  s.even_vectors = even.eigenvectors();
  s.odd_vectors = odd.eigenvectors();
  double edge = 0;
  auto scan = [&](const Eigen::MatrixXd& vecs, bool is_even) {
    int m = std::min<int>(levels_checked, int(vecs.cols()));
    for (int i = 0; i < m; ++i) {
      Eigen::VectorXd c = vecs.col(i);
      if (s.basis.kind == BasisSpec::Kind::fourier_grid) {
        edge = std::max(edge, detail::grid_position_edge(s.basis, c, is_even));
        edge = std::max(edge, detail::grid_momentum_edge(s.basis, c, is_even));
      } else {
        edge = std::max(edge, detail::mode_edge(s.basis, c, is_even));
      }
    }
  };
  scan(s.even_vectors, true);
  scan(s.odd_vectors, false);
  s.edge_amplitude = edge;
  s.edge_converged = edge < edge_tolerance;
  return s;
}

struct SolveOptions {
  double energy_cap = 0;
  int levels_checked = 12;
  int max_points = 4096;
  int initial_points = 1024;
};

inline double outermost_turning_point(const Potential& v, double energy) {
  double r = 1;
  while (v(r) <= energy || v(-r) <= energy) {
    r *= 2;
    require(r < 1e6, "outermost_turning_point: potential does not confine");
  }
  auto tps = turning_points(v, energy, -r, r);
  require(!tps.empty(), "outermost_turning_point: no turning point below the cap");
  return std::max(std::abs(tps.points.front().q), std::abs(tps.points.back().q));
}

// Default basis with edge-convergence refinement: grid half-width 3x the
// outermost turning point at the energy cap, 1024 points, doubled as needed.
inline SpectralDecomposition solve_spectrum(const Potential& v, double hbar, SolveOptions opt = {}) {
  if (v.topology() == Topology::circle) {
    double cap = std::max(opt.energy_cap, v.gamma());
    int k = std::max(16, int(std::ceil(3 * std::sqrt(2 * (cap + v.gamma())) / hbar)) + 10);
    for (;;) {
      auto s = diagonalize(build_hamiltonian(v, BasisSpec::fourier_modes(k, hbar)), opt.levels_checked);
      if (s.edge_converged || 2 * k + 1 > opt.max_points) return s;
      k *= 2;
    }
  }
  double half = 3 * outermost_turning_point(v, opt.energy_cap);
  int n = opt.initial_points;
  for (;;) {
    auto s = diagonalize(build_hamiltonian(v, BasisSpec::grid(half, n, hbar)), opt.levels_checked);
    if (s.edge_converged || 2 * n > opt.max_points) return s;
    bool position_limited = false;
    for (int i = 0; i < std::min<int>(opt.levels_checked, int(s.even_vectors.cols())); ++i)
      if (detail::grid_position_edge(s.basis, s.even_vectors.col(i), true) >= edge_tolerance)
        position_limited = true;
    if (position_limited) half *= 1.5;
    n *= 2;
  }
}

struct DoubletPairing {
  int even = -1, odd = -1;
  double gap = 0;
  double neighbour = 0;
};

inline DoubletPairing pair_doublet(const SpectralDecomposition& s, int n) {
  require(n >= 0 && n < s.even_energies.size(), "doublet index out of range");
  require(s.odd_energies.size() > 0, "spectrum has no odd levels");
  DoubletPairing p;
  p.even = n;
  double e = s.even_energies[n];
  Eigen::Index j;
  (s.odd_energies.array() - e).abs().minCoeff(&j);
  p.odd = int(j);
  double o = s.odd_energies[j];
  p.gap = std::abs(o - e);
  p.neighbour = std::numeric_limits<double>::infinity();
  auto near = [&](double x) { return std::min(std::abs(x - e), std::abs(x - o)); };
  for (int i = 0; i < s.even_energies.size(); ++i)
    if (i != n) p.neighbour = std::min(p.neighbour, near(s.even_energies[i]));
  for (int i = 0; i < s.odd_energies.size(); ++i)
    if (i != p.odd) p.neighbour = std::min(p.neighbour, near(s.odd_energies[i]));
  return p;
}

inline SplittingEstimate exact_splitting(const SpectralDecomposition& s, int n) {
  auto p = pair_doublet(s, n);
  SplittingEstimate est;
  est.method = Method::exact_diagonalization;
  est.hbar = s.hbar();
  est.level = n;
  double ep = s.even_energies[p.even], em = s.odd_energies[p.odd];
  est.value = std::abs(em - ep);
  est.diagnostics["E_plus"] = ep;
  est.diagnostics["E_minus"] = em;
  est.diagnostics["signed_splitting"] = em - ep;
  est.diagnostics["neighbour_distance"] = p.neighbour;
  if (!(p.gap < 0.5 * p.neighbour)) est.warn("pairing_ambiguous");
  if (p.neighbour < 3 * p.gap) est.warn("resonance_ambiguity");
  if (!s.edge_converged) est.warn("basis_unconverged");
  return est;
}

// Doublet closest to a reference energy (e.g. a lateral-well EBK level when a
// deeper central well pushes the doublet up the spectrum).
inline SplittingEstimate splitting_near(const SpectralDecomposition& s, double energy) {
  require(s.even_energies.size() > 0 && s.odd_energies.size() > 0, "splitting_near: empty spectrum");
  Eigen::Index o, e;
  (s.odd_energies.array() - energy).abs().minCoeff(&o);
  (s.even_energies.array() - s.odd_energies[o]).abs().minCoeff(&e);
  SplittingEstimate est;
  est.method = Method::exact_diagonalization;
  est.hbar = s.hbar();
  est.level = int(e);
  est.value = std::abs(s.odd_energies[o] - s.even_energies[e]);
  est.diagnostics["E_plus"] = s.even_energies[e];
  est.diagnostics["E_minus"] = s.odd_energies[o];
  est.diagnostics["even_index"] = double(e);
  est.diagnostics["odd_index"] = double(o);
  if (!s.edge_converged) est.warn("basis_unconverged");
  return est;
}

// Orthonormal columns per parity block; the operator is C C^T in each block.
struct QuasiProjector {
  Eigen::MatrixXd even_cols, odd_cols;
  bool full = false;

  static QuasiProjector identity(const SpectralDecomposition& s) {
    QuasiProjector p;
    p.even_cols = Eigen::MatrixXd::Identity(s.even_energies.size(), s.even_energies.size());
    p.odd_cols = Eigen::MatrixXd::Identity(s.odd_energies.size(), s.odd_energies.size());
    p.full = true;
    return p;
  }

  // |Phi><Phi| + S|Phi><Phi|S with Phi = (phi_plus + phi_minus)/sqrt2.
  static QuasiProjector doublet(const SpectralDecomposition& s, int n) {
    auto d = pair_doublet(s, n);
    Eigen::VectorXd plus = s.even_vectors.col(d.even), minus = s.odd_vectors.col(d.odd);
    return from_quasi_mode(plus / std::numbers::sqrt2, minus / std::numbers::sqrt2);
  }

  static QuasiProjector from_quasi_mode(const Eigen::VectorXd& even_part, const Eigen::VectorXd& odd_part) {
    require(even_part.norm() > 0 && odd_part.norm() > 0, "quasi-mode needs both parity components");
    QuasiProjector p;
    p.even_cols = even_part.normalized();
    p.odd_cols = odd_part.normalized();
    return p;
  }

  Eigen::MatrixXd even_block() const { return even_cols * even_cols.transpose(); }
  Eigen::MatrixXd odd_block() const { return odd_cols * odd_cols.transpose(); }

  double idempotency_residual() const {
    Eigen::MatrixXd e = even_block(), o = odd_block();
    return std::max((e * e - e).norm(), (o * o - o).norm());
  }
};

// Maps the parity blocks into the full basis: grid points, or [cos | sin]
// modes for the circle.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> block_embedding(const BasisSpec& b) {
  const int ne = b.even_size(), no = b.odd_size(), n = b.dimension();
  Eigen::MatrixXd pe = Eigen::MatrixXd::Zero(n, ne), po = Eigen::MatrixXd::Zero(n, no);
  if (b.kind == BasisSpec::Kind::fourier_modes) {
    pe.topRows(ne).setIdentity();
    po.bottomRows(no).setIdentity();
    return {pe, po};
  }
  for (int a = 0; a < ne; ++a)
    for (auto& x : detail::grid_even_element(a, b.points)) pe(x.index, a) = x.weight;
  for (int a = 0; a < no; ++a)
    for (auto& x : detail::grid_odd_element(a, b.points)) po(x.index, a) = x.weight;
  return {pe, po};
}

inline Eigen::MatrixXd parity_matrix(const BasisSpec& b) {
  const int n = b.dimension();
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  if (b.kind == BasisSpec::Kind::fourier_modes) {
    for (int i = 0; i < n; ++i) s(i, i) = i < b.even_size() ? 1.0 : -1.0;
    return s;
  }
  for (int j = 0; j < n; ++j) s((n - j) % n, j) = 1.0;
  return s;
}

inline Eigen::MatrixXd full_matrix(const QuasiProjector& p, const BasisSpec& b) {
  auto [pe, po] = block_embedding(b);
  return pe * p.even_block() * pe.transpose() + po * p.odd_block() * po.transpose();
}

namespace detail {

inline cplx expm1(cplx z) {
  double x = z.real(), y = z.imag();
  double s = std::sin(0.5 * y);
  return {std::expm1(x) * std::cos(y) - 2 * s * s, std::exp(x) * std::sin(y)};
}

struct LevelSet {
  std::vector<double> even, odd;
  std::vector<double> w_even, w_odd;
  std::vector<std::pair<int, int>> pairs;
};

inline std::vector<std::pair<int, int>> mutual_pairs(const std::vector<double>& e, const std::vector<double>& o) {
  std::vector<std::pair<int, int>> out;
  if (e.empty() || o.empty()) return out;
  auto nearest = [](const std::vector<double>& xs, double x) {
    int best = 0;
    for (int i = 1; i < int(xs.size()); ++i)
      if (std::abs(xs[i] - x) < std::abs(xs[best] - x)) best = i;
    return best;
  };
  for (int j = 0; j < int(o.size()); ++j) {
    int i = nearest(e, o[j]);
    if (nearest(o, e[i]) == j) out.emplace_back(i, j);
  }
  return out;
}

struct TraceSums {
  cplx u, su;
};

// Sum of w e^{-i(E - shift)T/hbar} over both parities and the parity-signed
// sum, with paired differences taken through expm1.
inline TraceSums trace_sums(const LevelSet& ls, cplx t, double hbar, double shift) {
  auto z = [&](double e) { return std::exp(cplx(0, -1) * (e - shift) * t / hbar); };
  std::vector<char> e_used(ls.even.size(), 0), o_used(ls.odd.size(), 0);
  TraceSums r{0, 0};
  for (std::size_t i = 0; i < ls.even.size(); ++i) r.u += ls.w_even[i] * z(ls.even[i]);
  for (std::size_t i = 0; i < ls.odd.size(); ++i) r.u += ls.w_odd[i] * z(ls.odd[i]);
  for (auto [i, j] : ls.pairs) {
    e_used[i] = o_used[j] = 1;
    cplx ze = z(ls.even[i]);
    cplx diff = -ze * expm1(cplx(0, -1) * (ls.odd[j] - ls.even[i]) * t / hbar);
    r.su += ze * (ls.w_even[i] - ls.w_odd[j]) + ls.w_odd[j] * diff;
  }
  for (std::size_t i = 0; i < ls.even.size(); ++i)
    if (!e_used[i]) r.su += ls.w_even[i] * z(ls.even[i]);
  for (std::size_t i = 0; i < ls.odd.size(); ++i)
    if (!o_used[i]) r.su -= ls.w_odd[i] * z(ls.odd[i]);
  return r;
}

inline std::vector<double> projector_weights(const Eigen::MatrixXd& vecs, const Eigen::MatrixXd& cols, bool full) {
  std::vector<double> w(vecs.cols(), 1.0);
  if (full) return w;
  Eigen::MatrixXd overlap = vecs.transpose() * cols;
  for (int m = 0; m < vecs.cols(); ++m) w[m] = overlap.row(m).squaredNorm();
  return w;
}

inline LevelSet level_set(const SpectralDecomposition& s, const QuasiProjector* p) {
  LevelSet ls;
  ls.even.assign(s.even_energies.data(), s.even_energies.data() + s.even_energies.size());
  ls.odd.assign(s.odd_energies.data(), s.odd_energies.data() + s.odd_energies.size());
  if (p) {
    ls.w_even = projector_weights(s.even_vectors, p->even_cols, p->full);
    ls.w_odd = projector_weights(s.odd_vectors, p->odd_cols, p->full);
  } else {
    ls.w_even.assign(ls.even.size(), 1.0);
    ls.w_odd.assign(ls.odd.size(), 1.0);
  }
  ls.pairs = mutual_pairs(ls.even, ls.odd);
  return ls;
}

inline double lowest(const SpectralDecomposition& s) {
  double m = s.even_energies.minCoeff();
  if (s.odd_energies.size()) m = std::min(m, s.odd_energies.minCoeff());
  return m;
}

inline void check_time(cplx t) {
  if (t.imag() > 0) throw DomainError("complex time must have Im T <= 0");
}

}  // namespace detail

inline cplx trace_U(const SpectralDecomposition& s, cplx t, int eta = 1, const QuasiProjector* p = nullptr) {
  detail::check_time(t);
  require(eta == 1 || eta == -1, "trace_U: eta must be +1 or -1");
  auto r = detail::trace_sums(detail::level_set(s, p), t, s.hbar(), 0.0);
  return eta == 1 ? r.u : r.su;
}

namespace detail {

inline cplx trace_ratio_delta(const LevelSet& ls, cplx t, double hbar, double shift) {
  require(std::abs(t) > 0, "trace estimate needs T != 0");
  auto r = trace_sums(ls, t, hbar, shift);
  return 2 * hbar / (cplx(0, 1) * t) * r.su / r.u;
}

}  // namespace detail

inline SplittingEstimate delta0_trace(const SpectralDecomposition& s, cplx t,
                                      const std::vector<cplx>& plateau = {}) {
  detail::check_time(t);
  auto ls = detail::level_set(s, nullptr);
  double shift = detail::lowest(s);
  cplx d = detail::trace_ratio_delta(ls, t, s.hbar(), shift);
  SplittingEstimate est;
  est.method = Method::trace_ground;
  est.hbar = s.hbar();
  est.value = std::abs(d);
  est.diagnostics["re"] = d.real();
  est.diagnostics["im"] = d.imag();
  est.diagnostics["im_over_re"] = std::abs(d.imag()) / std::abs(d.real());
  auto ground = exact_splitting(s, 0);
  double omega = s.even_energies.size() > 1 ? (s.even_energies[1] - s.even_energies[0]) / s.hbar() : 0;
  double separation = -omega * t.imag();
  double coherence = std::abs(t) * ground.value / (2 * s.hbar());
  est.diagnostics["separation"] = separation;
  est.diagnostics["coherence"] = coherence;
  if (separation < 3) est.warn("separation_precondition");
  if (coherence > 0.1) est.warn("coherence_precondition");
  if (!plateau.empty()) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0, sum = 0;
    for (cplx tp : plateau) {
      detail::check_time(tp);
      double v = std::abs(detail::trace_ratio_delta(ls, tp, s.hbar(), shift));
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
    }
    est.diagnostics["plateau_flatness"] = (hi - lo) / (sum / double(plateau.size()));
  }
  return est;
}

inline SplittingEstimate deltan_trace(const SpectralDecomposition& s, int n, cplx t,
                                      const QuasiProjector* projector = nullptr) {
  detail::check_time(t);
  std::optional<QuasiProjector> own;
  if (!projector) projector = &own.emplace(QuasiProjector::doublet(s, n));
  auto ls = detail::level_set(s, projector);
  double shift = detail::lowest(s);
  cplx d = detail::trace_ratio_delta(ls, t, s.hbar(), shift);
  auto pair = pair_doublet(s, n);
  double inside = 0, outside = 0;
  auto mag = [&](double e) { return std::exp((e - shift) * t.imag() / s.hbar()); };
  for (std::size_t i = 0; i < ls.even.size(); ++i)
    (int(i) == pair.even ? inside : outside) += ls.w_even[i] * mag(ls.even[i]);
  for (std::size_t i = 0; i < ls.odd.size(); ++i)
    (int(i) == pair.odd ? inside : outside) += ls.w_odd[i] * mag(ls.odd[i]);
  SplittingEstimate est;
  est.method = Method::trace_excited;
  est.hbar = s.hbar();
  est.level = n;
  est.value = std::abs(d);
  est.diagnostics["re"] = d.real();
  est.diagnostics["im"] = d.imag();
  est.diagnostics["contamination"] = inside > 0 ? outside / inside : std::numeric_limits<double>::infinity();
  if (est.diagnostics["contamination"] > 1e-3) est.warn("neighbour_contamination");
  return est;
}

// Spectral map F(E) = (E - E_ref)^(2N) applied to the eigenbasis, then the
// ground-doublet trace formula on the mapped levels.
inline SplittingEstimate deltan_power_trick(const SpectralDecomposition& s, int n, double e_ref, int power,
                                            cplx t) {
  detail::check_time(t);
  require(power >= 1, "power trick: N must be at least 1");
  auto pair = pair_doublet(s, n);
  auto f = [&](double e) { return std::pow(e - e_ref, 2 * power); };
  detail::LevelSet ls;
  for (int i = 0; i < s.even_energies.size(); ++i) ls.even.push_back(f(s.even_energies[i]));
  for (int i = 0; i < s.odd_energies.size(); ++i) ls.odd.push_back(f(s.odd_energies[i]));
  ls.w_even.assign(ls.even.size(), 1.0);
  ls.w_odd.assign(ls.odd.size(), 1.0);
  ls.pairs = {{pair.even, pair.odd}};
  double shift = std::min(*std::min_element(ls.even.begin(), ls.even.end()),
                          *std::min_element(ls.odd.begin(), ls.odd.end()));
  cplx d = detail::trace_ratio_delta(ls, t, s.hbar(), shift);
  SplittingEstimate est;
  est.method = Method::power_trick;
  est.hbar = s.hbar();
  est.level = n;
  est.value = std::pow(std::abs(d), 1.0 / (2 * power));
  est.diagnostics["delta_prime_re"] = d.real();
  est.diagnostics["delta_prime_im"] = d.imag();
  est.diagnostics["power"] = power;
  double target = std::max(ls.even[pair.even], ls.odd[pair.odd]);
  for (int i = 0; i < int(ls.even.size()); ++i)
    if (i != pair.even && ls.even[i] < target) est.warn("ordering_ambiguity");
  for (int i = 0; i < int(ls.odd.size()); ++i)
    if (i != pair.odd && ls.odd[i] < target) est.warn("ordering_ambiguity");
  return est;
}

// Pendulum levels from the Mathieu table: E = hbar^2 a / 8, g = -4 gamma / hbar^2.
inline double mathieu_parameter(double gamma, double hbar) { return -4 * gamma / (hbar * hbar); }

// Rotation doublet n of the pendulum. The characteristic values are taken in
// 50-digit arithmetic so that tiny splittings survive the subtraction.
inline SplittingEstimate pendulum_splitting_mathieu(double gamma, int n, double hbar) {
  require(gamma > 0 && hbar > 0, "pendulum_splitting_mathieu: gamma and hbar must be positive");
  require(n >= 1, "pendulum_splitting_mathieu: n must be at least 1");
  using Wide = boost::multiprecision::cpp_bin_float_50;
  auto pair = mathieu_pair<Wide>(Wide(mathieu_parameter(gamma, hbar)), n, 1e-40);
  Wide scale = Wide(hbar) * Wide(hbar) / 8;
  SplittingEstimate est;
  est.method = Method::mathieu;
  est.hbar = hbar;
  est.level = n;
  est.value = static_cast<double>(abs(pair.a - pair.b) * scale);
  est.diagnostics["E_plus"] = static_cast<double>(pair.a * scale);
  est.diagnostics["E_minus"] = static_cast<double>(pair.b * scale);
  est.diagnostics["truncation"] = pair.tail;
  if (std::min(est.diagnostics["E_plus"], est.diagnostics["E_minus"]) <= gamma) est.warn("below_separatrix");
  return est;
}

}  // namespace tunnel
