// Acceptance checks: one line per criterion, exit status 0 only if all
// selected criteria pass.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "tunnel/quantum.hpp"
#include "tunnel/semiclassics.hpp"
#include "tunnel/trajectories.hpp"

using namespace tunnel;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

const double hbar12 = 1.0 / 12;

SpectralDecomposition quartic_spectrum() {
  SolveOptions opt;
  opt.energy_cap = 2;
  return solve_spectrum(Potential::quartic_double_well(1), hbar12, opt);
}

Verdict criterion1() {
  auto t0 = std::chrono::steady_clock::now();
  double d = exact_splitting(quartic_spectrum(), 0).value;
  double secs = seconds_since(t0);
  double rel = d / 4.4e-10 - 1;
  return {std::abs(rel) <= 0.15 && secs < 10,
          fmt("dE0 = %.4e (%.1f%% from 4.4e-10, tolerance 15%%), %.2f s (limit 10 s)", d, 100 * rel, secs)};
}

Verdict criterion2() {
  auto s = quartic_spectrum();
  double exact = exact_splitting(s, 0).value;
  double lo = 1e300, hi = 0, sum = 0, worst_agree = 0, worst_im = 0;
  int count = 0;
  for (int k = 0; k <= 20; ++k) {
    auto d = delta0_trace(s, {0.5 * k, -4});
    lo = std::min(lo, d.value);
    hi = std::max(hi, d.value);
    sum += d.value;
    ++count;
    worst_agree = std::max(worst_agree, std::abs(d.value / exact - 1));
    worst_im = std::max(worst_im, d.diag("im_over_re"));
  }
  double flat = (hi - lo) / (sum / count);
  bool pass = flat < 1e-2 && worst_agree < 1e-2 && worst_im < 1e-3;
  return {pass, fmt("plateau spread %.2e (< 1e-2), worst deviation from exact %.2e (< 1e-2), "
                    "max |Im|/|Re| %.2e (< 1e-3)",
                    flat, worst_agree, worst_im)};
}

Verdict criterion3() {
  auto v = Potential::quartic_double_well(1);
  double worst_g = 0, worst_e = 0, worst_ratio = 0;
  const double target_g = 0.5 * std::log(std::numbers::pi), target_ratio = std::sqrt(std::numbers::pi / 2);
  for (int inv = 6; inv <= 12; ++inv) {
    auto g = splitting_ground_instanton(v, 1.0 / inv);
    auto e = splitting_excited(v, 0, 1.0 / inv, EnergyRule::harmonic);
    worst_g = std::max(worst_g, std::abs(g.diag("log_minus_lambda") - target_g));
    worst_e = std::max(worst_e, std::abs(e.diag("log_minus_lambda")));
    worst_ratio = std::max(worst_ratio, std::abs(g.value / e.value - target_ratio));
  }
  bool pass = worst_g <= 0.05 && worst_e <= 0.05 && worst_ratio <= 1e-6;
  auto g = splitting_ground_instanton(v, 1.0 / 12);
  auto e = splitting_excited(v, 0, 1.0 / 12, EnergyRule::harmonic);
  return {pass, fmt("ground level offset %.2e (<= 0.05), excited level offset %.2e (<= 0.05), "
                    "ratio %.8f vs sqrt(pi/2) = %.8f (|diff| %.2e, <= 1e-6)",
                    worst_g, worst_e, g.value / e.value, target_ratio, worst_ratio)};
}

Verdict criterion4() {
  auto v = Potential::quartic_double_well(1);
  auto c = asymptotic_constants(v);
  double w = 2 * std::numbers::sqrt2;
  double b_ref = std::numbers::pi / (24 * std::pow(w, 7)) * (5 * 24.0 * 24.0 - 3 * w * w * 24.0);
  auto a = asymptotic_actions(c, 1e-3);
  auto t = double_well_table(v, 1e-3);
  double dc = std::abs(a.barrier - t[OrbitKind::c].action), dr = std::abs(a.lateral - t[OrbitKind::r].action);
  double da = std::abs(c.A - std::numbers::ln2), db = std::abs(c.B - b_ref);
  return {da < 1e-10 && db < 1e-10 && dc < 1e-5 && dr < 1e-5,
          fmt("|A - ln2| %.2e, |B - ref| %.2e (< 1e-10); barrier action %.2e, lateral action %.2e (< 1e-5)", da, db,
              dc, dr)};
}

Verdict criterion5() {
  auto t0 = std::chrono::steady_clock::now();
  auto p = Potential::pendulum(1);
  bool pass = true;
  std::string detail;
  for (int n = 3; n <= 9; ++n) {
    struct Point {
      double exponent, ln_ratio;
      bool inside;
    };
    std::vector<Point> pts;
    for (double f : {1.15, 1.6, 2.5}) {
      double hbar = std::numbers::sqrt2 / n * f;
      auto ex = pendulum_splitting_mathieu(1, n, hbar);
      auto sc = splitting_excited(p, n, hbar);
      bool inside = std::min(ex.diag("E_plus"), ex.diag("E_minus")) > 1;
      pts.push_back({sc.diag("barrier_action") / hbar, std::log(ex.value / sc.value), inside});
    }
    std::sort(pts.begin(), pts.end(), [](auto& a, auto& b) { return a.exponent < b.exponent; });
    bool ok = true;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      ok = ok && pts[i].inside;
      if (i > 0) ok = ok && std::abs(pts[i].ln_ratio) < std::abs(pts[i - 1].ln_ratio);
    }
    ok = ok && std::abs(pts.back().ln_ratio) < 0.3;
    pass = pass && ok;
    detail += fmt(" n=%d[%+.4f %+.4f %+.4f]%s", n, pts[0].ln_ratio, pts[1].ln_ratio, pts[2].ln_ratio, ok ? "" : "!");
  }
  double secs = seconds_since(t0);
  pass = pass && secs < 60;
  return {pass, "ln ratios ordered by tunnelling exponent:" + detail + fmt(", %.1f s (limit 60 s)", secs)};
}

Verdict criterion6() {
  auto v = Potential::triple_well(1.75, 0.5);
  double top = well_bounds(v, 1.75).top;
  std::vector<double> es;
  for (int k = 1; k <= 50; ++k) es.push_back(top * k / 51);
  auto r = period_ratio_check(v, es);
  return {r.max_deviation < 1e-6, fmt("max |T_m/T_r - 2| = %.2e over 50 energies (< 1e-6)", r.max_deviation)};
}

std::vector<double> sign_change_roots(const std::function<double(double)>& f, double lo, double hi, double step) {
  std::vector<double> roots;
  double x0 = lo, f0 = f(lo);
  for (double x1 = lo + step; x1 <= hi + 1e-12; x1 += step) {
    double f1 = f(x1);
    if ((f0 < 0) != (f1 < 0)) roots.push_back(bracketed_root(f, x0, x1, 1e-12));
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

Verdict criterion7() {
  auto v = Potential::triple_well(1.75, 0.5);
  auto divergence = [&](double x) {
    auto r = resonance_data(v, 0, 1 / x);
    return std::sin(std::numbers::pi * (2 * r.nu_r - r.nu_m));
  };
  auto spikes = sign_change_roots(divergence, 4, 10, 0.01);
  std::vector<double> crossings;
  for (int k = 0; k < 40; ++k) {
    auto c = sign_change_roots([&](double x) { return resonance_data(v, 0, 1 / x).nu_m - k; }, 4, 10, 0.01);
    crossings.insert(crossings.end(), c.begin(), c.end());
  }
  std::sort(crossings.begin(), crossings.end());
  bool located = !spikes.empty() && spikes.size() == crossings.size();
  double worst_cross = 0;
  for (std::size_t i = 0; located && i < spikes.size(); ++i)
    worst_cross = std::max(worst_cross, std::abs(spikes[i] - crossings[i]));

  auto exact = [&](double x) {
    double hbar = 1 / x;
    auto s = diagonalize(build_hamiltonian(v, BasisSpec::grid(2.6, 512, hbar)), 24);
    return splitting_near(s, resonance_data(v, 0, hbar).energy).value;
  };
  std::vector<double> xs, ys;
  for (double x = 4; x <= 10 + 1e-9; x += 0.02) {
    xs.push_back(x);
    ys.push_back(std::log(exact(x)));
  }
  std::vector<double> maxima;
  for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
    if (ys[i] > ys[i - 1] && ys[i] > ys[i + 1]) {
      auto r = boost::math::tools::brent_find_minima([&](double x) { return -std::log(exact(x)); }, xs[i - 1],
                                                     xs[i + 1], 30);
      maxima.push_back(r.first);
    }
  }
  double worst_peak = 0;
  for (double s : spikes) {
    double best = 1e300;
    for (double m : maxima) best = std::min(best, std::abs(m - s));
    worst_peak = std::max(worst_peak, best);
  }

  bool heights_ok = spikes.size() >= 3;
  std::string heights;
  if (heights_ok) {
    double x3 = spikes[2], hbar = 1 / x3, prev = 0;
    for (int k : {5, 30, 100}) {
      double h = resonant_splitting_sum(v, 0, hbar, resonant_time(v, 0, hbar, k)).value;
      heights += fmt(" K=%d:%.3e", k, h);
      heights_ok = heights_ok && h > prev;
      prev = h;
    }
    heights = fmt(" third spike at 1/hbar = %.3f;", x3) + heights;
  }
  bool pass = located && worst_cross < 0.05 && worst_peak < 0.1 && heights_ok;
  std::string where;
  for (double s : spikes) where += fmt(" %.3f", s);
  return {pass, fmt("%zu spikes at", spikes.size()) + where +
                    fmt("; max offset to integer nu_m %.2e (< 0.05), to exact maxima %.3f (< 0.1);", worst_cross,
                        worst_peak) +
                    heights};
}

Verdict criterion8() {
  struct Case {
    std::string name;
    Potential v;
    OrbitTopology t;
  };
  auto dw = Potential::quartic_double_well(1);
  auto tw = Potential::triple_well(1.75, 0.5);
  auto pe = Potential::pendulum(1);
  auto tps = triple_well_topology(tw, 1.5, 0, 0).turning_points;
  std::vector<Case> cases = {
      {"dw r", dw, double_well_topology(dw, 0.3, 1, 0, 1)},
      {"dw 2r", dw, double_well_topology(dw, 0.3, 2, 0, 1)},
      {"dw c", dw, double_well_topology(dw, 0.3, 0, 1, 1)},
      {"dw r+c", dw, double_well_topology(dw, 0.3, 1, 1, 1)},
      {"dw r, eta=-1", dw, double_well_topology(dw, 0.3, 1, 0, -1)},
      {"dw 2r, eta=-1", dw, double_well_topology(dw, 0.3, 2, 0, -1)},
      {"tw r-c-m-c-l", tw, triple_well_topology(tw, 1.5, 0, 0)},
      {"tw 2 windings", tw, triple_well_topology(tw, 1.5, 1, 1)},
      {"tw m loop", tw, from_sequence(tw, 1.5, {tps[2], tps[3], tps[2]}, 1)},
      {"tw r loop", tw, from_sequence(tw, 1.5, {tps[4], tps[5], tps[4]}, 1)},
      {"pendulum eta=-1", pe, pendulum_topology(pe, 2.0, 1, 0, -1)},
      {"pendulum r+c", pe, pendulum_topology(pe, 2.0, 1, 1, 1)},
  };
  double closure = 0, action = 0, period = 0, det = 0;
  for (auto& c : cases) {
    auto o = build_real_q_orbit(c.v, c.t);
    closure = std::max(closure, o.closure_residual);
    action = std::max(action, o.action_residual);
    period = std::max(period, o.period_residual);
    det = std::max(det, o.determinant_residual);
  }
  bool pass = closure < 1e-8 && action < 1e-8 && period < 1e-8 && det < 1e-8;
  return {pass, fmt("%zu topologies: max closure %.1e, action %.1e, period %.1e, |det M - 1| %.1e (all < 1e-8)",
                    cases.size(), closure, action, period, det)};
}

Verdict criterion9() {
  auto v = Potential::island({0, 0, 0.5, 0, -1.0 / 64});
  double e = 2;
  double island = torus_action(v, WellRegion::around(0), e).action;
  std::vector<double> xs, ys;
  double barrier = 0, worst_energy = 0;
  for (int n = 0; n < 200; ++n) {
    double hbar = island / (2 * std::numbers::pi * (n + 0.5));
    if (1 / hbar < 5) continue;
    if (1 / hbar > 15) break;
    auto g = escape_rate(v, n, hbar);
    worst_energy = std::max(worst_energy, std::abs(g.diag("energy") - e));
    barrier = g.diag("barrier_action");
    xs.push_back(1 / hbar);
    ys.push_back(std::log(g.value));
  }
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= double(xs.size());
  my /= double(xs.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  double slope = sxy / sxx, slope_rel = std::abs(slope / -barrier - 1);

  std::vector<double> steep(43, 0.0);
  steep[2] = 0.5;
  steep[42] = -0.5;
  auto hard = Potential::island(steep);
  double top = well_bounds(hard, 0).top, es = 0.1 * top;
  double quad = escape_rate_at(hard, es, 0.1).diag("barrier_action");
  double sharp = sharp_island_action(es, 1, std::numbers::pi);
  double sharp_rel = std::abs(sharp / quad - 1);
  bool pass = xs.size() >= 3 && slope_rel < 0.02 && sharp_rel < 0.05;
  return {pass, fmt("%zu levels at E = %.1f (|E_n - E| <= %.1e): slope %.5f vs -S_c %.5f (rel %.1e, < 2%%); "
                    "sharp island %.5f vs quadrature %.5f (rel %.2f%%, < 5%%)",
                    xs.size(), e, worst_energy, slope, -barrier, slope_rel, sharp, quad, 100 * sharp_rel)};
}

Verdict criterion10() {
  auto v = Potential::quartic_double_well(1);
  auto s = quartic_spectrum();
  double w = 2 * std::numbers::sqrt2, worst = 0, worst_at = 0;
  for (double x = 5; x <= 15 + 1e-9; x += 1) {
    cplx t(0, -x / w);
    cplx exact = trace_U(s, t), semi = equilibrium_trace(v, t, hbar12);
    double rel = std::abs(semi / exact - 1.0);
    if (rel > worst) {
      worst = rel;
      worst_at = x;
    }
  }
  return {worst < 0.02, fmt("max relative deviation %.2f%% at -w Im T = %.0f (< 2%%)", 100 * worst, worst_at)};
}

const std::vector<std::function<Verdict()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                        criterion6, criterion7, criterion8, criterion9, criterion10};

bool report(int k) {
  Verdict v;
  try {
    v = criteria[std::size_t(k - 1)]();
  } catch (const std::exception& e) {
    v = {false, std::string("exception: ") + e.what()};
  }
  std::printf("criterion %2d: %s  %s\n", k, v.pass ? "PASS" : "FAIL", v.detail.c_str());
  std::fflush(stdout);
  return v.pass;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc == 3 && std::strcmp(argv[1], "--criterion") == 0) {
    int k = std::atoi(argv[2]);
    if (k < 1 || k > int(criteria.size())) {
      std::fprintf(stderr, "acceptance: criterion must be 1..%zu\n", criteria.size());
      return 2;
    }
    return report(k) ? 0 : 1;
  }
  bool summary_only = argc == 2 && std::strcmp(argv[1], "--report") == 0;
  if (argc > 1 && !summary_only) {
    std::fprintf(stderr, "usage: acceptance [--criterion k | --report]\n");
    return 2;
  }
  int failed = 0;
  for (int k = 1; k <= int(criteria.size()); ++k) failed += report(k) ? 0 : 1;
  std::printf("%d of %zu criteria pass\n", int(criteria.size()) - failed, criteria.size());
  return summary_only || failed == 0 ? 0 : 1;
}
