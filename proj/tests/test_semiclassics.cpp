#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "tunnel/semiclassics.hpp"

using namespace tunnel;
using Catch::Approx;

TEST_CASE("harmonic action is 2 pi E / w") {
  auto v = Potential::polynomial({0, 0, 2});
  double w = 2, e = 0.7;
  double q = std::sqrt(e / 2);
  auto r = action_allowed(v, e, -q, q);
  CHECK(r.action == Approx(2 * std::numbers::pi * e / w).epsilon(1e-10));
  CHECK(r.period == Approx(2 * std::numbers::pi / w).epsilon(1e-9));
  CHECK(action_allowed(v, e, -q, q, Traversals::once).action == Approx(r.action / 2));
}

TEST_CASE("region checks reject bad endpoints") {
  auto v = Potential::quartic_double_well(1);
  auto tp = turning_points(v, 0.3, -3, 3).positions();
  CHECK_THROWS_AS(action_allowed(v, 0.3, tp[1], tp[2]), ContractViolation);
  CHECK_NOTHROW(action_forbidden(v, 0.3, tp[1], tp[2]));
  CHECK_THROWS(action_allowed(v, 0.3, 0.5, tp[3]));
}

TEST_CASE("double-well table at small energy") {
  auto v = Potential::quartic_double_well(1);
  auto t = double_well_table(v, 0.3);
  REQUIRE(t.has(OrbitKind::r));
  REQUIRE(t.has(OrbitKind::c));
  CHECK(t[OrbitKind::r].period == Approx(2.37240626).epsilon(1e-8));
  CHECK(t[OrbitKind::c].period == Approx(3.88627883).epsilon(1e-8));
  double h = 1e-5;
  double dsr = (double_well_table(v, 0.3 + h)[OrbitKind::r].action - double_well_table(v, 0.3 - h)[OrbitKind::r].action) / (2 * h);
  double dsc = (double_well_table(v, 0.3 + h)[OrbitKind::c].action - double_well_table(v, 0.3 - h)[OrbitKind::c].action) / (2 * h);
  CHECK(dsr == Approx(t[OrbitKind::r].period).epsilon(1e-7));
  CHECK(-dsc == Approx(t[OrbitKind::c].period).epsilon(1e-7));
  CHECK_THROWS_AS(double_well_table(v, 1.2), AboveBarrier);
}

TEST_CASE("pendulum closed forms match quadrature") {
  for (double e : {1.2, 2.0, 5.0}) {
    auto c = pendulum_actions(1, e);
    auto q = pendulum_actions_quadrature(1, e);
    CHECK(c.rotation_action == Approx(q.rotation_action).epsilon(1e-10));
    CHECK(c.rotation_period == Approx(q.rotation_period).epsilon(1e-9));
    CHECK(c.barrier_action == Approx(q.barrier_action).epsilon(1e-10));
    CHECK(c.barrier_period == Approx(q.barrier_period).epsilon(1e-9));
  }
  CHECK_THROWS_AS(pendulum_actions(1, 0.5), AboveBarrier);
}

TEST_CASE("EBK level of the quartic ground torus") {
  auto v = Potential::quartic_double_well(1);
  double hbar = 1.0 / 12;
  double e = ebk_energy(v, WellRegion::around(1), 0, hbar);
  CHECK(e == Approx(0.116521).epsilon(1e-5));
  CHECK(torus_action(v, WellRegion::around(1), e).action == Approx(std::numbers::pi * hbar).epsilon(1e-10));
}

TEST_CASE("asymptotic constants of the quartic") {
  auto c = asymptotic_constants(Potential::quartic_double_well(1));
  CHECK(std::abs(c.A - std::numbers::ln2) < 1e-10);
  double w = 2 * std::numbers::sqrt2;
  CHECK(std::abs(c.B - std::numbers::pi / (24 * std::pow(w, 7)) * (5 * 24 * 24 - 3 * w * w * 24)) < 1e-12);
  CHECK(c.barrier_action_at_zero == Approx(8 * std::numbers::sqrt2 / 3).epsilon(1e-12));
  auto a = asymptotic_actions(c, 1e-3);
  auto t = double_well_table(Potential::quartic_double_well(1), 1e-3);
  CHECK(std::abs(a.barrier - t[OrbitKind::c].action) < 1e-5);
  CHECK(std::abs(a.lateral - t[OrbitKind::r].action) < 1e-5);
}

TEST_CASE("ground instanton forms") {
  auto v = Potential::quartic_double_well(1);
  auto g = splitting_ground_instanton(v, 1.0 / 12);
  CHECK(g.value == Approx(4.3336e-10 * std::sqrt(std::numbers::pi)).epsilon(0.03));
  CHECK(g.diag("log_minus_lambda") == Approx(0.5 * std::log(std::numbers::pi)).epsilon(1e-12));
  auto h = splitting_excited(v, 0, 1.0 / 12, EnergyRule::harmonic);
  CHECK(std::abs(h.diag("log_minus_lambda")) < 1e-12);
}

TEST_CASE("pendulum splitting estimates") {
  auto p = Potential::pendulum(1);
  auto e = splitting_excited(p, 5, 0.5);
  CHECK(e.diag("energy") > 1);
  auto a = pendulum_splitting_asymptotic(5, 1, 0.5);
  CHECK(std::log(e.value / a.value) == Approx(0).margin(0.1));
  CHECK(pendulum_splitting_asymptotic(3, 0, 0.5).value == 0);
}

TEST_CASE("triple-well period ratio") {
  auto v = Potential::triple_well(1.75, 0.5);
  std::vector<double> es;
  auto b = well_bounds(v, 1.75);
  for (int k = 1; k <= 10; ++k) es.push_back(b.top * k / 11);
  auto r = period_ratio_check(v, es);
  CHECK(r.max_deviation < 1e-6);
  auto t = triple_well_table(v, 1.5);
  CHECK(t.has(OrbitKind::m));
  CHECK(t[OrbitKind::m].period / t[OrbitKind::r].period == Approx(2).epsilon(1e-8));
}

TEST_CASE("resonant sum approaches the limit") {
  auto v = Potential::triple_well(1.75, 0.5);
  double hbar = 1 / 6.5;
  auto lim = resonant_splitting_limit(v, 0, hbar);
  auto sum = resonant_splitting_sum(v, 0, hbar, resonant_time(v, 0, hbar, 2000));
  CHECK(sum.value == Approx(lim.value).epsilon(0.02));
  CHECK_THROWS_AS(resonant_splitting_sum(v, 0, hbar, {0.01, -0.01}), EmptyLatticeSum);
}

TEST_CASE("escape rate and the sharp island") {
  CHECK(sharp_island_action(1, 1, 4 * std::numbers::pi) == Approx(1.065680).epsilon(1e-5));
  CHECK_THROWS_AS(sharp_island_action(1, 1, 2 * std::numbers::pi), AboveBarrier);
  auto v = Potential::island({0, 0, 0.5, 0, -1.0 / 64});
  auto g = escape_rate(v, 3, 0.2);
  CHECK(g.value > 0);
  CHECK(g.diag("barrier_action") > 0);
}
