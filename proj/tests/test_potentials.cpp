#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "tunnel/elliptic.hpp"
#include "tunnel/potential.hpp"
#include "tunnel/quadrature.hpp"
#include "tunnel/roots.hpp"
#include "tunnel/tridiagonal.hpp"

using namespace tunnel;
using Catch::Approx;

TEST_CASE("quartic double well values and derivatives") {
  auto v = Potential::quartic_double_well(1);
  CHECK(v(0) == 1);
  CHECK(v(1) == 0);
  CHECK(v(-1) == 0);
  CHECK(v.eval(1.0, 2) == 8);
  CHECK(v.eval(0.5, 1) == Approx(4 * 0.5 * (0.25 - 1)));
  CHECK(v.symmetric());
  CHECK(v.topology() == Topology::line);
  CHECK(harmonic_frequency(v, 1) == Approx(2 * std::numbers::sqrt2));
}

TEST_CASE("triple well has zeros at the well parameters") {
  auto v = Potential::triple_well(1.75, 0.5);
  for (double q : {1.75, -1.75, 0.5, -0.5}) CHECK(std::abs(v(q)) < 1e-12);
  CHECK(v(0) == Approx(-std::pow(1.75, 4) * 0.25));
  CHECK(v.symmetric());
}

TEST_CASE("polynomial derivatives agree with finite differences") {
  auto v = Potential::polynomial({0.3, -1, 0.5, 0.2, 1});
  for (double q : {-1.3, 0.1, 2.2}) {
    double h = 1e-5;
    CHECK(v.eval(q, 1) == Approx((v(q + h) - v(q - h)) / (2 * h)).epsilon(1e-8));
    CHECK(v.eval(q, 2) == Approx((v.eval(q + h, 1) - v.eval(q - h, 1)) / (2 * h)).epsilon(1e-8));
  }
  CHECK_FALSE(v.symmetric());
}

TEST_CASE("pendulum lives on the circle") {
  auto v = Potential::pendulum(2);
  CHECK(v.topology() == Topology::circle);
  CHECK(v(0) == -2);
  CHECK(v(std::numbers::pi) == Approx(2));
  auto z = v.eval(std::complex<double>(std::numbers::pi, 0.7), 0);
  CHECK(z.real() == Approx(2 * std::cosh(0.7)));
  CHECK(std::abs(z.imag()) < 1e-12);
}

TEST_CASE("invalid potential parameters are rejected") {
  CHECK_THROWS_AS(Potential::quartic_double_well(0), ContractViolation);
  CHECK_THROWS_AS(Potential::pendulum(-1), ContractViolation);
  CHECK_THROWS_AS(Potential::triple_well(0.5, 1.0), ContractViolation);
  CHECK_THROWS_AS(Potential::polynomial({}), ContractViolation);
}

TEST_CASE("turning points of the double well") {
  auto v = Potential::quartic_double_well(1);
  auto tp = turning_points(v, 0.25, -3, 3);
  REQUIRE(tp.size() == 4);
  double inner = std::sqrt(1 - 0.5), outer = std::sqrt(1 + 0.5);
  CHECK(tp[0].q == Approx(-outer));
  CHECK(tp[1].q == Approx(-inner));
  CHECK(tp[2].q == Approx(inner));
  CHECK(tp[3].q == Approx(outer));
  CHECK(tp[0].kind == TurnKind::enters_allowed);
  CHECK(tp[1].kind == TurnKind::enters_forbidden);
  CHECK_THROWS_AS(turning_points(v, 1.0, -3, 3), DegenerateTurningPoint);
}

TEST_CASE("critical points of the triple well") {
  auto v = Potential::triple_well(1.75, 0.5);
  auto c = critical_points(v, -3, 3);
  REQUIRE(c.size() == 5);
  CHECK(c[2] == Approx(0).margin(1e-12));
  CHECK(c[4] == Approx(1.75));
}

TEST_CASE("bracketed root and polynomial roots") {
  CHECK(bracketed_root([](double x) { return x * x - 2; }, 0.0, 2.0) == Approx(std::numbers::sqrt2).epsilon(1e-14));
  CHECK_THROWS_AS(bracketed_root([](double x) { return x * x + 1; }, 0.0, 2.0), SolverFailure);
  auto r = polynomial_real_roots({-6, 11, -6, 1}, -10, 10);
  REQUIRE(r.size() == 3);
  CHECK(r[0] == Approx(1));
  CHECK(r[2] == Approx(3));
}

TEST_CASE("Gauss-Legendre quadrature") {
  CHECK(integrate([](double x) { return std::exp(x); }, 0, 1).value == Approx(std::numbers::e - 1).epsilon(1e-13));
  auto semicircle = integrate_sine([](double, double lo, double hi, double jac) { return std::sqrt(lo * hi) * jac; },
                                   -1, 1, 1e-12);
  CHECK(semicircle.value == Approx(std::numbers::pi / 2).epsilon(1e-11));
}

TEST_CASE("complete elliptic integrals") {
  CHECK(elliptic_K(0) == Approx(std::numbers::pi / 2));
  CHECK(elliptic_E(0) == Approx(std::numbers::pi / 2));
  CHECK(elliptic_K(std::sqrt(0.5)) == Approx(1.8540746773013719).epsilon(1e-14));
  CHECK(elliptic_E(std::sqrt(0.5)) == Approx(1.3506438810476755).epsilon(1e-14));
  CHECK(elliptic_E(1) == 1);
  CHECK_THROWS_AS(elliptic_K(1), DomainError);
}

TEST_CASE("Mathieu characteristic values") {
  auto m = mathieu_characteristics(1.0, 2);
  CHECK(m.a(0) == Approx(-0.4551386041).epsilon(1e-9));
  CHECK(m.b(1) == Approx(3.9170247729).epsilon(1e-9));
  CHECK(m.a(1) == Approx(4.3713009827).epsilon(1e-9));
  auto zero = mathieu_characteristics(0.0, 3);
  CHECK(zero.a(3) == Approx(36));
  CHECK(zero.b(3) == Approx(36));
  auto p = mathieu_pair(1.0, 1);
  CHECK(p.a == Approx(m.a(1)));
}
