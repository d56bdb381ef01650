#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "tunnel/quantum.hpp"

using namespace tunnel;
using Catch::Approx;

namespace {

const SpectralDecomposition& quartic_spectrum() {
  static auto s = diagonalize(build_hamiltonian(Potential::quartic_double_well(1), BasisSpec::grid(4, 1024, 1.0 / 12)));
  return s;
}

}  // namespace

TEST_CASE("harmonic control reproduces (n + 1/2) hbar") {
  auto v = Potential::polynomial({0, 0, 0.5});
  auto s = diagonalize(build_hamiltonian(v, BasisSpec::grid(8, 256, 0.1)));
  auto levels = s.levels();
  for (int n = 0; n < 10; ++n) {
    CHECK(levels[n].energy == Approx((n + 0.5) * 0.1).epsilon(1e-10));
    CHECK(levels[n].parity == (n % 2 == 0 ? 1 : -1));
  }
  CHECK(s.edge_converged);
}

TEST_CASE("quartic ground doublet at hbar = 1/12") {
  auto& s = quartic_spectrum();
  auto d = exact_splitting(s, 0);
  CHECK(d.value == Approx(4.3336e-10).epsilon(1e-3));
  CHECK(d.diag("E_plus") == Approx(0.116052781311).epsilon(1e-10));
  CHECK(d.warnings.empty());
  auto d1 = exact_splitting(s, 1);
  CHECK(d1.value > 1e2 * d.value);
}

TEST_CASE("basis validation and topology checks") {
  CHECK_THROWS_AS(BasisSpec::grid(4, 8, 0.1), UnresolvedBasis);
  CHECK_THROWS_AS(BasisSpec::fourier_modes(4, 0.1), UnresolvedBasis);
  CHECK_THROWS_AS(BasisSpec::grid(4, 15, 0.1), ContractViolation);
  CHECK_THROWS_AS(build_hamiltonian(Potential::pendulum(1), BasisSpec::grid(4, 64, 0.1)), IncompatibleTopology);
  CHECK_THROWS_AS(build_hamiltonian(Potential::quartic_double_well(1), BasisSpec::fourier_modes(32, 0.1)),
                  IncompatibleTopology);
}

TEST_CASE("pendulum modes agree with Mathieu characteristic values") {
  double hbar = 0.5, gamma = 1;
  auto s = solve_spectrum(Potential::pendulum(gamma), hbar);
  auto m = mathieu_characteristics(mathieu_parameter(gamma, hbar), 4);
  for (int n = 0; n <= 4; ++n) CHECK(s.even_energies[n] == Approx(hbar * hbar / 8 * m.a(n)).epsilon(1e-10));
  for (int n = 1; n <= 4; ++n) CHECK(s.odd_energies[n - 1] == Approx(hbar * hbar / 8 * m.b(n)).epsilon(1e-10));
  auto w = pendulum_splitting_mathieu(gamma, 3, hbar);
  CHECK(w.value == Approx(std::abs(s.even_energies[3] - s.odd_energies[2])).epsilon(1e-6));
  CHECK(w.warnings.empty());
}

TEST_CASE("automatic basis refinement converges") {
  SolveOptions opt;
  opt.energy_cap = 2;
  auto s = solve_spectrum(Potential::quartic_double_well(1), 1.0 / 12, opt);
  CHECK(s.edge_converged);
  CHECK(exact_splitting(s, 0).value == Approx(4.3336e-10).epsilon(1e-2));
}

TEST_CASE("ground splitting from the trace ratio") {
  auto& s = quartic_spectrum();
  double exact = exact_splitting(s, 0).value;
  auto d = delta0_trace(s, {0, -4}, {{0, -4}, {5, -4}, {10, -4}});
  CHECK(d.value == Approx(exact).epsilon(1e-2));
  CHECK(d.diag("plateau_flatness") < 1e-2);
  CHECK(d.diag("separation") > 3);
  CHECK_THROWS_AS(delta0_trace(s, {1, 0.5}), DomainError);
}

TEST_CASE("trace of U matches the level sum") {
  auto& s = quartic_spectrum();
  cplx t(0.5, -3);
  cplx sum = 0;
  for (auto& l : s.levels()) sum += std::exp(cplx(0, -1) * l.energy * t / s.hbar());
  CHECK(std::abs(trace_U(s, t) - sum) < 1e-10 * std::abs(sum));
}

TEST_CASE("excited doublet through the quasi-projector") {
  auto& s = quartic_spectrum();
  double exact = exact_splitting(s, 1).value;
  auto d = deltan_trace(s, 1, {0, -4});
  CHECK(d.value == Approx(exact).epsilon(1e-3));
  auto p = QuasiProjector::doublet(s, 1);
  CHECK(p.idempotency_residual() < 1e-12);
}

TEST_CASE("power trick isolates an excited doublet") {
  auto& s = quartic_spectrum();
  auto ex = exact_splitting(s, 1);
  auto d = deltan_power_trick(s, 1, ex.diag("E_plus"), 1, {0, -80});
  CHECK(d.value == Approx(ex.value).epsilon(1e-3));
}

TEST_CASE("splitting near a reference energy") {
  auto& s = quartic_spectrum();
  auto ex = exact_splitting(s, 1);
  auto near = splitting_near(s, ex.diag("E_minus") + 1e-3);
  CHECK(near.value == Approx(ex.value));
}
