#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "su11/optics.hpp"

using namespace su11;

namespace {
// toy model in SI units: k_p = 2e7, k_s = k_i = 1e7
OpticalModel<double> toy_model() { return OpticalModel<double>::custom(354.6e-9, 2e7, 1e7, 1e7); }
}  // namespace

TEST_CASE("perfect collinear matching") {
  const auto m = OpticalModel<double>::perfect_collinear(354.6e-9, 1.6);
  CHECK(delta_k(m, 0.0, 0.0) == 0.0);  // exact, cancellation-free form
  CHECK(m.k_p == doctest::Approx(m.k_s + m.k_i).epsilon(1e-15));
  // quadratic growth of the mismatch on the correlation line
  const double q = 1e5;
  CHECK(delta_k_pw(m, q) == doctest::Approx(q * q / m.k_s).epsilon(1e-3));
}

TEST_CASE("delta_k symmetry and evenness") {
  const auto m = toy_model();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-3e6, 3e6);
  for (int i = 0; i < 100; ++i) {
    const double qs = u(rng), qi = u(rng);
    CHECK(delta_k(m, qs, qi) == delta_k(m, qi, qs));
  }
  for (int i = 0; i < 20; ++i) {
    const double q = u(rng);
    CHECK(delta_k_pw(m, q) == delta_k_pw(m, -q));
  }
}

TEST_CASE("delta_k against a long-double evaluation of the closed form") {
  // k_p = 2, k_s = k_i = 1 in units of 1e7/m, q_s = -q_i = 0.1 of those units
  const auto m = toy_model();
  const double got = delta_k(m, 1e6, -1e6);
  const long double kp = 2e7L, ks = 1e7L, q = 1e6L;
  const long double want = sqrtl(kp * kp) - 2.0L * sqrtl(ks * ks - q * q);
  CHECK(got == doctest::Approx(static_cast<double>(want)).epsilon(1e-12));
  CHECK(got == doctest::Approx(0.010025 * 1e7).epsilon(1e-4));
}

TEST_CASE("delta_k rejects evanescent arguments") {
  const auto m = toy_model();
  CHECK_THROWS_AS(delta_k(m, 1.1e7, 0.0), std::domain_error);
  CHECK_THROWS_AS(delta_k(m, 0.0, -1.2e7), std::domain_error);
  // pump bound trips first when k_p < k_s + k_i
  const auto short_kp = OpticalModel<double>::custom(354.6e-9, 1.5e7, 1e7, 1e7);
  CHECK_THROWS_AS(delta_k(short_kp, 0.8e7, 0.8e7), std::domain_error);
}

TEST_CASE("h factor phases") {
  const auto m = toy_model();
  const auto pump = PumpModel<double>::gaussian_fwhm(50e-6);
  const double L1 = 2e-3;

  CrystalGeometry<double> single(L1, Configuration::Single, pump);
  CrystalGeometry<double> ncomp(L1, Configuration::NoncompensatedSecond, pump);
  CrystalGeometry<double> comp(L1, Configuration::CompensatedSecond, pump);

  const double qs = 2e5, qi = -1e5;

  // crystal 1, L = 0: no accumulated phase
  CHECK(h_factor(single, m, 1, qs, qi, 0.0) == Complex(1, 0));
  // compensated crystal 2 at L = L1: drive returns to zero
  CHECK(std::abs(h_factor(comp, m, 2, qs, qi, L1) - Complex(1, 0)) < 1e-12);
  // continuity across the (zero-width) gap for the non-compensated pair
  CHECK(std::abs(h_factor(ncomp, m, 2, qs, qi, 0.0) - h_factor(ncomp, m, 1, qs, qi, L1)) < 1e-12);

  // pure phase everywhere, both configurations
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> uq(-3e6, 3e6), ul(0.0, L1);
  for (int i = 0; i < 50; ++i) {
    const double a = uq(rng), b = uq(rng), L = ul(rng);
    CHECK(std::abs(std::abs(h_factor(ncomp, m, 2, a, b, L)) - 1.0) < 1e-14);
    CHECK(std::abs(std::abs(h_factor(comp, m, 2, a, b, L)) - 1.0) < 1e-14);
    CHECK(std::abs(std::abs(h_factor(single, m, 1, a, b, L)) - 1.0) < 1e-14);
  }

  CHECK_THROWS_AS(h_factor(single, m, 2, qs, qi, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(h_factor(single, m, 3, qs, qi, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(h_factor(single, m, 1, qs, qi, 2 * L1), std::invalid_argument);
}

TEST_CASE("pump envelope") {
  const double sigma = 3e-5;
  const auto pump = PumpModel<double>::gaussian_sigma(sigma);
  CrystalGeometry<double> geom(2e-3, Configuration::Single, pump);
  Grid<double> grid(3e5, 101);

  CHECK(pump_envelope(geom, grid, 1e4, -1e4) == 1.0);
  // (q_s + q_i) sigma = 1 -> exp(-1/2)
  const double q = 1.0 / sigma;
  CHECK(pump_envelope(geom, grid, q, 0.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));

  // FWHM convention: intensity envelope exp(-u^2) halves at u = fwhm/2
  const auto p2 = PumpModel<double>::gaussian_fwhm(50e-6);
  CHECK(p2.fwhm() == doctest::Approx(50e-6).epsilon(1e-14));
  CHECK(p2.sigma == doctest::Approx(50e-6 / (2 * std::sqrt(std::log(2.0)))).epsilon(1e-14));
}

TEST_CASE("plane-wave pump is a discrete delta that sifts") {
  CrystalGeometry<double> geom(2e-3, Configuration::Single, PumpModel<double>::plane());
  Grid<double> grid(3e5, 101);
  RVector f(grid.size());
  for (Index i = 0; i < grid.size(); ++i) f[i] = std::cos(grid.q(i) / 1e5);

  for (Index is : {Index(0), Index(13), grid.zero_index(), Index(grid.size() - 1)}) {
    const double qs = grid.q(is);
    RVector env(grid.size());
    for (Index j = 0; j < grid.size(); ++j) env[j] = pump_envelope(geom, grid, qs, grid.q(j));
    const double sifted = quadrature(grid, RVector(env.cwiseProduct(f)));
    CHECK(sifted == doctest::Approx(f[grid.mirror(is)]).epsilon(1e-12));
  }
}

TEST_CASE("sellmeier bbo model") {
  const auto m = OpticalModel<double>::sellmeier_bbo(354.6e-9);
  // degenerate cut: collinear mismatch vanishes identically
  CHECK(delta_k(m, 0.0, 0.0) == 0.0);
  CHECK(m.k_p == doctest::Approx(2 * m.k_s).epsilon(1e-15));
  // ordinary index of BBO at 709.2 nm is about 1.66
  const double n_s = m.k_s * (2 * 354.6e-9) / (2 * pi);
  CHECK(n_s > 1.6);
  CHECK(n_s < 1.7);
  // known type-I degenerate cut angle near 33 degrees for a 354.6 nm pump
  CHECK(m.cut_angle * 180 / pi > 30.0);
  CHECK(m.cut_angle * 180 / pi < 36.0);

  // reduces to custom-k behaviour with the same magnitudes
  const auto c = OpticalModel<double>::custom(m.lambda_pump, m.k_p, m.k_s, m.k_i);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> u(-3e5, 3e5);
  for (int i = 0; i < 30; ++i) {
    const double qs = u(rng), qi = u(rng);
    CHECK(delta_k(m, qs, qi) == delta_k(c, qs, qi));
  }
}

TEST_CASE("external angle") {
  const auto m = OpticalModel<double>::sellmeier_bbo(354.6e-9);
  CHECK(m.k_s_vac == doctest::Approx(2 * pi / 709.2e-9).epsilon(1e-15));
  CHECK(external_angle(m, 0.0) == 0.0);
  CHECK(external_angle(m, 1e5) == doctest::Approx(1e5 / m.k_s_vac));
}
