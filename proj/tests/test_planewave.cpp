#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "su11/planewave.hpp"

using namespace su11;

namespace {

OpticalModel<double> bbo() { return OpticalModel<double>::sellmeier_bbo(354.6e-9); }
const double kL1 = 2e-3;

Grid<double> paper_grid(Index n = 401) { return Grid<double>(3e5, n); }

}  // namespace

TEST_CASE("zero gain is the identity channel") {
  const auto m = bbo();
  const auto g = paper_grid(101);
  const auto t = single_crystal_pw(m, kL1, 0.0, g);
  for (Index i = 0; i < g.size(); ++i) {
    CHECK(std::abs(t.beta[i]) == 0.0);
    CHECK(std::abs(t.eta[i]) == doctest::Approx(1.0).epsilon(1e-14));
  }
  const auto sp = pw_spectra(t);
  CHECK(sp.intensity.maxCoeff() == 0.0);
}

TEST_CASE("collinear intensity follows sinh^2(G)") {
  const auto m = bbo();
  const auto g = paper_grid(101);
  const Index iz = g.zero_index();
  for (double G : {0.1, 1.0, 3.0, 5.0}) {
    const double gamma0 = G / kL1;
    const auto sp = pw_spectra(single_crystal_pw(m, kL1, gamma0, g));
    CHECK(sp.intensity[iz] ==
          doctest::Approx(std::pow(std::sinh(G), 2)).epsilon(1e-12));
  }
  // the quoted value at G = 1
  const auto sp = pw_spectra(single_crystal_pw(m, kL1, 1.0 / kL1, g));
  CHECK(sp.intensity[iz] == doctest::Approx(1.3810978455418157).epsilon(1e-12));
}

TEST_CASE("removable singularity at g = 0") {
  // choose gamma0 so that 2 gamma0 = delta_k at some grid point
  const auto m = bbo();
  const auto g = paper_grid(201);
  const double q_star = g.q(g.zero_index() + 60);
  const double gamma0 = delta_k_pw(m, q_star) / 2.0;
  const auto t = single_crystal_pw(m, kL1, gamma0, g);
  const Index i_star = g.zero_index() + 60;
  // closed-form limit: beta = Gamma0 L1 e^{i dk L1 / 2}
  const Complex expected =
      gamma0 * kL1 * std::exp(Complex(0, delta_k_pw(m, q_star) * kL1 / 2));
  CHECK(std::abs(t.beta[i_star] - expected) < 1e-14 * std::abs(expected));
  // and the ODE oracle agrees
  const auto o = pw_ode_oracle(m, kL1, gamma0, q_star, Configuration::Single, 0.0, 40000);
  CHECK(std::abs(t.beta[i_star] - o.beta) < 1e-10 * std::abs(o.beta));
  CHECK(std::abs(t.eta[i_star] - o.eta) < 1e-10 * std::abs(o.eta));
}

TEST_CASE("ODE oracle: trivial and collinear checks") {
  const auto m = bbo();
  const auto zero = pw_ode_oracle(m, kL1, 0.0, 1e4);
  CHECK(std::abs(zero.beta) == 0.0);
  CHECK(std::abs(zero.eta - Complex(1, 0)) == 0.0);

  const auto col = pw_ode_oracle(m, kL1, 1.0 / kL1, 0.0, Configuration::Single, 0.0, 10000);
  CHECK(std::abs(col.beta - Complex(std::sinh(1.0), 0)) < 1e-10);
}

TEST_CASE("closed forms match the ODE oracle across gain regimes") {
  const auto m = bbo();
  const auto g = paper_grid(201);
  std::mt19937 rng(17);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(g.size()) - 1);
  for (double G : {0.5, 2.0}) {
    const double gamma0 = G / kL1;
    const auto t = single_crystal_pw(m, kL1, gamma0, g);
    for (int trial = 0; trial < 12; ++trial) {
      const Index i = pick(rng);
      const auto o = pw_ode_oracle(m, kL1, gamma0, g.q(i), Configuration::Single, 0.0, 20000);
      CHECK(std::abs(t.beta[i] - o.beta) <= 1e-9 * std::max(1.0, std::abs(o.beta)));
      CHECK(std::abs(t.eta[i] - o.eta) <= 1e-9 * std::abs(o.eta));
    }
  }
}

TEST_CASE("non-compensated interferometer") {
  const auto m = bbo();
  const auto g = paper_grid(201);
  const Index iz = g.zero_index();
  const double G = 1.0, gamma0 = G / kL1;

  // phi = 0: two crystals act as one of double length (collinear)
  const auto sum = pw_spectra(su11_noncompensated_pw(m, kL1, gamma0, 0.0, g));
  CHECK(sum.intensity[iz] == doctest::Approx(std::pow(std::sinh(2 * G), 2)).epsilon(1e-10));
  CHECK(sum.intensity[iz] ==
        doctest::Approx(4 * std::pow(std::sinh(G) * std::cosh(G), 2)).epsilon(1e-10));

  // phi = pi: collinear destructive interference
  const auto dark = pw_spectra(su11_noncompensated_pw(m, kL1, gamma0, pi, g));
  CHECK(dark.intensity[iz] < 1e-20);

  // Bogoliubov constraint at random phases and momenta
  std::mt19937 rng(23);
  std::uniform_real_distribution<double> uphi(0.0, 2 * pi);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(g.size()) - 1);
  for (int trial = 0; trial < 100; ++trial) {
    const double phi = uphi(rng);
    const Index i = pick(rng);
    const auto e = pw_su11_elem(m, kL1, gamma0, phi, Configuration::NoncompensatedSecond, g.q(i));
    CHECK(std::norm(e.eta) - std::norm(e.beta) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("non-compensated output intensity matches the printed closed form") {
  const auto m = bbo();
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> uphi(0.0, 2 * pi), uq(-2.5e5, 2.5e5);
  for (double G : {0.7, 2.5}) {
    const double gamma0 = G / kL1;
    for (int trial = 0; trial < 40; ++trial) {
      const double q = uq(rng), phi = uphi(rng);
      const auto e = pw_su11_elem(m, kL1, gamma0, phi, Configuration::NoncompensatedSecond, q);
      const double dk = delta_k_pw(m, q);
      const Complex gg = std::sqrt(Complex(4 * gamma0 * gamma0 - dk * dk, 0));
      const Complex x = gg * kL1 / 2.0;
      const Complex n1 = std::pow(2.0 * gamma0 / gg * std::sinh(x), 2);  // real-valued
      const Complex bracket =
          std::exp(Complex(0, phi)) * (std::cosh(x) + Complex(0, dk) / gg * std::sinh(x)) +
          (std::cosh(x) - Complex(0, dk) / gg * std::sinh(x));
      const double expected = n1.real() * std::norm(bracket);
      CHECK(std::norm(e.beta) == doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("compensated interferometer obeys the cos^2 law") {
  const auto m = bbo();
  const auto g = paper_grid(201);
  const double G = 1.0, gamma0 = G / kL1;
  const Index iz = g.zero_index();

  const auto bright = pw_spectra(su11_compensated_pw(m, kL1, gamma0, 0.0, g));
  CHECK(bright.intensity[iz] ==
        doctest::Approx(4 * std::pow(std::sinh(G) * std::cosh(G), 2)).epsilon(1e-10));

  const auto dark = pw_spectra(su11_compensated_pw(m, kL1, gamma0, pi, g));
  CHECK(dark.intensity.maxCoeff() < 1e-20);

  for (double phi : {0.4, 1.3, 2.2, 3.8, 5.6}) {
    const auto sp = pw_spectra(su11_compensated_pw(m, kL1, gamma0, phi, g));
    const double scale = std::pow(std::cos(phi / 2), 2);
    for (Index i = 0; i < g.size(); i += 17) {
      if (bright.intensity[i] > 0)
        CHECK(sp.intensity[i] / bright.intensity[i] == doctest::Approx(scale).epsilon(1e-10));
    }
  }

  // matches the printed compensated transfer functions
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> uphi(0.0, 2 * pi), uq(-2.5e5, 2.5e5);
  for (int trial = 0; trial < 40; ++trial) {
    const double q = uq(rng), phi = uphi(rng);
    const auto e = pw_su11_elem(m, kL1, gamma0, phi, Configuration::CompensatedSecond, q);
    const double dk = delta_k_pw(m, q);
    const Complex gg = std::sqrt(Complex(4 * gamma0 * gamma0 - dk * dk, 0));
    const Complex one_plus = 1.0 + std::exp(Complex(0, phi));
    const Complex beta_ref = gamma0 / gg *
                             (Complex(0, dk) / gg * (std::cosh(gg * kL1) - 1.0) +
                              std::sinh(gg * kL1)) *
                             one_plus;
    const Complex eta_ref =
        1.0 + 2.0 * gamma0 * gamma0 / (gg * gg) * (std::cosh(gg * kL1) - 1.0) * one_plus;
    CHECK(std::abs(e.beta - beta_ref) < 1e-11 * std::max(1.0, std::abs(beta_ref)));
    CHECK(std::abs(e.eta - eta_ref) < 1e-11 * std::abs(eta_ref));
  }
}

TEST_CASE("transfer functions are even in q") {
  const auto m = bbo();
  const auto g = paper_grid(101);
  const auto t = su11_compensated_pw(m, kL1, 1.0 / kL1, 0.7, g);
  for (Index i = 0; i < g.size(); ++i) {
    CHECK(std::abs(t.beta[i] - t.beta[g.mirror(i)]) < 1e-13 * (1 + std::abs(t.beta[i])));
    CHECK(std::abs(t.eta[i] - t.eta[g.mirror(i)]) < 1e-13 * std::abs(t.eta[i]));
  }
}

TEST_CASE("compensated sensitivity density") {
  const auto m = bbo();
  const auto g = paper_grid(401);
  const double G = 2.0, gamma0 = G / kL1;
  const auto first = pw_spectra(single_crystal_pw(m, kL1, gamma0, g));
  const auto sens = sensitivity_density_pw(first);

  // f attains its minimum at phi = pi and is symmetric about it
  const double fpi = sens.f(pi);
  CHECK(sens.f_min() == doctest::Approx(fpi).epsilon(1e-12));
  for (double x : {0.3, 0.9, 1.8}) {
    CHECK(sens.f(pi - x) == doctest::Approx(sens.f(pi + x)).epsilon(1e-12));
    CHECK(sens.f(pi - x) >= fpi);
  }

  // divergence at phi = 2 pi k reported as infinity
  CHECK(std::isinf(sens.delta_phi_density(0.0)));
  CHECK(sens.diverges(0.0));
  CHECK(!sens.diverges(pi));

  // f_min identity via the plane-wave Schmidt number, any L_x
  for (double lx : {0.3, 1.0, 170.0}) {
    const double kpw = schmidt_number_pw(first, lx);
    const double via_k = 1.0 / (2.0 * std::sqrt(1.0 + lx * sens.n_tot1 / kpw));
    CHECK(sens.f_min() == doctest::Approx(via_k).epsilon(1e-12));
  }
}

TEST_CASE("low gain limit of the optimal sensitivity") {
  const auto m = bbo();
  const auto g = paper_grid(401);
  const auto first = pw_spectra(single_crystal_pw(m, kL1, 0.01 / kL1, g));
  const auto sens = sensitivity_density_pw(first);
  CHECK(sens.f_min() == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("closed-form sensitivity equals the generic error-propagation route") {
  const auto m = bbo();
  const auto g = paper_grid(401);
  const double gamma0 = 1.5 / kL1;
  const auto first = pw_spectra(single_crystal_pw(m, kL1, gamma0, g));
  const auto sens = sensitivity_density_pw(first);

  std::vector<double> phis;
  for (int i = 1; i < 24; ++i) phis.push_back(0.25 + (2 * pi - 0.5) * i / 24.0);
  const auto sweep =
      pw_phase_sweep(m, kL1, gamma0, Configuration::CompensatedSecond, phis, g);
  for (const auto& p : sweep) {
    CHECK(p.delta_phi == doctest::Approx(sens.delta_phi_density(p.phi)).epsilon(1e-8));
    CHECK(p.f == doctest::Approx(sens.f(p.phi)).epsilon(1e-8));
  }
}

TEST_CASE("non-compensated sensitivity never beats shot noise") {
  const auto m = bbo();
  const auto g = paper_grid(401);
  std::vector<double> phis;
  for (int i = 0; i <= 160; ++i) phis.push_back(0.04 + (2 * pi - 0.08) * i / 160.0);
  for (double G : {1.25, 2.5, 3.75, 5.0}) {
    const auto sweep =
        pw_phase_sweep(m, kL1, G / kL1, Configuration::NoncompensatedSecond, phis, g);
    double fmin = std::numeric_limits<double>::infinity();
    for (const auto& p : sweep) fmin = std::min(fmin, p.f);
    CHECK(fmin >= 0.999);
  }
}

TEST_CASE("plane-wave Schmidt number") {
  const auto g = Grid<double>(4.0, 801);

  // flat spectrum on a support of width W: K = W * L_x ... per unit L_x = W
  RVector n = RVector::Zero(g.size());
  for (Index i = 0; i < g.size(); ++i)
    if (std::abs(g.q(i)) <= 1.0) n[i] = 2.5;
  PwSpectra<double> flat{g, n, n};
  const double w_eff = quadrature(g, n) / 2.5;  // discrete support width
  CHECK(schmidt_number_pw(flat, 1.0) == doctest::Approx(w_eff).epsilon(1e-12));
  CHECK(schmidt_number_pw(flat, 7.0) == doctest::Approx(7.0 * w_eff).epsilon(1e-12));

  // Gaussian spectrum: K = w sqrt(2 pi) per unit length (analytic integrals)
  const double w = 0.8;
  RVector gauss(g.size());
  for (Index i = 0; i < g.size(); ++i) gauss[i] = std::exp(-g.q(i) * g.q(i) / (w * w));
  PwSpectra<double> gsp{g, gauss, gauss};
  CHECK(schmidt_number_pw(gsp, 1.0) == doctest::Approx(w * std::sqrt(2 * pi)).epsilon(1e-9));

  PwSpectra<double> zero{g, RVector::Zero(g.size()), RVector::Zero(g.size())};
  CHECK_THROWS_AS(schmidt_number_pw(zero, 1.0), std::domain_error);
}

TEST_CASE("two-crystal oracle agrees with the composed closed form") {
  const auto m = bbo();
  const auto g = paper_grid(101);
  std::mt19937 rng(41);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(g.size()) - 1);
  std::uniform_real_distribution<double> uphi(0.0, 2 * pi);
  const double gamma0 = 1.2 / kL1;
  for (auto config : {Configuration::NoncompensatedSecond, Configuration::CompensatedSecond}) {
    for (int trial = 0; trial < 6; ++trial) {
      const Index i = pick(rng);
      const double phi = uphi(rng);
      const auto closed = pw_su11_elem(m, kL1, gamma0, phi, config, g.q(i));
      const auto oracle = pw_ode_oracle(m, kL1, gamma0, g.q(i), config, phi, 40000);
      CHECK(std::abs(closed.beta - oracle.beta) <= 1e-9 * std::max(1.0, std::abs(oracle.beta)));
      CHECK(std::abs(closed.eta - oracle.eta) <= 1e-9 * std::abs(oracle.eta));
    }
  }
}
