#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "su11/grid.hpp"
#include "su11/optics.hpp"
#include "su11/types.hpp"

namespace su11 {

/// Transfer functions of a plane-wave-pumped device: each signal momentum q
/// couples only to the idler momentum -q, so beta and eta-tilde are diagonal
/// (one complex amplitude per q).
template <class Scalar>
struct PwTransfer {
  Grid<Scalar> grid;
  CVectorT<Scalar> beta;
  CVectorT<Scalar> eta;  // eta-tilde, |eta|^2 - |beta|^2 = 1
};

/// Per-transverse-length densities: intensity N(q) and the diagonal
/// covariance density C(q) = N (1 + N).
template <class Scalar>
struct PwSpectra {
  Grid<Scalar> grid;
  RVectorT<Scalar> intensity;
  RVectorT<Scalar> covariance;
};

namespace detail {

/// sinh(z)/z, series below |z| < 1e-2 (keeps full precision through z = 0).
template <class Scalar>
ComplexT<Scalar> sinhc(ComplexT<Scalar> z) {
  if (std::abs(z) < Scalar(1e-2)) {
    const ComplexT<Scalar> z2 = z * z;
    return Scalar(1) + z2 / Scalar(6) * (Scalar(1) + z2 / Scalar(20) * (Scalar(1) + z2 / Scalar(42)));
  }
  return std::sinh(z) / z;
}

/// (cosh(z) - 1)/z^2; the direct form cancels catastrophically near z = 0.
template <class Scalar>
ComplexT<Scalar> coshm1_over_z2(ComplexT<Scalar> z) {
  if (std::abs(z) < Scalar(1e-2)) {
    const ComplexT<Scalar> z2 = z * z;
    return Scalar(0.5) +
           z2 / Scalar(24) * (Scalar(1) + z2 / Scalar(30) * (Scalar(1) + z2 / Scalar(56)));
  }
  return (std::cosh(z) - Scalar(1)) / (z * z);
}

}  // namespace detail

/// One SU(1,1) group element [[eta, beta], [beta*, eta*]]: the Bogoliubov
/// transformation of a single plane-wave mode pair.
template <class Scalar>
struct PwElem {
  ComplexT<Scalar> eta{Scalar(1), Scalar(0)};
  ComplexT<Scalar> beta{Scalar(0), Scalar(0)};
};

/// Group product: "second" applied after "first".
template <class Scalar>
PwElem<Scalar> pw_compose(const PwElem<Scalar>& second, const PwElem<Scalar>& first) {
  using std::conj;
  return {second.eta * first.eta + second.beta * conj(first.beta),
          second.eta * first.beta + second.beta * conj(first.eta)};
}

/// Transfer element of one crystal whose drive is h = exp(i(s delta_k L + c0))
/// over L in [0, L1].  Everything is evaluated in complex arithmetic with a
/// single branch g = sqrt(4 Gamma0^2 - delta_k^2), so the oscillatory regime
/// (imaginary g) needs no special casing.
template <class Scalar>
PwElem<Scalar> pw_crystal_elem(Scalar gamma0, Scalar dk, Scalar length, Scalar slope,
                               Scalar const_phase) {
  using C = ComplexT<Scalar>;
  const C g = std::sqrt(C(Scalar(4) * gamma0 * gamma0 - dk * dk, Scalar(0)));
  const C x = g * length / Scalar(2);
  const C sc = detail::sinhc(x);
  const C a_core = std::cosh(x) - C(Scalar(0), Scalar(1)) * (slope * dk * length / Scalar(2)) * sc;
  const C b_core = gamma0 * length * sc;
  const C half = C(Scalar(0), slope * dk * length / Scalar(2));
  const C ph_a = std::exp(half);
  const C ph_b = std::exp(half + C(Scalar(0), const_phase));
  return {a_core * ph_a, b_core * ph_b};
}

/// Single crystal, h = exp(i delta_k L):
///   beta = Gamma0 L1 sinhc(g L1 / 2) exp(i delta_k L1 / 2),
///   eta  = [cosh(g L1/2) - i (delta_k/g) sinh(g L1/2)] exp(i delta_k L1 / 2).
template <class Scalar>
PwTransfer<Scalar> single_crystal_pw(const OpticalModel<Scalar>& m, Scalar length, Scalar gamma0,
                                     const Grid<Scalar>& grid) {
  if (!(gamma0 >= Scalar(0))) throw std::invalid_argument("single_crystal_pw: gamma0 must be >= 0");
  PwTransfer<Scalar> t{grid, CVectorT<Scalar>(grid.size()), CVectorT<Scalar>(grid.size())};
  for (Index i = 0; i < grid.size(); ++i) {
    const PwElem<Scalar> e =
        pw_crystal_elem(gamma0, delta_k_pw(m, grid.q(i)), length, Scalar(1), Scalar(0));
    t.beta[i] = e.beta;
    t.eta[i] = e.eta;
  }
  return t;
}

template <class Scalar>
PwElem<Scalar> pw_su11_elem(const OpticalModel<Scalar>& m, Scalar length, Scalar gamma0, Scalar phi,
                            Configuration config, Scalar q) {
  const Scalar dk = delta_k_pw(m, q);
  const PwElem<Scalar> first = pw_crystal_elem(gamma0, dk, length, Scalar(1), Scalar(0));
  Scalar slope;
  switch (config) {
    case Configuration::NoncompensatedSecond:
      slope = Scalar(1);
      break;
    case Configuration::CompensatedSecond:
      slope = Scalar(-1);
      break;
    default:
      throw std::invalid_argument("pw_su11_elem: configuration must name a second crystal");
  }
  // The drive of the second crystal continues at exp(i(delta_k L1 + phi)).
  const PwElem<Scalar> second = pw_crystal_elem(gamma0, dk, length, slope, dk * length + phi);
  return pw_compose(second, first);
}

template <class Scalar>
PwTransfer<Scalar> su11_noncompensated_pw(const OpticalModel<Scalar>& m, Scalar length,
                                          Scalar gamma0, Scalar phi, const Grid<Scalar>& grid) {
  PwTransfer<Scalar> t{grid, CVectorT<Scalar>(grid.size()), CVectorT<Scalar>(grid.size())};
  for (Index i = 0; i < grid.size(); ++i) {
    const PwElem<Scalar> e =
        pw_su11_elem(m, length, gamma0, phi, Configuration::NoncompensatedSecond, grid.q(i));
    t.beta[i] = e.beta;
    t.eta[i] = e.eta;
  }
  return t;
}

template <class Scalar>
PwTransfer<Scalar> su11_compensated_pw(const OpticalModel<Scalar>& m, Scalar length, Scalar gamma0,
                                       Scalar phi, const Grid<Scalar>& grid) {
  PwTransfer<Scalar> t{grid, CVectorT<Scalar>(grid.size()), CVectorT<Scalar>(grid.size())};
  for (Index i = 0; i < grid.size(); ++i) {
    const PwElem<Scalar> e =
        pw_su11_elem(m, length, gamma0, phi, Configuration::CompensatedSecond, grid.q(i));
    t.beta[i] = e.beta;
    t.eta[i] = e.eta;
  }
  return t;
}

template <class Scalar>
PwSpectra<Scalar> pw_spectra(const PwTransfer<Scalar>& t) {
  RVectorT<Scalar> n = t.beta.cwiseAbs2();
  RVectorT<Scalar> c = n.array() * (Scalar(1) + n.array());
  return {t.grid, std::move(n), std::move(c)};
}

/// Phase-sensitivity density of the compensated interferometer, built from the
/// first-crystal spectra.  With xi = N1 (1 + N1):
///   A = integral xi,  B = integral xi^2,
///   DeltaPhi(phi) = sqrt(A + 4 B cos^2(phi/2)) / (2 A |sin(phi/2)|),
///   f(phi) = DeltaPhi sqrt(N1_tot),  f_min = f(pi).
template <class Scalar>
struct PwSensitivity {
  Scalar a_coeff = Scalar(0);  // integral of xi
  Scalar b_coeff = Scalar(0);  // integral of xi^2
  Scalar n_tot1 = Scalar(0);   // first-crystal integral density
  Scalar n_sq1 = Scalar(0);    // integral of N1^2

  Scalar delta_phi_density(Scalar phi) const {
    const Scalar s = std::abs(std::sin(phi / Scalar(2)));
    if (s < Scalar(1e-12)) return std::numeric_limits<Scalar>::infinity();
    const Scalar c = std::cos(phi / Scalar(2));
    return std::sqrt(a_coeff + Scalar(4) * b_coeff * c * c) / (Scalar(2) * a_coeff * s);
  }
  Scalar f(Scalar phi) const { return delta_phi_density(phi) * std::sqrt(n_tot1); }
  Scalar f_min() const {
    return Scalar(0.5) * std::sqrt(n_tot1 / (n_tot1 + n_sq1));
  }
  bool diverges(Scalar phi) const {
    return std::abs(std::sin(phi / Scalar(2))) < Scalar(1e-12);
  }
};

template <class Scalar>
PwSensitivity<Scalar> sensitivity_density_pw(const PwSpectra<Scalar>& first_crystal) {
  PwSensitivity<Scalar> s;
  const auto& n = first_crystal.intensity;
  const RVectorT<Scalar> xi = n.array() * (Scalar(1) + n.array());
  s.a_coeff = quadrature(first_crystal.grid, xi);
  s.b_coeff = quadrature(first_crystal.grid, xi.cwiseAbs2());
  s.n_tot1 = quadrature(first_crystal.grid, n);
  s.n_sq1 = quadrature(first_crystal.grid, n.cwiseAbs2());
  if (!(s.n_tot1 > Scalar(0)))
    throw std::domain_error("sensitivity_density_pw: vanishing first-crystal intensity");
  return s;
}

/// K_pw = L_x (integral N)^2 / integral N^2.
template <class Scalar>
Scalar schmidt_number_pw(const PwSpectra<Scalar>& spectra, Scalar transverse_length) {
  const Scalar n_tot = quadrature(spectra.grid, spectra.intensity);
  const Scalar n_sq = quadrature(spectra.grid, spectra.intensity.cwiseAbs2());
  if (!(n_sq > Scalar(0))) throw std::domain_error("schmidt_number_pw: intensity is zero");
  return transverse_length * n_tot * n_tot / n_sq;
}

/// One point of a generic phase sweep evaluated from the analytic plane-wave
/// solution (no closed-form sensitivity assumed).
template <class Scalar>
struct PwSweepPoint {
  Scalar phi;
  Scalar n_tot;        // integral intensity density
  Scalar cov_tot;      // integral covariance density
  Scalar dn_dphi;      // exact derivative of n_tot
  Scalar delta_phi;    // sensitivity density, inf where dn_dphi = 0
  Scalar f;            // shot-noise-normalized sensitivity
};

/// Error-propagation sweep for either two-crystal configuration.  Exploits
/// beta(q; phi) = X(q) + e^{i phi} Y(q), which makes the integral intensity a
/// first-degree trigonometric polynomial with an exact phi-derivative.
template <class Scalar>
std::vector<PwSweepPoint<Scalar>> pw_phase_sweep(const OpticalModel<Scalar>& m, Scalar length,
                                                 Scalar gamma0, Configuration config,
                                                 const std::vector<Scalar>& phis,
                                                 const Grid<Scalar>& grid) {
  using C = ComplexT<Scalar>;
  const Index n = grid.size();
  CVectorT<Scalar> x(n), y(n);
  for (Index i = 0; i < n; ++i) {
    const Scalar dk = delta_k_pw(m, grid.q(i));
    const PwElem<Scalar> first = pw_crystal_elem(gamma0, dk, length, Scalar(1), Scalar(0));
    const Scalar slope = config == Configuration::CompensatedSecond ? Scalar(-1) : Scalar(1);
    if (config == Configuration::Single)
      throw std::invalid_argument("pw_phase_sweep: configuration must name a second crystal");
    const PwElem<Scalar> second = pw_crystal_elem(gamma0, dk, length, slope, dk * length);
    x[i] = second.eta * first.beta;
    y[i] = second.beta * std::conj(first.eta);
  }
  const PwSpectra<Scalar> first_spec =
      pw_spectra(single_crystal_pw(m, length, gamma0, grid));
  const Scalar n_tot1 = quadrature(grid, first_spec.intensity);
  const Scalar snl = Scalar(1) / std::sqrt(n_tot1);

  const C w = quadrature(grid, CVectorT<Scalar>(y.array() * x.conjugate().array()));
  std::vector<PwSweepPoint<Scalar>> out;
  out.reserve(phis.size());
  for (Scalar phi : phis) {
    const C e = std::exp(C(Scalar(0), phi));
    const CVectorT<Scalar> beta = x + e * y;
    const RVectorT<Scalar> nq = beta.cwiseAbs2();
    const RVectorT<Scalar> cq = nq.array() * (Scalar(1) + nq.array());
    PwSweepPoint<Scalar> p;
    p.phi = phi;
    p.n_tot = quadrature(grid, nq);
    p.cov_tot = quadrature(grid, cq);
    p.dn_dphi = Scalar(-2) * std::imag(e * w);
    p.delta_phi = std::abs(p.dn_dphi) > Scalar(0)
                      ? std::sqrt(p.cov_tot) / std::abs(p.dn_dphi)
                      : std::numeric_limits<Scalar>::infinity();
    p.f = p.delta_phi / snl;
    out.push_back(p);
  }
  return out;
}

/// Direct RK4 integration of the coupled mode equations at one q:
///   d beta / dL = Gamma0 h(q, L) eta*,   d eta* / dL = Gamma0 h*(q, L) beta,
/// from (beta, eta*) = (0, 1).  Serves as an independent check of the closed
/// forms; for two-crystal configurations the drive switches at L = L1 with the
/// interferometer phase folded into the second-crystal h.
template <class Scalar>
PwElem<Scalar> pw_ode_oracle(const OpticalModel<Scalar>& m, Scalar length, Scalar gamma0, Scalar q,
                             Configuration config = Configuration::Single, Scalar phi = Scalar(0),
                             int steps = 20000) {
  using C = ComplexT<Scalar>;
  const Scalar dk = delta_k_pw(m, q);
  C beta(0, 0), eta_star(1, 0);

  // theta(L) maps the local coordinate of one crystal to the drive phase; the
  // drive jumps at the interface, so each crystal is integrated on its own.
  const auto integrate = [&](auto theta, int nsteps) {
    const Scalar h = length / Scalar(nsteps);
    const auto rhs = [&](Scalar l, C b, C es, C& db, C& des) {
      const C hf = std::exp(C(Scalar(0), theta(l)));
      db = gamma0 * hf * es;
      des = gamma0 * std::conj(hf) * b;
    };
    for (int k = 0; k < nsteps; ++k) {
      const Scalar l0 = k * h;
      C k1b, k1e, k2b, k2e, k3b, k3e, k4b, k4e;
      rhs(l0, beta, eta_star, k1b, k1e);
      rhs(l0 + h / 2, beta + h / 2 * k1b, eta_star + h / 2 * k1e, k2b, k2e);
      rhs(l0 + h / 2, beta + h / 2 * k2b, eta_star + h / 2 * k2e, k3b, k3e);
      rhs(l0 + h, beta + h * k3b, eta_star + h * k3e, k4b, k4e);
      beta += h / Scalar(6) * (k1b + Scalar(2) * k2b + Scalar(2) * k3b + k4b);
      eta_star += h / Scalar(6) * (k1e + Scalar(2) * k2e + Scalar(2) * k3e + k4e);
    }
  };

  if (config == Configuration::Single) {
    integrate([&](Scalar l) { return dk * l; }, steps);
  } else {
    const int half = steps / 2;
    integrate([&](Scalar l) { return dk * l; }, half);
    if (config == Configuration::NoncompensatedSecond)
      integrate([&](Scalar l) { return dk * (l + length) + phi; }, half);
    else
      integrate([&](Scalar l) { return -dk * (l - length) + phi; }, half);
  }
  return {std::conj(eta_star), beta};
}

}  // namespace su11
