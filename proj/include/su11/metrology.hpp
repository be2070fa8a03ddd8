#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "su11/grid.hpp"
#include "su11/schmidt.hpp"
#include "su11/solver.hpp"
#include "su11/types.hpp"

namespace su11 {

/// Photon-number density N(q) = integral dq' |beta(q, q')|^2.
template <class Scalar>
RVectorT<Scalar> intensity(const TransferPair<Scalar>& tp) {
  return tp.B.cwiseAbs2().rowwise().sum() * tp.grid.dq();
}

template <class Scalar>
Scalar total_intensity(const TransferPair<Scalar>& tp) {
  return quadrature(tp.grid, intensity(tp));
}

/// Covariance kernel of the signal intensity,
///   Cov(q, q') = |G1(q, q')|^2 + delta(q - q') N(q),
/// with G1(q, q') = integral dq_bar beta(q, q_bar) beta^*(q', q_bar) and the
/// shot-noise delta stored as N/dq on the diagonal.  In the degenerate case
/// (indistinguishable signal and idler) the cross term
/// |integral beta(q, .) eta(q', .)|^2 is added.
template <class Scalar>
RMatrixT<Scalar> covariance(const TransferPair<Scalar>& tp, bool degenerate = false) {
  using Mat = CMatrixT<Scalar>;
  const Scalar dq = tp.grid.dq();
  const Mat g1 = (tp.B * tp.B.adjoint()) * dq;
  RMatrixT<Scalar> cov = g1.cwiseAbs2();
  cov.diagonal() += intensity(tp) / dq;
  if (degenerate) {
    const Mat cross = (tp.B * tp.E.transpose()) * dq;
    cov += cross.cwiseAbs2();
  }
  return cov;
}

/// Intensity and covariance of one interferometer output.  For the degenerate
/// case the observable intensity doubles (both photons land in one beam) while
/// the covariance gains the cross term; the normalized sensitivity f is
/// unchanged because the factors of two cancel.
template <class Scalar>
struct Spectra {
  Grid<Scalar> grid;
  RVectorT<Scalar> n;     // photon-number density over q
  RMatrixT<Scalar> cov;   // covariance kernel, shot-noise diagonal included
  bool degenerate = false;
};

template <class Scalar>
Spectra<Scalar> spectra(const TransferPair<Scalar>& tp, bool degenerate = false) {
  RVectorT<Scalar> n = intensity(tp);
  if (degenerate) n *= Scalar(2);
  return {tp.grid, std::move(n), covariance(tp, degenerate), degenerate};
}

template <class Scalar>
Scalar integral_covariance(const Spectra<Scalar>& sp) {
  return sp.cov.sum() * sp.grid.dq() * sp.grid.dq();
}

template <class Scalar>
struct ReferenceLimits {
  Scalar snl_delta_phi;         // 1 / sqrt(N_tot^(1))
  Scalar heisenberg_delta_phi;  // 1 / (2 N_tot^(1))
  Scalar f_heisenberg;          // 1 / (2 sqrt(N_tot^(1)))
};

template <class Scalar>
ReferenceLimits<Scalar> limits(Scalar n_tot_first) {
  if (!(n_tot_first > Scalar(0))) throw std::domain_error("limits: N_tot must be positive");
  const Scalar root = std::sqrt(n_tot_first);
  return {Scalar(1) / root, Scalar(1) / (Scalar(2) * n_tot_first), Scalar(1) / (Scalar(2) * root)};
}

/// Transverse length assigned to a plane-wave system so that its integral
/// first-crystal intensity matches a finite-width reference at the same gain.
template <class Scalar>
Scalar match_lx(Scalar n_tot_finite, Scalar density_tot_pw) {
  if (!(n_tot_finite > Scalar(0)) || !(density_tot_pw > Scalar(0)))
    throw std::domain_error("match_lx: intensities must be positive");
  return n_tot_finite / density_tot_pw;
}

/// Error-propagation report assembled from a phase sweep.  The integral
/// intensity of a two-crystal interferometer is exactly
///   N_tot(phi) = a + b cos phi + c sin phi,
/// so the Fourier fit provides a noise-free derivative.  The integral
/// covariance is a degree-2 trigonometric polynomial and is fitted when at
/// least five samples are available (needed for the supersensitivity width).
template <class Scalar>
struct SensitivityReport {
  RVectorT<Scalar> phi;
  RVectorT<Scalar> n_tot;
  RVectorT<Scalar> delta_phi;  // inf where dN/dphi vanishes
  RVectorT<Scalar> f;
  Scalar f_min = Scalar(0);
  Scalar phi_opt = Scalar(0);
  Scalar delta_width = Scalar(0);  // phase range with f < 1; 0 when unknown or absent
  bool delta_known = false;
  Scalar snl_delta_phi = Scalar(0);
  Scalar heisenberg_delta_phi = Scalar(0);
  Scalar f_heisenberg = Scalar(0);
  Scalar fourier_a = Scalar(0), fourier_b = Scalar(0), fourier_c = Scalar(0);
  // Degree-2 cosine/sine coefficients of the integral covariance (>= 5 samples).
  Scalar cov_c0 = Scalar(0), cov_c1 = Scalar(0), cov_s1 = Scalar(0), cov_c2 = Scalar(0),
         cov_s2 = Scalar(0);
  std::vector<Index> divergent;  // sample indices where the derivative vanishes

  Scalar n_tot_fit(Scalar p) const {
    return fourier_a + fourier_b * std::cos(p) + fourier_c * std::sin(p);
  }
  Scalar dn_dphi_fit(Scalar p) const { return -fourier_b * std::sin(p) + fourier_c * std::cos(p); }
  Scalar cov_fit(Scalar p) const {
    return cov_c0 + cov_c1 * std::cos(p) + cov_s1 * std::sin(p) + cov_c2 * std::cos(2 * p) +
           cov_s2 * std::sin(2 * p);
  }
  /// Continuous f from the fitted trigonometric polynomials.
  Scalar f_fit(Scalar p) const {
    const Scalar d = std::abs(dn_dphi_fit(p));
    if (d == Scalar(0)) return std::numeric_limits<Scalar>::infinity();
    return std::sqrt(std::max(cov_fit(p), Scalar(0))) / d / snl_delta_phi;
  }
};

template <class Scalar>
SensitivityReport<Scalar> sensitivity_from_sweep(const std::vector<Scalar>& phis,
                                                 const std::vector<Spectra<Scalar>>& sweep,
                                                 Scalar n_tot_first) {
  if (phis.size() != sweep.size())
    throw std::invalid_argument("sensitivity_from_sweep: phase/spectra count mismatch");
  const Index m = static_cast<Index>(phis.size());
  if (m < 3)
    throw std::invalid_argument(
        "sensitivity_from_sweep: need at least 3 phase samples for the Fourier fit");

  SensitivityReport<Scalar> rep;
  rep.phi.resize(m);
  rep.n_tot.resize(m);
  rep.delta_phi.resize(m);
  rep.f.resize(m);

  RVectorT<Scalar> cov_tot(m);
  for (Index i = 0; i < m; ++i) {
    rep.phi[i] = phis[i];
    rep.n_tot[i] = quadrature(sweep[i].grid, sweep[i].n);
    cov_tot[i] = integral_covariance(sweep[i]);
  }

  // Exact-basis least squares for N_tot(phi).
  RMatrixT<Scalar> design(m, 3);
  for (Index i = 0; i < m; ++i) {
    design(i, 0) = Scalar(1);
    design(i, 1) = std::cos(rep.phi[i]);
    design(i, 2) = std::sin(rep.phi[i]);
  }
  const RVectorT<Scalar> coef = design.colPivHouseholderQr().solve(rep.n_tot);
  rep.fourier_a = coef[0];
  rep.fourier_b = coef[1];
  rep.fourier_c = coef[2];

  if (m >= 5) {
    RMatrixT<Scalar> d2(m, 5);
    for (Index i = 0; i < m; ++i) {
      d2(i, 0) = Scalar(1);
      d2(i, 1) = std::cos(rep.phi[i]);
      d2(i, 2) = std::sin(rep.phi[i]);
      d2(i, 3) = std::cos(2 * rep.phi[i]);
      d2(i, 4) = std::sin(2 * rep.phi[i]);
    }
    const RVectorT<Scalar> c2 = d2.colPivHouseholderQr().solve(cov_tot);
    rep.cov_c0 = c2[0];
    rep.cov_c1 = c2[1];
    rep.cov_s1 = c2[2];
    rep.cov_c2 = c2[3];
    rep.cov_s2 = c2[4];
  }

  const ReferenceLimits<Scalar> ref = limits(n_tot_first);
  rep.snl_delta_phi = ref.snl_delta_phi;
  rep.heisenberg_delta_phi = ref.heisenberg_delta_phi;
  rep.f_heisenberg = ref.f_heisenberg;

  const Scalar deriv_scale =
      std::max(std::abs(rep.fourier_b), std::abs(rep.fourier_c)) + std::abs(rep.fourier_a);
  Scalar fmin = std::numeric_limits<Scalar>::infinity();
  Index imin = 0;
  for (Index i = 0; i < m; ++i) {
    const Scalar d = std::abs(rep.dn_dphi_fit(rep.phi[i]));
    if (d <= Scalar(1e-14) * deriv_scale) {
      rep.delta_phi[i] = std::numeric_limits<Scalar>::infinity();
      rep.divergent.push_back(i);
    } else {
      rep.delta_phi[i] = std::sqrt(cov_tot[i]) / d;
    }
    rep.f[i] = rep.delta_phi[i] / rep.snl_delta_phi;
    if (rep.f[i] < fmin) {
      fmin = rep.f[i];
      imin = i;
    }
  }
  rep.f_min = fmin;
  rep.phi_opt = rep.phi[imin];
  return rep;
}

/// Closed forms of the compensated interferometer built from the first
/// crystal only.  With xi(q, q') = integral dq_bar beta1(q_bar, q) eta1^*(q_bar, q')
/// and the Schmidt eigenvalues of the first crystal:
///   N(q; phi)   = 4 cos^2(phi/2) integral dq' |xi(q, q')|^2,
///   A = sum Lambda (1 + Lambda) = N_tot (1 + N_tot / K),
///   B = sum [Lambda (1 + Lambda)]^2,
///   DeltaPhi(phi) = sqrt(A + 4 B cos^2(phi/2)) / (2 A |sin(phi/2)|),
///   f_min = f(pi) = (1/2) sqrt(N_tot / A) = 1 / (2 sqrt(1 + N_tot / K)).
template <class Scalar>
struct CompensatedClosedForm {
  Grid<Scalar> grid;
  CMatrixT<Scalar> xi;
  RVectorT<Scalar> xi_row_norm;  // integral dq' |xi(q, q')|^2
  Scalar a_coeff = Scalar(0);
  Scalar a_from_kernel = Scalar(0);
  Scalar b_coeff = Scalar(0);
  Scalar n_tot1 = Scalar(0);
  Scalar schmidt_k = Scalar(0);
  Scalar f_min = Scalar(0);
  Scalar f_min_via_k = Scalar(0);

  RVectorT<Scalar> intensity_profile(Scalar phi) const {
    const Scalar c = std::cos(phi / Scalar(2));
    return Scalar(4) * c * c * xi_row_norm;
  }
  Scalar n_tot(Scalar phi) const {
    const Scalar c = std::cos(phi / Scalar(2));
    return Scalar(4) * a_coeff * c * c;
  }
  Scalar delta_phi(Scalar phi) const {
    const Scalar s = std::abs(std::sin(phi / Scalar(2)));
    if (s < Scalar(1e-12)) return std::numeric_limits<Scalar>::infinity();
    const Scalar c = std::cos(phi / Scalar(2));
    return std::sqrt(a_coeff + Scalar(4) * b_coeff * c * c) / (Scalar(2) * a_coeff * s);
  }
  Scalar f(Scalar phi) const { return delta_phi(phi) * std::sqrt(n_tot1); }
};

template <class Scalar>
CompensatedClosedForm<Scalar> compensated_closed_form(const TransferPair<Scalar>& tp1,
                                                      Scalar threshold = Scalar(1e-12)) {
  const SchmidtData<Scalar> sd = decompose(tp1, threshold);
  if (sd.n_modes() == 0)
    throw std::domain_error("compensated_closed_form: empty decomposition (no gain)");
  CompensatedClosedForm<Scalar> c{tp1.grid};
  const Scalar dq = tp1.grid.dq();
  c.xi = (tp1.B.transpose() * tp1.E.conjugate()) * dq;
  c.xi_row_norm = c.xi.cwiseAbs2().rowwise().sum() * dq;
  c.a_from_kernel = c.xi.cwiseAbs2().sum() * dq * dq;
  const auto& lam = sd.eigenvalues.array();
  c.a_coeff = (lam * (Scalar(1) + lam)).sum();
  c.b_coeff = (lam * (Scalar(1) + lam)).square().sum();
  c.n_tot1 = total_intensity(tp1);
  c.schmidt_k = schmidt_number(sd);
  c.f_min = Scalar(0.5) * std::sqrt(c.n_tot1 / c.a_coeff);
  c.f_min_via_k = Scalar(1) / (Scalar(2) * std::sqrt(Scalar(1) + c.n_tot1 / c.schmidt_k));
  return c;
}

/// Width of the phase interval around phi = pi where f < 1.
template <class Scalar>
struct WidthResult {
  Scalar width = Scalar(0);
  bool below_everywhere = false;  // no crossing found: f < 1 on the whole circle
};

/// Bisection on f(phi) = 1 around the dark fringe.  f must be continuous on
/// (0, 2 pi); returns 0 if f(pi) >= 1.  If no crossing brackets are found the
/// full interval 2 pi is reported and flagged.
template <class Scalar, class F>
WidthResult<Scalar> supersensitivity_width(F&& f, Scalar tol = Scalar(1e-10), int scan = 4096) {
  const Scalar pi_ = pi_v<Scalar>;
  if (!(f(pi_) < Scalar(1))) return {Scalar(0), false};

  const auto bisect = [&](Scalar lo, Scalar hi) {
    // invariant: f(lo) >= 1 > f(hi) or mirrored; orient on g = f - 1
    Scalar a = lo, b = hi;
    Scalar ga = f(a) - Scalar(1);
    while (std::abs(b - a) > tol) {
      const Scalar mid = (a + b) / Scalar(2);
      const Scalar gm = f(mid) - Scalar(1);
      if ((ga > Scalar(0)) == (gm > Scalar(0))) {
        a = mid;
        ga = gm;
      } else {
        b = mid;
      }
    }
    return (a + b) / Scalar(2);
  };

  // march outward from pi in both directions looking for f >= 1 brackets
  const Scalar step = pi_ / Scalar(scan);
  Scalar lo_cross = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar hi_cross = std::numeric_limits<Scalar>::quiet_NaN();
  Scalar prev = pi_;
  for (int i = 1; i <= scan; ++i) {
    const Scalar p = pi_ - i * step;
    if (p <= Scalar(0)) break;
    if (f(p) >= Scalar(1)) {
      lo_cross = bisect(p, prev);
      break;
    }
    prev = p;
  }
  prev = pi_;
  for (int i = 1; i <= scan; ++i) {
    const Scalar p = pi_ + i * step;
    if (p >= Scalar(2) * pi_) break;
    if (f(p) >= Scalar(1)) {
      hi_cross = bisect(p, prev);
      break;
    }
    prev = p;
  }

  if (std::isnan(lo_cross) && std::isnan(hi_cross)) return {Scalar(2) * pi_, true};
  if (std::isnan(lo_cross)) return {Scalar(2) * (hi_cross - pi_) , false};
  if (std::isnan(hi_cross)) return {Scalar(2) * (pi_ - lo_cross), false};
  return {hi_cross - lo_cross, false};
}

}  // namespace su11
