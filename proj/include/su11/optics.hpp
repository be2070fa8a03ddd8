#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

#include "su11/grid.hpp"
#include "su11/types.hpp"

namespace su11 {

enum class DispersionMode { CustomK, PerfectCollinear, SellmeierBbo };

enum class Configuration { Single, NoncompensatedSecond, CompensatedSecond };

/// Wavevector magnitudes of pump, signal and idler inside the medium.
/// Signal and idler are degenerate at twice the pump wavelength and share one
/// refractive index, so k_s == k_i throughout.
template <class Scalar>
struct OpticalModel {
  Scalar lambda_pump = Scalar(0);  // vacuum pump wavelength (m)
  Scalar k_p = Scalar(0);          // pump wavevector magnitude in the medium (1/m)
  Scalar k_s = Scalar(0);          // signal wavevector magnitude in the medium (1/m)
  Scalar k_i = Scalar(0);          // idler wavevector magnitude in the medium (1/m)
  Scalar k_s_vac = Scalar(0);      // signal vacuum wavevector, for external angles (1/m)
  DispersionMode mode = DispersionMode::CustomK;
  Scalar cut_angle = Scalar(0);    // phase-matching angle (rad), Sellmeier mode only

  static OpticalModel custom(Scalar lambda_pump, Scalar k_p, Scalar k_s, Scalar k_i) {
    if (!(k_p > Scalar(0)) || !(k_s > Scalar(0)) || !(k_i > Scalar(0)))
      throw std::invalid_argument("OpticalModel: wavevector magnitudes must be positive");
    if (k_s != k_i)
      throw std::invalid_argument("OpticalModel: degenerate signal/idler require k_s == k_i");
    OpticalModel m;
    m.lambda_pump = lambda_pump;
    m.k_p = k_p;
    m.k_s = k_s;
    m.k_i = k_i;
    m.k_s_vac = pi_v<Scalar> / lambda_pump;  // 2 pi / (2 lambda_pump)
    m.mode = DispersionMode::CustomK;
    return m;
  }

  /// Exact collinear phase matching, k_p = k_s + k_i, with the signal index
  /// chosen freely.  The residual mismatch is quadratic in q.
  static OpticalModel perfect_collinear(Scalar lambda_pump, Scalar n_signal = Scalar(1)) {
    const Scalar lambda_s = Scalar(2) * lambda_pump;
    const Scalar ks = Scalar(2) * pi_v<Scalar> * n_signal / lambda_s;
    OpticalModel m = custom(lambda_pump, Scalar(2) * ks, ks, ks);
    m.mode = DispersionMode::PerfectCollinear;
    return m;
  }

  /// Type-I BBO: ordinary signal/idler at 2*lambda_pump, extraordinary pump cut
  /// at the degenerate collinear phase-matching angle (so k_p = 2 k_s exactly).
  static OpticalModel sellmeier_bbo(Scalar lambda_pump) {
    const Scalar lambda_s = Scalar(2) * lambda_pump;
    const Scalar ns2 = bbo_index_sq_ordinary(lambda_s);
    if (!(ns2 > Scalar(0)))
      throw std::domain_error("sellmeier_bbo: wavelength outside Sellmeier validity");
    const Scalar n_s = std::sqrt(ns2);
    const Scalar no2_p = bbo_index_sq_ordinary(lambda_pump);
    const Scalar ne2_p = bbo_index_sq_extraordinary(lambda_pump);
    const Scalar nt2 = n_s * n_s;
    // 1/n_e(theta)^2 = cos^2/n_o^2 + sin^2/n_e^2 solved for the angle at which
    // the pump index equals the degenerate signal index.
    const Scalar s2 = (Scalar(1) / nt2 - Scalar(1) / no2_p) /
                      (Scalar(1) / ne2_p - Scalar(1) / no2_p);
    if (!(s2 >= Scalar(0)) || !(s2 <= Scalar(1)))
      throw std::domain_error("sellmeier_bbo: no collinear phase-matching angle at this wavelength");
    OpticalModel m = custom(lambda_pump, Scalar(2) * pi_v<Scalar> * n_s / lambda_pump,
                            Scalar(2) * pi_v<Scalar> * n_s / lambda_s,
                            Scalar(2) * pi_v<Scalar> * n_s / lambda_s);
    m.mode = DispersionMode::SellmeierBbo;
    m.cut_angle = std::asin(std::sqrt(s2));
    return m;
  }

  static Scalar bbo_index_sq_ordinary(Scalar lambda_m) {
    const Scalar l2 = lambda_m * Scalar(1e6) * (lambda_m * Scalar(1e6));
    return Scalar(2.7405) + Scalar(0.0184) / (l2 - Scalar(0.0179)) - Scalar(0.0155) * l2;
  }
  static Scalar bbo_index_sq_extraordinary(Scalar lambda_m) {
    const Scalar l2 = lambda_m * Scalar(1e6) * (lambda_m * Scalar(1e6));
    return Scalar(2.3730) + Scalar(0.0128) / (l2 - Scalar(0.0156)) - Scalar(0.0044) * l2;
  }
};

/// Longitudinal wavevector mismatch
///   delta_k = sqrt(k_p^2-(q_s+q_i)^2) - sqrt(k_s^2-q_s^2) - sqrt(k_i^2-q_i^2),
/// evaluated in a cancellation-free form so collinear matching is exact.
template <class Scalar>
Scalar delta_k(const OpticalModel<Scalar>& m, Scalar q_s, Scalar q_i) {
  using std::abs;
  using std::sqrt;
  const Scalar x = q_s + q_i;
  if (!(abs(x) < m.k_p) || !(abs(q_s) < m.k_s) || !(abs(q_i) < m.k_i))
    throw std::domain_error("delta_k: transverse wavevector beyond the evanescent bound");
  // k - sqrt(k^2 - q^2) = q^2 / (k + sqrt(k^2 - q^2))
  const auto drop = [](Scalar k, Scalar q) { return q * q / (k + sqrt((k - q) * (k + q))); };
  // grouped so that the q_s <-> q_i symmetry is exact in floating point
  return ((m.k_p - m.k_s - m.k_i) - drop(m.k_p, x)) + (drop(m.k_s, q_s) + drop(m.k_i, q_i));
}

/// Mismatch on the plane-wave correlation line q_i = -q_s.  Even in q.
template <class Scalar>
Scalar delta_k_pw(const OpticalModel<Scalar>& m, Scalar q) {
  return delta_k(m, q, -q);
}

template <class Scalar>
RMatrixT<Scalar> delta_k_matrix(const OpticalModel<Scalar>& m, const Grid<Scalar>& grid) {
  const Index n = grid.size();
  RMatrixT<Scalar> dk(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) dk(i, j) = delta_k(m, grid.q(i), grid.q(j));
  return dk;
}

/// theta_s ~ q_s / k_s_vac for small external emission angles.
template <class Scalar>
Scalar external_angle(const OpticalModel<Scalar>& m, Scalar q) {
  return q / m.k_s_vac;
}

template <class Scalar>
struct PumpModel {
  bool plane_wave = false;
  Scalar sigma = Scalar(0);  // Gaussian amplitude parameter (m)

  static PumpModel gaussian_sigma(Scalar sigma) {
    if (!(sigma > Scalar(0))) throw std::invalid_argument("PumpModel: sigma must be positive");
    return PumpModel{false, sigma};
  }
  /// The intensity FWHM of the Gaussian pump is 2 sqrt(ln 2) sigma.
  static PumpModel gaussian_fwhm(Scalar fwhm) {
    return gaussian_sigma(fwhm / (Scalar(2) * std::sqrt(std::log(Scalar(2)))));
  }
  static PumpModel plane() { return PumpModel{true, Scalar(0)}; }

  Scalar fwhm() const { return Scalar(2) * std::sqrt(std::log(Scalar(2))) * sigma; }
};

template <class Scalar>
struct CrystalGeometry {
  Scalar length = Scalar(0);  // single-crystal length L1 (m); inter-crystal gap is zero
  Configuration configuration = Configuration::Single;
  PumpModel<Scalar> pump;

  CrystalGeometry() = default;
  CrystalGeometry(Scalar length_l1, Configuration config, PumpModel<Scalar> pump_model)
      : length(length_l1), configuration(config), pump(pump_model) {
    if (!(length_l1 > Scalar(0)))
      throw std::invalid_argument("CrystalGeometry: crystal length must be positive");
  }
};

/// Linear phase drive of a crystal: h = exp(i delta_k (slope * L + offset)),
/// with the interferometer phase factored out and applied at composition time.
template <class Scalar>
struct HDrive {
  Scalar slope;
  Scalar offset;
};

template <class Scalar>
HDrive<Scalar> h_drive(const CrystalGeometry<Scalar>& geom, int crystal_index) {
  if (crystal_index == 1) return {Scalar(1), Scalar(0)};
  if (crystal_index != 2)
    throw std::invalid_argument("h_drive: crystal_index must be 1 or 2");
  switch (geom.configuration) {
    case Configuration::Single:
      throw std::invalid_argument("h_drive: single-crystal geometry has no second crystal");
    case Configuration::NoncompensatedSecond:
      return {Scalar(1), geom.length};
    case Configuration::CompensatedSecond:
      // exp(-i delta_k (L - L1)): the focusing element flips the accumulated
      // quadratic wavefront, so the drive runs backwards from +delta_k L1.
      return {Scalar(-1), geom.length};
  }
  throw std::logic_error("h_drive: unknown configuration");
}

/// Unit-modulus phase-matching factor of one crystal at depth L in [0, L1].
/// The interferometer phase exp(i phi) is excluded here by convention.
template <class Scalar>
ComplexT<Scalar> h_factor(const CrystalGeometry<Scalar>& geom, const OpticalModel<Scalar>& m,
                          int crystal_index, Scalar q_s, Scalar q_i, Scalar L) {
  if (!(L >= Scalar(0)) || !(L <= geom.length))
    throw std::invalid_argument("h_factor: L must lie in [0, L1]");
  const HDrive<Scalar> d = h_drive(geom, crystal_index);
  const Scalar phase = delta_k(m, q_s, q_i) * (d.slope * L + d.offset);
  return ComplexT<Scalar>(std::cos(phase), std::sin(phase));
}

/// Pump envelope weight exp(-(q_s+q_i)^2 sigma^2 / 2); in plane-wave mode the
/// envelope degenerates to the discrete delta delta_{q_i,-q_s} / dq.
template <class Scalar>
Scalar pump_envelope(const CrystalGeometry<Scalar>& geom, const Grid<Scalar>& grid, Scalar q_s,
                     Scalar q_i) {
  if (geom.pump.plane_wave) {
    using std::abs;
    return abs(q_s + q_i) < grid.dq() / Scalar(2) ? Scalar(1) / grid.dq() : Scalar(0);
  }
  const Scalar u = (q_s + q_i) * geom.pump.sigma;
  return std::exp(-u * u / Scalar(2));
}

template <class Scalar>
RMatrixT<Scalar> pump_matrix(const CrystalGeometry<Scalar>& geom, const Grid<Scalar>& grid) {
  const Index n = grid.size();
  RMatrixT<Scalar> p(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) p(i, j) = pump_envelope(geom, grid, grid.q(i), grid.q(j));
  return p;
}

}  // namespace su11
