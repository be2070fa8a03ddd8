#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "su11/grid.hpp"
#include "su11/metrology.hpp"
#include "su11/planewave.hpp"
#include "su11/solver.hpp"
#include "su11/types.hpp"

namespace su11 {

/// y(Gamma) = B sinh^2(A Gamma) fitted on one gain window.
template <class Scalar>
struct FitResult {
  Scalar a = Scalar(0);
  Scalar b = Scalar(0);
  Scalar a_err = Scalar(0);
  Scalar b_err = Scalar(0);
  Scalar rms_rel_residual = Scalar(0);
  int iterations = 0;
  bool log_space = false;
};

template <class Scalar>
struct CalibWindow {
  Scalar gamma_lo = Scalar(0);
  Scalar gamma_hi = Scalar(0);
  FitResult<Scalar> fit;
  Scalar gamma_center() const { return (gamma_lo + gamma_hi) / Scalar(2); }
  Scalar g_center() const { return fit.a * gamma_center(); }
};

/// Piecewise map between the theoretical gain coefficient Gamma and the
/// experimental gain G = A(Gamma) Gamma, assembled from windowed fits.
template <class Scalar>
struct CalibrationTable {
  std::vector<CalibWindow<Scalar>> windows;           // ordered by gamma
  std::vector<std::pair<Scalar, Scalar>> samples;     // (Gamma, collinear count)

  Scalar gamma_min() const { return windows.front().gamma_lo; }
  Scalar gamma_max() const { return windows.back().gamma_hi; }

  /// A(Gamma): linear interpolation over window centers, clamped at the ends.
  Scalar a_of_gamma(Scalar gamma) const {
    if (windows.empty()) throw std::domain_error("CalibrationTable: no windows");
    if (gamma <= windows.front().gamma_center()) return windows.front().fit.a;
    if (gamma >= windows.back().gamma_center()) return windows.back().fit.a;
    for (std::size_t i = 0; i + 1 < windows.size(); ++i) {
      const Scalar c0 = windows[i].gamma_center();
      const Scalar c1 = windows[i + 1].gamma_center();
      if (gamma >= c0 && gamma <= c1) {
        const Scalar t = (gamma - c0) / (c1 - c0);
        return (Scalar(1) - t) * windows[i].fit.a + t * windows[i + 1].fit.a;
      }
    }
    return windows.back().fit.a;
  }
  Scalar g_of_gamma(Scalar gamma) const { return a_of_gamma(gamma) * gamma; }
};

/// Collinear photon count per gain sample.  For a Gaussian pump this is one
/// kernel solve per Gamma and the count is N(0) dq (N is a density); for a
/// plane-wave pump the closed-form density N(0) is returned directly.
template <class Scalar>
std::vector<std::pair<Scalar, Scalar>> collinear_curve(const CrystalGeometry<Scalar>& geom,
                                                       const OpticalModel<Scalar>& m,
                                                       const Grid<Scalar>& grid,
                                                       const std::vector<Scalar>& gammas,
                                                       const SolverSettings<Scalar>& settings = {}) {
  std::vector<std::pair<Scalar, Scalar>> out;
  out.reserve(gammas.size());
  const Index iz = grid.zero_index();
  for (Scalar gamma : gammas) {
    if (geom.pump.plane_wave) {
      const PwTransfer<Scalar> t = single_crystal_pw(m, geom.length, gamma, grid);
      out.emplace_back(gamma, std::norm(t.beta[iz]));
    } else {
      const TransferPair<Scalar> tp = solve_crystal(geom, m, gamma, grid, settings, 1);
      out.emplace_back(gamma, intensity(tp)[iz] * grid.dq());
    }
  }
  return out;
}

/// Gauss-Newton with Levenberg damping for y = B sinh^2(A Gamma).
/// Initialization: A from the log-asymptote slope (log y ~ 2 A Gamma at large
/// argument), B from the smallest sample.  Fits log-intensity when the window
/// spans more than four decades.
template <class Scalar>
FitResult<Scalar> fit_window(const std::vector<std::pair<Scalar, Scalar>>& samples) {
  using std::log;
  using std::sinh;
  using std::sqrt;
  const Index m = static_cast<Index>(samples.size());
  if (m < 5) throw std::invalid_argument("fit_window: need at least 5 samples");
  for (const auto& [g, y] : samples)
    if (!(y > Scalar(0)) || !(g > Scalar(0)))
      throw std::invalid_argument("fit_window: samples must have positive gain and intensity");

  const auto& first = samples.front();
  const auto& last = samples.back();
  Scalar a = (log(last.second) - log(first.second)) /
             (Scalar(2) * (last.first - first.first));
  if (!(a > Scalar(0))) a = Scalar(1) / last.first;
  Scalar b = first.second / std::pow(sinh(a * first.first), 2);
  if (!(b > Scalar(0)) || !std::isfinite(b)) b = Scalar(1);

  Scalar ymax = Scalar(0), ymin = std::numeric_limits<Scalar>::infinity();
  for (const auto& [g, y] : samples) {
    ymax = std::max(ymax, y);
    ymin = std::min(ymin, y);
  }
  const bool log_space = ymax / ymin > Scalar(1e4);

  const auto cost_and_jac = [&](Scalar pa, Scalar pb, RVectorT<Scalar>& r,
                                RMatrixT<Scalar>& jac) {
    for (Index i = 0; i < m; ++i) {
      const Scalar gamma = samples[i].first;
      const Scalar y = samples[i].second;
      const Scalar sh = sinh(pa * gamma);
      const Scalar ch = std::cosh(pa * gamma);
      const Scalar model = pb * sh * sh;
      if (log_space) {
        r[i] = log(model) - log(y);
        jac(i, 0) = Scalar(2) * gamma * ch / sh;
        jac(i, 1) = Scalar(1) / pb;
      } else {
        r[i] = model - y;
        jac(i, 0) = Scalar(2) * pb * gamma * sh * ch;
        jac(i, 1) = sh * sh;
      }
    }
    return Scalar(0.5) * r.squaredNorm();
  };

  RVectorT<Scalar> r(m);
  RMatrixT<Scalar> jac(m, 2);
  Scalar cost = cost_and_jac(a, b, r, jac);
  Scalar lambda = Scalar(1e-6);
  int it = 0;
  const int max_iter = 200;
  for (; it < max_iter; ++it) {
    const Eigen::Matrix<Scalar, 2, 2> jtj = jac.transpose() * jac;
    const Eigen::Matrix<Scalar, 2, 1> jtr = jac.transpose() * r;
    Eigen::Matrix<Scalar, 2, 2> damped = jtj;
    damped(0, 0) += lambda * jtj(0, 0);
    damped(1, 1) += lambda * jtj(1, 1);
    const Eigen::Matrix<Scalar, 2, 1> step = damped.ldlt().solve(-jtr);
    const Scalar na = a + step[0];
    const Scalar nb = b + step[1];
    if (!(na > Scalar(0)) || !(nb > Scalar(0)) || !std::isfinite(na) || !std::isfinite(nb)) {
      lambda *= Scalar(10);
      if (lambda > Scalar(1e12))
        throw std::runtime_error("fit_window: no convergence (positivity), rms residual " +
                                 std::to_string(double(std::sqrt(Scalar(2) * cost / Scalar(m)))));
      continue;
    }
    RVectorT<Scalar> r_new(m);
    RMatrixT<Scalar> jac_new(m, 2);
    const Scalar cost_new = cost_and_jac(na, nb, r_new, jac_new);
    if (cost_new < cost) {
      const bool converged =
          std::abs(step[0]) <= Scalar(1e-14) * std::abs(a) + Scalar(1e-300) &&
          std::abs(step[1]) <= Scalar(1e-14) * std::abs(b) + Scalar(1e-300);
      a = na;
      b = nb;
      r.swap(r_new);
      jac.swap(jac_new);
      cost = cost_new;
      lambda = std::max(lambda / Scalar(10), Scalar(1e-14));
      if (converged) break;
    } else {
      lambda *= Scalar(10);
      if (lambda > Scalar(1e12)) break;
    }
  }
  if (it == max_iter)
    throw std::runtime_error("fit_window: no convergence after " + std::to_string(max_iter) +
                             " iterations, rms residual " +
                             std::to_string(double(std::sqrt(Scalar(2) * cost / Scalar(m)))));

  FitResult<Scalar> res;
  res.a = a;
  res.b = b;
  res.iterations = it + 1;
  res.log_space = log_space;
  // standard errors from the Jacobian at the optimum
  const Eigen::Matrix<Scalar, 2, 2> jtj = jac.transpose() * jac;
  const Scalar dof = Scalar(std::max<Index>(m - 2, 1));
  const Scalar s2 = Scalar(2) * cost / dof;
  const Eigen::Matrix<Scalar, 2, 2> cov = s2 * jtj.inverse();
  res.a_err = sqrt(std::max(cov(0, 0), Scalar(0)));
  res.b_err = sqrt(std::max(cov(1, 1), Scalar(0)));
  Scalar rr = Scalar(0);
  for (Index i = 0; i < m; ++i) {
    const Scalar sh = sinh(a * samples[i].first);
    const Scalar rel = (b * sh * sh - samples[i].second) / samples[i].second;
    rr += rel * rel;
  }
  res.rms_rel_residual = sqrt(rr / Scalar(m));
  return res;
}

/// Build a table from explicit Gamma windows.  samples_per_window points are
/// spaced uniformly across each window and measured with collinear_curve.
template <class Scalar>
CalibrationTable<Scalar> calibrate_windows(const CrystalGeometry<Scalar>& geom,
                                           const OpticalModel<Scalar>& m, const Grid<Scalar>& grid,
                                           const std::vector<std::pair<Scalar, Scalar>>& windows,
                                           int samples_per_window = 9,
                                           const SolverSettings<Scalar>& settings = {}) {
  if (samples_per_window < 5)
    throw std::invalid_argument("calibrate_windows: need at least 5 samples per window");
  CalibrationTable<Scalar> table;
  for (const auto& [lo, hi] : windows) {
    if (!(lo > Scalar(0)) || !(hi > lo))
      throw std::invalid_argument("calibrate_windows: windows must satisfy 0 < lo < hi");
    std::vector<Scalar> gammas(samples_per_window);
    for (int i = 0; i < samples_per_window; ++i)
      gammas[i] = lo + (hi - lo) * Scalar(i) / Scalar(samples_per_window - 1);
    const auto curve = collinear_curve(geom, m, grid, gammas, settings);
    CalibWindow<Scalar> w;
    w.gamma_lo = lo;
    w.gamma_hi = hi;
    w.fit = fit_window(curve);
    table.windows.push_back(w);
    table.samples.insert(table.samples.end(), curve.begin(), curve.end());
  }
  std::sort(table.windows.begin(), table.windows.end(),
            [](const auto& x, const auto& y) { return x.gamma_lo < y.gamma_lo; });
  return table;
}

/// Invert G = A(Gamma) Gamma by bisection on the calibrated range.
template <class Scalar>
Scalar gamma_for_g(const CalibrationTable<Scalar>& table, Scalar g_target) {
  if (table.windows.empty()) throw std::domain_error("gamma_for_g: empty table");
  Scalar lo = table.gamma_min();
  Scalar hi = table.gamma_max();
  const Scalar g_lo = table.g_of_gamma(lo);
  const Scalar g_hi = table.g_of_gamma(hi);
  if (g_target < g_lo || g_target > g_hi)
    throw std::out_of_range("gamma_for_g: G = " + std::to_string(double(g_target)) +
                            " outside calibrated range [" + std::to_string(double(g_lo)) + ", " +
                            std::to_string(double(g_hi)) + "]");
  while ((hi - lo) > Scalar(1e-12) * hi) {
    const Scalar mid = (lo + hi) / Scalar(2);
    if (table.g_of_gamma(mid) < g_target)
      lo = mid;
    else
      hi = mid;
  }
  return (lo + hi) / Scalar(2);
}

}  // namespace su11
