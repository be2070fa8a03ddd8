#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>

#include "su11/grid.hpp"
#include "su11/optics.hpp"
#include "su11/types.hpp"

namespace su11 {

template <class Scalar>
struct SolverSettings {
  int steps = 256;               // RK4 steps across one crystal
  Scalar tolerance = Scalar(1e-6);  // relative tolerance for identity checks
};

/// Transfer kernels of one crystal or a composed interferometer.
/// B holds beta(q, q'); E holds eta-tilde(q, q') and therefore carries the
/// vacuum delta explicitly: E starts as the 1/dq diagonal.  With the operator
/// matrices Bt = B dq and Et = E dq, a valid pair satisfies
///   Et Et^H = Bt Bt^H + I     and     Et Bt^T = Bt Et^T.
template <class Scalar>
struct TransferPair {
  Grid<Scalar> grid;
  CMatrixT<Scalar> B;
  CMatrixT<Scalar> E;
  Configuration configuration = Configuration::Single;
  Scalar gamma = Scalar(0);
  int steps = 0;
  int crystal = 1;
};

template <class Scalar>
TransferPair<Scalar> vacuum_pair(const Grid<Scalar>& grid) {
  return {grid, CMatrixT<Scalar>::Zero(grid.size(), grid.size()), delta_matrix(grid),
          Configuration::Single, Scalar(0), 0, 1};
}

/// Residuals of the Bogoliubov constraints, relative to the magnitude of the
/// left-hand side.  "dual" variants come from the inverse transformation:
///   Et^H Et = Bt^T Bt^* + I     and     Et^H Bt symmetric.
template <class Scalar>
struct PairResiduals {
  Scalar bogoliubov;
  Scalar exchange;
  Scalar dual_bogoliubov;
  Scalar dual_exchange;
  Scalar max() const {
    return std::max(std::max(bogoliubov, exchange), std::max(dual_bogoliubov, dual_exchange));
  }
};

template <class Scalar>
PairResiduals<Scalar> pair_residuals(const TransferPair<Scalar>& tp) {
  using Mat = CMatrixT<Scalar>;
  const Scalar dq = tp.grid.dq();
  const Mat bt = tp.B * dq;
  const Mat et = tp.E * dq;
  const Mat id = Mat::Identity(bt.rows(), bt.cols());
  PairResiduals<Scalar> r;
  {
    const Mat lhs = et * et.adjoint();
    r.bogoliubov = (lhs - bt * bt.adjoint() - id).norm() / lhs.norm();
  }
  {
    const Mat lhs = et * bt.transpose();
    const Scalar denom = lhs.norm();
    r.exchange = denom > Scalar(0) ? (lhs - bt * et.transpose()).norm() / denom : Scalar(0);
  }
  {
    const Mat lhs = et.adjoint() * et;
    r.dual_bogoliubov = (lhs - bt.transpose() * bt.conjugate() - id).norm() / lhs.norm();
  }
  {
    const Mat lhs = et.adjoint() * bt;
    const Scalar denom = lhs.norm();
    r.dual_exchange = denom > Scalar(0) ? (lhs - lhs.transpose()).norm() / denom : Scalar(0);
  }
  return r;
}

/// RK4 integration of the coupled kernel equations across one crystal,
///   dB/dL  = Gamma dq (P o H(L)) Estar,
///   dEstar/dL = Gamma dq (P o H(L))^* B,
/// where P is the pump-envelope matrix, H(L) the phase-matching factor and
/// o the elementwise product.  Initial values: B = 0, Estar = delta.  The
/// second crystal is integrated with its phase-independent drive; the
/// interferometer phase enters only in compose().
template <class Scalar>
TransferPair<Scalar> solve_crystal(const CrystalGeometry<Scalar>& geom,
                                   const OpticalModel<Scalar>& m, Scalar gamma,
                                   const Grid<Scalar>& grid,
                                   const SolverSettings<Scalar>& settings,
                                   int crystal_index = 1) {
  using Mat = CMatrixT<Scalar>;
  using C = ComplexT<Scalar>;
  if (geom.pump.plane_wave)
    throw std::invalid_argument("solve_crystal: plane-wave pump has closed-form solutions");
  if (settings.steps < 16) throw std::invalid_argument("solve_crystal: need at least 16 steps");
  if (!(gamma >= Scalar(0))) throw std::invalid_argument("solve_crystal: gamma must be >= 0");

  const Index n = grid.size();
  const HDrive<Scalar> drive = h_drive(geom, crystal_index);
  const Mat pump = pump_matrix(geom, grid).template cast<C>();
  const RMatrixT<Scalar> dk = delta_k_matrix(m, grid);

  const Scalar h = geom.length / Scalar(settings.steps);
  const Scalar c = gamma * grid.dq();

  // H(L) = exp(i dk (slope L + offset)), advanced by elementwise half-step
  // rotations instead of fresh exponentials.
  Mat hcur = (C(Scalar(0), Scalar(1)) * dk.template cast<C>() * drive.offset).array().exp();
  const Mat hhalf =
      (C(Scalar(0), Scalar(1)) * dk.template cast<C>() * (drive.slope * h / Scalar(2)))
          .array()
          .exp();

  Mat b = Mat::Zero(n, n);
  Mat estar = delta_matrix(grid);  // eta-tilde* starts as the discrete delta (real)

  Mat w(n, n), bt(n, n), et(n, n);
  Mat k1b(n, n), k1e(n, n), k2b(n, n), k2e(n, n), k3b(n, n), k3e(n, n), k4b(n, n), k4e(n, n);

  for (int step = 0; step < settings.steps; ++step) {
    w = pump.cwiseProduct(hcur);
    k1b.noalias() = c * (w * estar);
    k1e.noalias() = c * (w.conjugate() * b);

    hcur = hcur.cwiseProduct(hhalf);
    w = pump.cwiseProduct(hcur);
    bt = b + (h / Scalar(2)) * k1b;
    et = estar + (h / Scalar(2)) * k1e;
    k2b.noalias() = c * (w * et);
    k2e.noalias() = c * (w.conjugate() * bt);
    bt = b + (h / Scalar(2)) * k2b;
    et = estar + (h / Scalar(2)) * k2e;
    k3b.noalias() = c * (w * et);
    k3e.noalias() = c * (w.conjugate() * bt);

    hcur = hcur.cwiseProduct(hhalf);
    w = pump.cwiseProduct(hcur);
    bt = b + h * k3b;
    et = estar + h * k3e;
    k4b.noalias() = c * (w * et);
    k4e.noalias() = c * (w.conjugate() * bt);

    b += (h / Scalar(6)) * (k1b + Scalar(2) * k2b + Scalar(2) * k3b + k4b);
    estar += (h / Scalar(6)) * (k1e + Scalar(2) * k2e + Scalar(2) * k3e + k4e);

    if (!b.allFinite() || !estar.allFinite())
      throw std::runtime_error("solve_crystal: non-finite kernel values at step " +
                               std::to_string(step + 1) + " of " +
                               std::to_string(settings.steps));
  }

  return {grid,  std::move(b), estar.conjugate(), geom.configuration,
          gamma, settings.steps, crystal_index};
}

/// Interferometer composition for a phase phi placed between the crystals:
///   E_su = (E2 E1 + e^{i phi} B2 B1^*) dq,
///   B_su = (E2 B1 + e^{i phi} B2 E1^*) dq.
/// tp2 must be the phase-independent second-crystal pair, so one pair of
/// solves serves every phi.
template <class Scalar>
TransferPair<Scalar> compose(const TransferPair<Scalar>& tp1, const TransferPair<Scalar>& tp2,
                             Scalar phi) {
  using C = ComplexT<Scalar>;
  if (tp1.grid != tp2.grid) throw std::invalid_argument("compose: grids do not match");
  const Scalar dq = tp1.grid.dq();
  const C e = std::exp(C(Scalar(0), phi));
  TransferPair<Scalar> out{tp1.grid,
                           (tp2.E * tp1.B + e * (tp2.B * tp1.E.conjugate())) * dq,
                           (tp2.E * tp1.E + e * (tp2.B * tp1.B.conjugate())) * dq,
                           tp1.configuration,
                           tp1.gamma,
                           std::max(tp1.steps, tp2.steps),
                           0};  // crystal = 0 marks a composed pair
  return out;
}

/// Second-crystal kernels of the compensated interferometer obtained from the
/// first crystal without another solve:
///   eta2(q, q') = eta1(q', q)^*,   beta2(q, q') = e^{i phi} beta1(q', q).
/// Valid because the compensated drive is the mirror image of the first
/// crystal's.  Use phi = 0 to feed compose().
template <class Scalar>
TransferPair<Scalar> compensated_second_from_first(const TransferPair<Scalar>& tp1,
                                                   Scalar phi = Scalar(0)) {
  using C = ComplexT<Scalar>;
  return {tp1.grid,
          std::exp(C(Scalar(0), phi)) * tp1.B.transpose(),
          tp1.E.adjoint(),
          Configuration::CompensatedSecond,
          tp1.gamma,
          tp1.steps,
          2};
}

/// Self-convergence measure: solve with the given number of steps and with
/// twice as many, return the largest elementwise difference relative to the
/// largest kernel magnitude.  RK4 makes this shrink ~16x per doubling.
template <class Scalar>
Scalar convergence_report(const CrystalGeometry<Scalar>& geom, const OpticalModel<Scalar>& m,
                          Scalar gamma, const Grid<Scalar>& grid, int steps,
                          int crystal_index = 1) {
  if (steps < 32) throw std::invalid_argument("convergence_report: need at least 32 steps");
  SolverSettings<Scalar> coarse{steps, Scalar(1e-6)};
  SolverSettings<Scalar> fine{2 * steps, Scalar(1e-6)};
  const TransferPair<Scalar> a = solve_crystal(geom, m, gamma, grid, coarse, crystal_index);
  const TransferPair<Scalar> b = solve_crystal(geom, m, gamma, grid, fine, crystal_index);
  const Scalar diff = std::max((a.B - b.B).cwiseAbs().maxCoeff(), (a.E - b.E).cwiseAbs().maxCoeff());
  const Scalar scale = std::max(b.B.cwiseAbs().maxCoeff(), b.E.cwiseAbs().maxCoeff());
  return scale > Scalar(0) ? diff / scale : Scalar(0);
}

}  // namespace su11
