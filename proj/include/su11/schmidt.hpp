#pragma once

#include <cmath>
#include <stdexcept>

#include "su11/grid.hpp"
#include "su11/solver.hpp"
#include "su11/types.hpp"

namespace su11 {

/// Joint Schmidt decomposition of a transfer pair,
///   beta(q, q')      = sum_n sqrt(Lambda_n) u_n(q) psi_n(q'),
///   eta-tilde(q, q') = sum_n sqrt(1 + Lambda_n) u_n(q) psi_n(q')^*,
/// realized as the SVD of the operator matrix Bt = B dq.  Mode samples are
/// scaled by 1/sqrt(dq) so that integral |u_n|^2 dq = 1 on the grid.
template <class Scalar>
struct SchmidtData {
  Grid<Scalar> grid;
  RVectorT<Scalar> eigenvalues;   // Lambda_n, descending
  RVectorT<Scalar> weights;       // lambda_n = Lambda_n / sum Lambda
  CMatrixT<Scalar> output_modes;  // columns u_n(q)
  CMatrixT<Scalar> input_modes;   // columns psi_n(q')

  Index n_modes() const { return eigenvalues.size(); }
};

template <class Scalar>
SchmidtData<Scalar> decompose(const TransferPair<Scalar>& tp, Scalar threshold = Scalar(1e-12)) {
  using Mat = CMatrixT<Scalar>;
  const Index n = tp.grid.size();
  const Scalar dq = tp.grid.dq();
  const Mat bt = tp.B * dq;

  SchmidtData<Scalar> sd{tp.grid, {}, {}, Mat(n, 0), Mat(n, 0)};
  if (bt.norm() == Scalar(0)) return sd;  // no decomposition, K undefined downstream

  Eigen::BDCSVD<Mat> svd(bt, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVectorT<Scalar>& s = svd.singularValues();
  const Scalar lead = s[0] * s[0];
  Index keep = 0;
  while (keep < s.size() && s[keep] * s[keep] >= threshold * lead) ++keep;

  sd.eigenvalues.resize(keep);
  sd.output_modes.resize(n, keep);
  sd.input_modes.resize(n, keep);
  const Scalar root_dq = std::sqrt(dq);
  for (Index k = 0; k < keep; ++k) {
    sd.eigenvalues[k] = s[k] * s[k];
    CVectorT<Scalar> u = svd.matrixU().col(k) / root_dq;
    CVectorT<Scalar> psi = svd.matrixV().col(k).conjugate() / root_dq;
    // Fix the mode phase: largest-magnitude sample of u_n real positive.
    Index imax;
    u.cwiseAbs().maxCoeff(&imax);
    const ComplexT<Scalar> ph = u[imax] / std::abs(u[imax]);
    u /= ph;
    psi *= ph;
    sd.output_modes.col(k) = u;
    sd.input_modes.col(k) = psi;
  }
  const Scalar total = sd.eigenvalues.sum();
  sd.weights = sd.eigenvalues / total;
  return sd;
}

/// Effective mode number K = [sum lambda_n^2]^{-1}.
template <class Scalar>
Scalar schmidt_number(const SchmidtData<Scalar>& sd) {
  if (sd.n_modes() == 0) throw std::domain_error("schmidt_number: empty decomposition");
  return Scalar(1) / sd.weights.squaredNorm();
}

/// Verification that beta and eta-tilde share one Schmidt basis with
/// eigenvalues linked by Lambda~_n = 1 + Lambda_n.
template <class Scalar>
struct JointReport {
  Scalar max_eigenvalue_residual;  // max_n |Lt_n - 1 - L_n| / Lt_n
  Scalar min_left_overlap;         // min_n |<u_n(B), u_n(E)>|
  Scalar min_right_overlap;        // min_n |<psi_n(B), psi_n(E)>|
  Index n_checked;
};

template <class Scalar>
JointReport<Scalar> joint_check(const TransferPair<Scalar>& tp, const SchmidtData<Scalar>& sd,
                                Index max_modes = 5) {
  using Mat = CMatrixT<Scalar>;
  const Scalar dq = tp.grid.dq();
  Eigen::BDCSVD<Mat> svd(Mat(tp.E * dq), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVectorT<Scalar>& st = svd.singularValues();

  JointReport<Scalar> rep{Scalar(0), Scalar(1), Scalar(1), 0};
  const Index k = std::min(max_modes, sd.n_modes());
  for (Index i = 0; i < k; ++i) {
    const Scalar lt = st[i] * st[i];
    rep.max_eigenvalue_residual =
        std::max(rep.max_eigenvalue_residual, std::abs(lt - Scalar(1) - sd.eigenvalues[i]) / lt);
    const Scalar dqn = tp.grid.dq();
    const CVectorT<Scalar> ue = svd.matrixU().col(i) / std::sqrt(dqn);
    // eta-tilde carries psi_n^*: the right singular vectors of Et are the
    // plain (unconjugated) psi_n samples.
    const CVectorT<Scalar> psie = svd.matrixV().col(i) / std::sqrt(dqn);
    const Scalar lo = std::abs(quadrature(tp.grid, CVectorT<Scalar>(sd.output_modes.col(i)
                                                                         .conjugate()
                                                                         .cwiseProduct(ue))));
    const Scalar ro = std::abs(quadrature(
        tp.grid, CVectorT<Scalar>(sd.input_modes.col(i).conjugate().cwiseProduct(psie))));
    rep.min_left_overlap = std::min(rep.min_left_overlap, lo);
    rep.min_right_overlap = std::min(rep.min_right_overlap, ro);
    ++rep.n_checked;
  }
  return rep;
}

}  // namespace su11
