#pragma once

#include <stdexcept>

#include "su11/types.hpp"

namespace su11 {

/// Uniform symmetric transverse-momentum grid.
///
/// The grid always contains q = 0 as its middle sample (n odd) and spans
/// [-q_max, q_max].  Two-argument kernels k(q, q') are stored as dense n x n
/// matrices with the row index running over the first argument.  Integrals
/// are Riemann sums with weight dq, so the discrete Dirac delta is
/// delta_{ij} / dq and the operator matrix associated with a kernel is
/// k * dq (kernel composition then becomes a plain matrix product).
template <class Scalar>
class Grid {
 public:
  Grid(Scalar q_max, Index n_points) : q_max_(q_max), n_(n_points) {
    if (!(q_max > Scalar(0))) throw std::invalid_argument("Grid: q_max must be positive");
    if (n_points < 3 || n_points % 2 == 0)
      throw std::invalid_argument("Grid: n_points must be odd and at least 3");
  }

  Index size() const { return n_; }
  Scalar q_max() const { return q_max_; }
  Scalar q_min() const { return -q_max_; }
  Scalar dq() const { return Scalar(2) * q_max_ / Scalar(n_ - 1); }

  /// i-th sample; the middle sample is exactly zero.
  Scalar q(Index i) const { return Scalar(i - zero_index()) * dq(); }
  Index zero_index() const { return (n_ - 1) / 2; }
  /// Index of -q(i).
  Index mirror(Index i) const { return n_ - 1 - i; }

  RVectorT<Scalar> points() const {
    RVectorT<Scalar> p(n_);
    for (Index i = 0; i < n_; ++i) p[i] = q(i);
    return p;
  }

  bool operator==(const Grid& other) const { return q_max_ == other.q_max_ && n_ == other.n_; }
  bool operator!=(const Grid& other) const { return !(*this == other); }

 private:
  Scalar q_max_;
  Index n_;
};

/// Riemann sum of a sampled function: sum_i f(q_i) * dq.
template <class Scalar, class Derived>
typename Derived::Scalar quadrature(const Grid<Scalar>& grid, const Eigen::MatrixBase<Derived>& f) {
  if (f.size() != grid.size())
    throw std::invalid_argument("quadrature: sample count does not match grid size");
  return f.sum() * typename Derived::Scalar(grid.dq());
}

/// Discrete Dirac delta as a kernel: 1/dq on the diagonal.
template <class Scalar>
CMatrixT<Scalar> delta_matrix(const Grid<Scalar>& grid) {
  CMatrixT<Scalar> d = CMatrixT<Scalar>::Zero(grid.size(), grid.size());
  d.diagonal().setConstant(ComplexT<Scalar>(Scalar(1) / grid.dq(), Scalar(0)));
  return d;
}

/// Operator matrix of a kernel: M = k * dq.  delta_matrix maps to the identity.
template <class Scalar, class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> to_operator(
    const Grid<Scalar>& grid, const Eigen::MatrixBase<Derived>& kernel) {
  if (kernel.rows() != grid.size() || kernel.cols() != grid.size())
    throw std::invalid_argument("to_operator: kernel dimensions do not match grid size");
  return kernel.derived() * grid.dq();
}

/// Inverse of to_operator.
template <class Scalar, class Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> from_operator(
    const Grid<Scalar>& grid, const Eigen::MatrixBase<Derived>& op) {
  if (op.rows() != grid.size() || op.cols() != grid.size())
    throw std::invalid_argument("from_operator: matrix dimensions do not match grid size");
  return op.derived() / grid.dq();
}

/// Kernel composition (a o b)(q, q') = integral dq_bar a(q, q_bar) b(q_bar, q').
template <class Scalar, class DerivedA, class DerivedB>
Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic> compose_kernels(
    const Grid<Scalar>& grid, const Eigen::MatrixBase<DerivedA>& a,
    const Eigen::MatrixBase<DerivedB>& b) {
  if (a.rows() != grid.size() || a.cols() != grid.size() || b.rows() != grid.size() ||
      b.cols() != grid.size())
    throw std::invalid_argument("compose_kernels: kernel dimensions do not match grid size");
  return (a.derived() * b.derived()) * grid.dq();
}

}  // namespace su11
