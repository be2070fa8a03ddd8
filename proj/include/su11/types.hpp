#pragma once

#include <Eigen/Dense>
#include <complex>

namespace su11 {

using Index = Eigen::Index;

template <class Scalar> using ComplexT = std::complex<Scalar>;
template <class Scalar>
using CMatrixT = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using CVectorT = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, 1>;
template <class Scalar>
using RMatrixT = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using RVectorT = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using Complex = ComplexT<double>;
using CMatrix = CMatrixT<double>;
using CVector = CVectorT<double>;
using RMatrix = RMatrixT<double>;
using RVector = RVectorT<double>;

template <class Scalar> inline constexpr Scalar pi_v = Scalar(3.141592653589793238462643383279502884L);
inline constexpr double pi = pi_v<double>;

}  // namespace su11
