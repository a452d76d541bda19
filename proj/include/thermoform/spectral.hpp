#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "thermoform/polynomial.hpp"

namespace thermoform {

/// Largest dimension handled through the characteristic polynomial (exact
/// rational policy only); beyond it the Eigen QR solver is used.
inline constexpr std::size_t kCharpolyMaxDim = 4;
inline constexpr int kEigenMaxIterations = 200;  // per row, Eigen's convention

namespace detail {

inline std::vector<std::complex<double>> eigen_eigenvalues(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return {};
  Eigen::EigenSolver<Eigen::MatrixXd> es;
  es.setMaxIterations(kEigenMaxIterations);
  es.compute(m, false);
  if (es.info() != Eigen::Success) throw NotConverged("eigenvalue solver", kEigenMaxIterations);
  std::vector<std::complex<double>> out(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i) out[i] = es.eigenvalues()(i);
  return out;
}

}  // namespace detail

/// Eigenvalues of a square matrix. Under rational policy and small d these are
/// the roots of the squarefree part of the characteristic polynomial, so each
/// distinct eigenvalue appears once; otherwise multiplicities are kept.
template <Scalar T>
std::vector<std::complex<double>> eigenvalues(const Matrix<T>& m) {
  if (!m.square()) throw InvalidInput("eigenvalues of a non-square matrix");
  if constexpr (is_exact_v<T>) {
    if (m.rows() <= kCharpolyMaxDim) {
      const auto sf = squarefree_part(characteristic_polynomial(m));
      if (sf.degree() == 1 && sf.coef[0] == 0) return {std::complex<double>(0.0, 0.0)};
      return roots(sf);
    }
  }
  return detail::eigen_eigenvalues(to_eigen(m));
}

template <Scalar T>
double spectral_radius(const Matrix<T>& m) {
  if (m.rows() == 1) return std::fabs(to_double(m(0, 0)));
  double r = 0.0;
  for (const auto& z : eigenvalues(m)) r = std::max(r, std::abs(z));
  return r;
}

/// Largest singular value.
template <Scalar T>
double operator_norm(const Matrix<T>& m) {
  if (m.rows() == 1 && m.cols() == 1) return std::fabs(to_double(m(0, 0)));
  if constexpr (is_exact_v<T>) {
    if (m.cols() <= kCharpolyMaxDim) {
      if (m.is_zero()) return 0.0;
      return std::sqrt(spectral_radius(Matrix<T>(m.transpose() * m)));
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

/// Singular values in decreasing order (double precision under both policies).
template <Scalar T>
std::vector<double> singular_values(const Matrix<T>& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(m));
  const auto& s = svd.singularValues();
  return std::vector<double>(s.data(), s.data() + s.size());
}

template <Scalar T>
double frobenius_norm(const Matrix<T>& m) {
  return std::sqrt(to_double(frobenius_squared(m)));
}

/// Symmetric eigen-decomposition helpers on double data.
inline double min_eigenvalue_symmetric(const Matrix<double>& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(s), Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

inline Matrix<double> inverse_sqrt_symmetric(const Matrix<double>& s) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(s));
  const Eigen::VectorXd inv = es.eigenvalues().cwiseSqrt().cwiseInverse();
  return from_eigen(es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose());
}

}  // namespace thermoform
