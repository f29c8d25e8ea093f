#pragma once

#include "spinmetro/types.hpp"

#include <stdexcept>

namespace spinmetro {

// e^{z H} for Hermitian H, via spectral decomposition. The result is unitary
// for purely imaginary z and positive definite for real z.
inline Matrix herm_exp(const Matrix& h, Complex z) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("herm_exp: eigendecomposition failed");
  }
  const Vector phases =
      (z * es.eigenvalues().cast<Complex>().array()).exp().matrix();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// e^{-i eta H} for Hermitian H.
inline Matrix unitary_exp(const Matrix& h, double eta) {
  return herm_exp(h, Complex(0.0, -eta));
}

// Kronecker product with the block convention (a x b)[(i,k),(j,l)] = a(i,j) b(k,l).
inline Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

inline Complex trace_product(const Matrix& a, const Matrix& b) {
  return (a.transpose().cwiseProduct(b)).sum();
}

inline bool is_hermitian(const Matrix& a, double tol = 1e-12) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

}  // namespace spinmetro
