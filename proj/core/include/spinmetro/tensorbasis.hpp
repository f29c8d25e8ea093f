#pragma once

#include "spinmetro/spin.hpp"
#include "spinmetro/sqrt_rational.hpp"
#include "spinmetro/types.hpp"

#include <vector>

namespace spinmetro {

// Orthonormal irreducible tensor-operator basis of the n x n matrices:
// T_lm with l = 0..2s and m = -l..l, built from Clebsch-Gordan coefficients as
// (T_lm)_{m1 m2} = sqrt((2l+1)/n) <s m2; l m | s m1>.
// Satisfies Tr(T_lm T_{l'm'}^dag) = delta delta, T_{l,-m} = (-1)^m T_lm^dag,
// and T_00 = I/sqrt(n); under rotation, D T_lm D^dag mixes only within shell l
// with coefficients from the spin-l rotation matrix.
class TBasis {
 public:
  explicit TBasis(Spin s);

  Spin spin() const { return spin_; }
  int shells() const { return spin_.dim(); }  // l runs over 0..2s

  // T_lm; requires 0 <= l <= 2s and |m| <= l.
  const Matrix& t(int l, int m) const;

  // Hermitian partner basis, orthonormal under g(X,Y) = Tr(XY)/2:
  //   H_lm = T_lm + (-1)^m T_{l,-m}          for 1 <= m <= l,
  //   H_lm = -i (T_lm - (-1)^m T_{l,-m})     for -l <= m <= -1,
  //   H_l0 = sqrt(2) T_l0.
  Matrix h(int l, int m) const;

 private:
  int index(int l, int m) const;

  Spin spin_;
  std::vector<Matrix> ops_;
};

TBasis build_t_basis(Spin s);

// Process-wide immutable cache, built once per spin. Handy in loops that
// need tensor components per step without rebuilding the basis.
const TBasis& cached_t_basis(Spin s);

// Row-major vectorization |A> and its inverse: |A>_(ij) = A_ij with the
// composite index scanning rows first. |U1 A U2^dag> = (U1 x conj(U2)) |A>.
Vector vectorize(const Matrix& a);
Matrix devectorize(const Vector& v);

// Vectorized commutator action ad_rho = rho x I - I x rho^T, so that
// |[rho, X]> = ad_rho |X>. Requires Hermitian input.
Matrix ad_rho(const Matrix& rho);

// Pi_rho = ad_rho^2. For pure rho this is the projector onto the tangent
// space of the density-matrix manifold: Pi_rho |X> = |rho X + X rho - 2 Tr(rho X) rho>.
Matrix pi_rho(const Matrix& rho);

// Vectorized generator of the trace-preserving flow induced by e^{-i eta X_w}
// with X_w = e^{iw} X: the state derivative is devectorize(i F |X>), and
//   F_{w rho} = e^{-iw} rho x I - e^{iw} I x rho^T + 2i sin(w) |rho><rho|.
// Satisfies F^dag F = Pi_rho and reduces to ad_rho at w = 0. Defined for pure
// rho only (Tr rho^2 = 1 within 1e-10).
Matrix f_omega(const Matrix& rho, double omega);

// Eigenvalue matrix of the invariant operators: TT_l |T_{l'm'}> within the
// vectorized picture scales by lambda_{ll'} = (-1)^{2s+l+l'} (2l+1) {s s l; s s l'}.
// Every entry is exactly rational (the four triangle factors of the 6j pair up
// into perfect squares); both the exact values and a double view are kept.
// Identities: lambda^2 = I, (2l'+1) lambda_{ll'} = (2l+1) lambda_{l'l},
// Tr lambda = (2s+1) mod 2.
struct LambdaMatrix {
  Spin spin;
  RealMatrix entries;
  std::vector<std::vector<BigRational>> exact;
};

LambdaMatrix lambda_matrix(Spin s);

// Symmetric form A lambda A^{-1} with A = diag(1/sqrt(2l+1)); its eigenbasis
// is orthogonal, which the locus frames exploit.
RealMatrix lambda_tilde(const LambdaMatrix& lambda);

// SU(2)-invariant operators on vectorized matrices:
//   tbb[l] = sum_m T_lm x conj(T_lm)      (mutually commuting, eigenvalues lambda)
//   tbf[l] = sum_m |T_lm><T_lm|           (orthogonal shell projectors)
// Both families are n^2 x n^2 and related by the lambda matrix in both
// directions. lambda_proj is the projector onto the invariant subspace,
// sum_l |tbb[l]><tbb[l]| / (2l+1), an n^4 x n^4 matrix equal to the Haar
// average of (U x conj U) x conj(U x conj U); it is only materialized on
// request because of its size, and only for small spins.
struct InvariantOperators {
  Spin spin;
  std::vector<Matrix> tbb;
  std::vector<Matrix> tbf;
  Matrix lambda_proj;
};

InvariantOperators build_invariant_ops(Spin s,
                                       bool with_lambda_projector = false);

// Exact affine solution set of lambda r = r with the unit-trace value
// r_0 = 1/n substituted: every pure state's shell-weight vector lies in it.
// Elimination keeps the lowest shell indices free, so
//   r_l = offset[l] + sum_t slope[l][t] * r_{free_shells[t]}.
// For the supported spins the free shells come out as 1..floor(s). offset_d
// and slope_d mirror the exact data as doubles.
struct PureShellForm {
  Spin spin;
  std::vector<int> free_shells;
  std::vector<BigRational> offset;
  std::vector<std::vector<BigRational>> slope;
  RealVector offset_d;
  RealMatrix slope_d;
};

PureShellForm pure_shell_form(Spin s);

}  // namespace spinmetro
