#pragma once

#include "spinmetro/spin.hpp"
#include "spinmetro/sqrt_rational.hpp"
#include "spinmetro/states.hpp"
#include "spinmetro/types.hpp"

#include <Eigen/Core>

#include <functional>
#include <vector>

namespace spinmetro {

enum class TransformKind { rotation, squeezing, diagonal, custom };

// A unitary acting on the spin-s space, tagged with how it was built.
struct UnitaryTransform {
  Spin spin;
  Matrix matrix;
  TransformKind kind = TransformKind::custom;
};

// e^{-i eta n.S} about an arbitrary axis (default z).
UnitaryTransform rotation_transform(Spin s, double eta);
UnitaryTransform rotation_transform(Spin s, double eta,
                                    const Eigen::Vector3d& axis);

// e^{-i mu S_z^k}; k = 2 is the usual one-axis squeezing.
UnitaryTransform squeezing_transform(Spin s, double mu, int power = 2);

// e^{-i eta f(S_z)} for an arbitrary real profile over the magnetic
// quantum numbers m = s..-s.
UnitaryTransform diagonal_transform(Spin s,
                                    const std::function<double(double)>& f,
                                    double eta);

// Wraps a caller-supplied matrix; throws unless V^dag V = I to 1e-10.
UnitaryTransform custom_transform(Spin s, Matrix v);

// Tr(rho V rho V^dag): |<psi|V|psi>|^2 for pure states, bounded by Tr rho^2.
double fidelity(const PureState& psi, const UnitaryTransform& v);
double fidelity(const MixedState& rho, const UnitaryTransform& v);

// Sensitivity of a pure state to the one-parameter family e^{-i eta X}:
// twice the squared norm of |[X, rho]>, which equals -2 F''(0) and is
// unchanged when X picks up a global phase e^{iw}.
double qfi(const PureState& psi, const Matrix& x);

// Same value computed through the phase-dressed flow generator norm
// ||F_{w rho} |X>||^2 * 2; exposes the w-independence for testing.
double qfi_phase_route(const PureState& psi, const Matrix& x, double omega);

// Haar average of qfi(U rho U^dag, X):
//   4 (Tr X^2 / (2s+1) - rt_rho . rt_X),  rt_X,l = sum_m |X_lm|^2 / sqrt(2l+1).
double avg_qfi(const PureState& psi, const Matrix& x);

// Shell weights w_l = sum_m |Tr(A T_lm^dag)|^2 of an arbitrary matrix;
// they sum to the squared Frobenius norm (= 2s+1 for a unitary).
RealVector shell_weights(Spin s, const Matrix& a);

// Orbit-averaged fidelity int dU Tr(rho_U V rho_U V^dag) evaluated in
// closed form: r_B^T G r_V with the metric G_{ll'} = lambda_{ll'}/(2l+1).
// For pure states this collapses to sum_l r_l |V_l|^2 / (2l+1).
double avg_fidelity(const PureState& psi, const UnitaryTransform& v);
double avg_fidelity(const MixedState& rho, const UnitaryTransform& v);

// Product quadrature over Euler angles: trapezoid in alpha and gamma,
// Gauss-Legendre in cos(beta). Exact for band-limited integrands once the
// grid resolves frequency 4s, so it doubles as an independent oracle for
// the closed forms above. n_beta must be one of {8, 16, 24, 32, 48, 64}.
struct EulerGrid {
  int n_alpha = 32;
  int n_beta = 32;
  int n_gamma = 32;
};

// Average of f(U) over the rotation group with the grid above.
double haar_average(Spin s, const EulerGrid& grid,
                    const std::function<double(const Matrix&)>& f);

double avg_fidelity_quadrature(const PureState& psi,
                               const UnitaryTransform& v,
                               const EulerGrid& grid);
double avg_fidelity_quadrature(const MixedState& rho,
                               const UnitaryTransform& v,
                               const EulerGrid& grid);

// |V_l|^2 for the diagonal family V = e^{-i eta f(S_z)} without building
// the matrix: (2l+1)/(2s+1) sum_{m1,m2} C_{m1} C_{m2} cos[(f(m1)-f(m2)) eta]
// with C_m the diagonal Clebsch-Gordan column <s m; l 0 | s m>.
RealVector diagonal_v_components(Spin s,
                                 const std::function<double(double)>& f,
                                 double eta);

// Finite linear combination sum_i coefficients[i] * cos(frequencies[i] * x)
// with distinct non-negative integer frequencies in increasing order.
struct CosineSeries {
  std::vector<int> frequencies;
  RealVector coefficients;

  double evaluate(double x) const;
};

// Exact-rational twin of CosineSeries used where bit-exact comparisons
// matter; frequencies ascending, coefficients aligned.
struct RationalCosineSeries {
  std::vector<int> frequencies;
  std::vector<BigRational> coefficients;

  CosineSeries to_double() const;
};

// Squeezing response of the orbit-averaged fidelity, resolved onto the
// independent shell weights: for V = e^{-i mu S_z^2},
//   Fbar(mu) = phi_0(mu) + sum_t phi_t(mu) r_t
// over the free shells t = 1..floor(s). Coefficients are exact rationals.
std::vector<RationalCosineSeries> squeezing_phi_exact(Spin s);
std::vector<CosineSeries> squeezing_phi(Spin s);

// Tr(rho sigma) / max(Tr rho^2, Tr sigma^2).
double hs_quasi_fidelity(const MixedState& rho, const MixedState& sigma);

// Orbit average of the quasi-fidelity against V-conjugation:
// G(r_rho, r_V) / Tr rho^2, equal to the positive-minus-negative split of
// the rescaled shell weights in the eigenbasis of the symmetric lambda.
double avg_hs_fidelity(const MixedState& rho, const UnitaryTransform& v);

}  // namespace spinmetro
