#pragma once

#include "spinmetro/spin.hpp"
#include "spinmetro/sqrt_rational.hpp"
#include "spinmetro/types.hpp"

namespace spinmetro {

// n! as an exact big integer. Cached; n is limited only by a generous internal
// bound well past the supported spin range.
const BigInt& factorial(int n);

// Triangle rule for a triad of doubled spins: |a-b| <= c <= a+b with integer
// perimeter. Returns false for any invalid or incompatible triad.
bool triangle_ok(int two_a, int two_b, int two_c);

// Clebsch-Gordan coefficient <j1 m1; j2 m2 | j m> in the Condon-Shortley
// convention, computed by the Racah single-sum formula over exact rationals
// with one final square root. All arguments are doubled (two_j = 2j).
// Returns zero when m != m1 + m2 or the triangle rule fails. Throws
// std::invalid_argument for malformed labels (negative j, |m| > j, or m not
// matching the parity of j).
SqrtRational clebsch_gordan_exact(int two_j1, int two_m1, int two_j2,
                                  int two_m2, int two_j, int two_m);
double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2,
                      int two_j, int two_m);

// Wigner 6j symbol {j1 j2 j3; j4 j5 j6} by the Racah formula, same exact
// pipeline as clebsch_gordan. Invalid triads return zero by convention; only
// negative labels throw.
SqrtRational six_j_exact(int two_j1, int two_j2, int two_j3, int two_j4,
                         int two_j5, int two_j6);
double six_j(int two_j1, int two_j2, int two_j3, int two_j4, int two_j5,
             int two_j6);

// Spin operators in the Dicke basis ordered m = s, s-1, ..., -s (row/column 0
// corresponds to m = s). Dimensionless, hbar = 1.
struct SpinOperatorSet {
  Matrix sx;
  Matrix sy;
  Matrix sz;
};

SpinOperatorSet spin_operators(Spin s);
Matrix spin_z(Spin s);
Matrix spin_plus(Spin s);
Matrix spin_minus(Spin s);

// Small Wigner matrix d^{(s)}(beta) = e^{-i beta S_y} from the closed-form
// factorial sum; coefficients are computed exactly once per spin and cached.
RealMatrix wigner_d(Spin s, double beta);

// Full rotation matrix D^{(s)}(alpha, beta, gamma) =
// e^{-i alpha S_z} d(beta) e^{-i gamma S_z} (z-y-z convention).
Matrix wigner_D(Spin s, double alpha, double beta, double gamma);

}  // namespace spinmetro
