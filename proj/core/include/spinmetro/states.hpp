#pragma once

#include "spinmetro/spin.hpp"
#include "spinmetro/tensorbasis.hpp"
#include "spinmetro/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace spinmetro {

// Pure spin state in the Dicke basis |s,m>, m = s down to -s (index 0 is
// m = s). Amplitudes are unit-norm.
struct PureState {
  Spin spin;
  Vector amplitudes;
};

// Mixed spin state: Hermitian, unit trace, positive semidefinite density
// matrix in the Dicke basis.
struct MixedState {
  Spin spin;
  Matrix matrix;
};

// Validating constructors. make_pure_state normalizes away rounding-level
// drift but rejects vectors whose norm is off by more than 1e-8;
// make_mixed_state checks Hermiticity, unit trace and spectrum >= -1e-10.
PureState make_pure_state(Spin s, Vector amplitudes);
MixedState make_mixed_state(Spin s, Matrix matrix);

// |psi><psi| as a MixedState.
MixedState to_density(const PureState& psi);

MixedState maximally_mixed(Spin s);

// Components of a density matrix in the irreducible tensor basis,
// rho_lm = Tr(rho T_lm^dag). Hermiticity gives rho_{l,-m} = (-1)^m
// conj(rho_lm) and unit trace gives rho_00 = 1/sqrt(n).
class TComponents {
 public:
  TComponents(Spin s, std::vector<Complex> values);

  Spin spin() const { return spin_; }
  const Complex& at(int l, int m) const;

  // Sum_lm rho_lm T_lm, rebuilding the matrix the components came from.
  Matrix reconstruct(const TBasis& basis) const;

 private:
  Spin spin_;
  std::vector<Complex> values_;
};

TComponents t_components(const MixedState& rho);
TComponents t_components(const PureState& psi);

// Rotation-invariant shell weights r_l = sum_m |rho_lm|^2, l = 0..2s,
// together with the rescaled form r_tilde_l = r_l / sqrt(2l+1). r_0 = 1/n
// for every unit-trace state and sum_l r_l = Tr(rho^2).
struct RVector {
  RealVector r;
  RealVector r_tilde;
};

RVector r_vector(const MixedState& rho);
RVector r_vector(const PureState& psi);

// Orbit-averaged route <rho| sum_m T_lm x conj(T_lm) |rho>, which equals
// lambda * r componentwise. Coincides with r_vector for pure states only.
RealVector orbit_r_vector(const MixedState& rho);
RealVector orbit_r_vector(const PureState& psi);

// Largest t such that r_1 + ... + r_t <= tol (0 if r_1 already exceeds it).
int anticoherence_order(const PureState& psi, double tol = 1e-9);

// One star of a Majorana constellation, in spherical coordinates.
struct Star {
  double theta;  // polar angle in [0, pi]
  double phi;    // azimuth in [0, 2*pi)
};

// Multiset of 2s stars on the unit sphere representing a pure state up to
// phase. Roots of the state's characteristic polynomial map to stars by
// stereographic projection from the south pole; degree deficits contribute
// stars at theta = pi.
struct Constellation {
  std::vector<Star> stars;
};

Constellation majorana_constellation(const PureState& psi);

// Image of a constellation under the one-parameter flow that drags every
// star away from -axis: along +z the root transform is zeta -> e^eta zeta.
Constellation majorana_boost(const Constellation& c, double eta,
                             const Eigen::Vector3d& axis);

// Minimum total spherical distance over bipartite star pairings. Requires
// equal star counts.
double constellation_distance(const Constellation& a, const Constellation& b);

Eigen::Vector3d star_to_unit_vector(const Star& s);

// Catalog of benchmark states. Tags: "coherent" and "ghz" (any spin),
// "w" = |s, s-1> (any spin >= 1), "tetrahedron" (s = 2),
// "triangular-prism" (s = 3), "triangular-bipyramid" and
// "triangular-pyramid" (s = 5/2). Unknown tag or unsupported spin throws.
PureState named_state(const std::string& tag, Spin s);

std::vector<std::string> named_state_tags(Spin s);

// Unit-norm complex Gaussian vector (Fubini-Study measure) and GG^dag
// normalized to unit trace (Hilbert-Schmidt measure). Both are fully
// deterministic functions of the seed.
PureState random_pure(Spin s, std::uint64_t seed);
MixedState random_mixed(Spin s, std::uint64_t seed);

}  // namespace spinmetro
