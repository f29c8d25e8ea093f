#pragma once

#include "spinmetro/spin.hpp"
#include "spinmetro/states.hpp"
#include "spinmetro/types.hpp"

#include <vector>

namespace spinmetro {

// Shell slice of a density matrix, rho^(l) = sum_m rho_lm T_lm (Hermitian),
// and the cumulative part rho^(t) = sum_{l=1}^t rho^(l). The state is
// t-anticoherent exactly when the cumulative part vanishes.
Matrix l_part(const MixedState& rho, int l);
Matrix l_part(const PureState& psi, int l);
Matrix cumulative_part(const MixedState& rho, int t);
Matrix cumulative_part(const PureState& psi, int t);

// C_t = sum_{l=1}^t r_l, the cumulative shell weight driven to zero by the
// forward flow below.
double cumulative_coherence(const MixedState& rho, int t);
double cumulative_coherence(const PureState& psi, int t);

// Tangential part of a Hermitian matrix at a pure state:
// X_par = rho X + X rho - 2 Tr(rho X) rho.
Matrix tangent_part(const PureState& psi, const Matrix& x);

// Manifold gradient of C_t at a pure state, 4 * (cumulative part)_par,
// with respect to the metric g(X, Y) = Tr(XY)/2.
Matrix gradient_C(const PureState& psi, int t);

enum class FlowDirection { forward, backward };

struct DescentConfig {
  int t = 1;
  double step = 0.1;
  double tol = 1e-10;       // on the gradient Frobenius norm
  int max_steps = 20000;
  FlowDirection direction = FlowDirection::forward;
  int sample_every = 10;    // trace stores every k-th accepted step
};

// Sampled integration record. states[i] is the state after steps[i] accepted
// steps; coherence[i] is the flowed functional there (C_t for descend). The
// final state is always appended. converged reports whether the gradient
// norm dropped below tol before max_steps; hitting max_steps is not an
// error.
struct DescentTrace {
  std::vector<PureState> states;
  std::vector<int> steps;
  std::vector<double> coherence;
  bool converged = false;
  int total_steps = 0;
  double final_gradient_norm = 0.0;
};

// Integrates the gradient flow dpsi/dmu = -(I - rho) rho^(t) psi with RK4,
// renormalizing after every stage and halving the step whenever the
// functional moves the wrong way. Forward flow sinks C_t toward
// t-anticoherent states when they exist; backward flow (sign flip) climbs
// toward coherent states.
DescentTrace descend(const PureState& psi0, const DescentConfig& cfg);

// Same flow for a general linear functional f = sum_{l>=1} coeffs[l] r_l,
// whose gradient is 4 (sum_l coeffs[l] rho^(l))_par. coeffs has one entry
// per shell l = 0..2s; entry 0 is ignored (r_0 is constant). cfg.t is
// ignored here. Used to push states toward extremal boundary points of the
// shell-weight locus.
DescentTrace descend_functional(const PureState& psi0,
                                const RealVector& coeffs,
                                const DescentConfig& cfg);

// Non-unitary boost rho' = B rho B / Tr(rho B^2) with B = e^{-mu H}. H must
// be Hermitian and supported on shells l <= t (residual below 1e-10);
// a scalar (l = 0) component is allowed since it cancels in the quotient.
// For t = 1 and H = n.S this reproduces the star-dragging Lorentz boost of
// the Majorana constellation.
MixedState t_boost(const MixedState& rho, const Matrix& h, int t, double mu);
PureState t_boost(const PureState& psi, const Matrix& h, int t, double mu);

}  // namespace spinmetro
