#include "spinmetro/descent.hpp"

#include "spinmetro/linalg.hpp"
#include "spinmetro/tensorbasis.hpp"

#include <cmath>
#include <stdexcept>

namespace spinmetro {

namespace {

void check_shell_index(Spin s, int l, const char* op) {
  if (l < 0 || l > s.two_s) {
    throw std::invalid_argument(std::string(op) + ": shell index out of range");
  }
}

Matrix shell_slice(const Matrix& rho, const TBasis& basis, int l) {
  const int n = rho.rows();
  Matrix part = Matrix::Zero(n, n);
  for (int m = -l; m <= l; ++m) {
    const Matrix& t = basis.t(l, m);
    const Complex component = t.conjugate().cwiseProduct(rho).sum();
    part += component * t;
  }
  return 0.5 * (part + part.adjoint()).eval();
}

// sum over shells of coeffs[l] * rho^(l), l >= 1
Matrix weighted_part(const Matrix& rho, const TBasis& basis,
                     const RealVector& coeffs) {
  const int n = rho.rows();
  Matrix out = Matrix::Zero(n, n);
  for (int l = 1; l < n; ++l) {
    if (coeffs(l) == 0.0) continue;
    out += coeffs(l) * shell_slice(rho, basis, l);
  }
  return out;
}

Matrix tangent_at(const Matrix& rho, const Matrix& x) {
  return rho * x + x * rho - 2.0 * (rho * x).trace() * rho;
}

double functional_value(const Matrix& rho, const TBasis& basis,
                        const RealVector& coeffs) {
  double total = 0.0;
  for (int l = 1; l < rho.rows(); ++l) {
    if (coeffs(l) == 0.0) continue;
    double shell = 0.0;
    for (int m = -l; m <= l; ++m) {
      shell += std::norm(basis.t(l, m).conjugate().cwiseProduct(rho).sum());
    }
    total += coeffs(l) * shell;
  }
  return total;
}

RealVector cumulative_weights(Spin s, int t) {
  RealVector coeffs = RealVector::Zero(s.dim());
  for (int l = 1; l <= t; ++l) coeffs(l) = 1.0;
  return coeffs;
}

// Validates the generator's shell support and returns B = e^{-mu h}.
Matrix checked_boost(Spin s, const Matrix& h, int t, double mu) {
  if (t < 1 || t > s.two_s) {
    throw std::invalid_argument("t_boost: order must be in [1, 2s]");
  }
  if (h.rows() != s.dim() || h.cols() != s.dim() || !is_hermitian(h, 1e-10)) {
    throw std::invalid_argument("t_boost: generator must be Hermitian n x n");
  }
  const TBasis& basis = cached_t_basis(s);
  Matrix inside = Matrix::Zero(s.dim(), s.dim());
  for (int l = 0; l <= t; ++l) inside += shell_slice(h, basis, l);
  if ((h - inside).norm() > 1e-10) {
    throw std::invalid_argument(
        "t_boost: generator has weight above the requested shell order");
  }
  return herm_exp(h, Complex(-mu, 0.0));
}

}  // namespace

Matrix l_part(const MixedState& rho, int l) {
  check_shell_index(rho.spin, l, "l_part");
  return shell_slice(rho.matrix, cached_t_basis(rho.spin), l);
}

Matrix l_part(const PureState& psi, int l) {
  return l_part(to_density(psi), l);
}

Matrix cumulative_part(const MixedState& rho, int t) {
  if (t < 1 || t > rho.spin.two_s) {
    throw std::invalid_argument("cumulative_part: order must be in [1, 2s]");
  }
  const TBasis& basis = cached_t_basis(rho.spin);
  Matrix out = Matrix::Zero(rho.spin.dim(), rho.spin.dim());
  for (int l = 1; l <= t; ++l) out += shell_slice(rho.matrix, basis, l);
  return out;
}

Matrix cumulative_part(const PureState& psi, int t) {
  return cumulative_part(to_density(psi), t);
}

double cumulative_coherence(const MixedState& rho, int t) {
  if (t < 1 || t > rho.spin.two_s) {
    throw std::invalid_argument(
        "cumulative_coherence: order must be in [1, 2s]");
  }
  return functional_value(rho.matrix, cached_t_basis(rho.spin),
                          cumulative_weights(rho.spin, t));
}

double cumulative_coherence(const PureState& psi, int t) {
  return cumulative_coherence(to_density(psi), t);
}

Matrix tangent_part(const PureState& psi, const Matrix& x) {
  if (x.rows() != psi.spin.dim() || x.cols() != psi.spin.dim()) {
    throw std::invalid_argument("tangent_part: matrix must be n x n");
  }
  if (!is_hermitian(x, 1e-10)) {
    throw std::invalid_argument("tangent_part: matrix must be Hermitian");
  }
  const Matrix rho = psi.amplitudes * psi.amplitudes.adjoint();
  return tangent_at(rho, x);
}

Matrix gradient_C(const PureState& psi, int t) {
  if (t < 1 || t > psi.spin.two_s) {
    throw std::invalid_argument("gradient_C: order must be in [1, 2s]");
  }
  const Matrix rho = psi.amplitudes * psi.amplitudes.adjoint();
  const Matrix part = weighted_part(rho, cached_t_basis(psi.spin),
                                    cumulative_weights(psi.spin, t));
  return 4.0 * tangent_at(rho, part);
}

DescentTrace descend_functional(const PureState& psi0,
                                const RealVector& coeffs,
                                const DescentConfig& cfg) {
  const Spin s = psi0.spin;
  if (coeffs.size() != s.dim()) {
    throw std::invalid_argument(
        "descend_functional: one coefficient per shell expected");
  }
  if (cfg.step <= 0.0 || cfg.tol <= 0.0 || cfg.max_steps < 1 ||
      cfg.sample_every < 1) {
    throw std::invalid_argument("descend_functional: bad configuration");
  }
  const TBasis& basis = cached_t_basis(s);
  const double sign = cfg.direction == FlowDirection::forward ? 1.0 : -1.0;

  // dpsi/dmu = -+ (I - rho) H psi with H = sum_l coeffs[l] rho^(l)
  const auto field = [&](const Vector& psi) -> Vector {
    const Matrix rho = psi * psi.adjoint();
    const Matrix h = weighted_part(rho, basis, coeffs);
    const Vector image = h * psi;
    return -sign * (image - psi.dot(image) * psi);
  };
  const auto value_of = [&](const Vector& psi) {
    return functional_value((psi * psi.adjoint()).eval(), basis, coeffs);
  };
  const auto gradient_norm = [&](const Vector& psi) {
    const Matrix rho = psi * psi.adjoint();
    const Matrix h = weighted_part(rho, basis, coeffs);
    return 4.0 * tangent_at(rho, h).norm();
  };

  DescentTrace trace;
  Vector psi = psi0.amplitudes;
  double value = value_of(psi);
  double h = cfg.step;

  const auto record = [&](int step_index) {
    trace.states.push_back(PureState{s, psi});
    trace.steps.push_back(step_index);
    trace.coherence.push_back(value);
  };
  record(0);

  int step = 0;
  bool stalled = false;
  while (step < cfg.max_steps) {
    const double grad_norm = gradient_norm(psi);
    if (grad_norm < cfg.tol) {
      trace.converged = true;
      trace.final_gradient_norm = grad_norm;
      break;
    }
    // One RK4 step, renormalizing after every stage.
    const Vector k1 = field(psi);
    const Vector y2 = (psi + 0.5 * h * k1).normalized();
    const Vector k2 = field(y2);
    const Vector y3 = (psi + 0.5 * h * k2).normalized();
    const Vector k3 = field(y3);
    const Vector y4 = (psi + h * k3).normalized();
    const Vector k4 = field(y4);
    const Vector next =
        (psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).normalized();
    const double next_value = value_of(next);
    // The flowed functional must move with the sign of the flow; tolerate
    // rounding-floor jitter so the controller cannot stall at convergence.
    const double slack = 1e-14 * (1.0 + std::abs(value));
    if (sign * (next_value - value) > slack) {
      h *= 0.5;
      if (h < 1e-12) {
        trace.final_gradient_norm = grad_norm;
        stalled = true;
        break;
      }
      continue;
    }
    psi = next;
    value = next_value;
    ++step;
    if (step % cfg.sample_every == 0) record(step);
  }
  trace.total_steps = step;
  if (!trace.converged && !stalled) {
    trace.final_gradient_norm = gradient_norm(psi);
    trace.converged = trace.final_gradient_norm < cfg.tol;
  }
  if (trace.steps.back() != step) record(step);
  return trace;
}

DescentTrace descend(const PureState& psi0, const DescentConfig& cfg) {
  if (cfg.t < 1 || cfg.t > psi0.spin.two_s) {
    throw std::invalid_argument("descend: order must be in [1, 2s]");
  }
  return descend_functional(psi0, cumulative_weights(psi0.spin, cfg.t), cfg);
}

MixedState t_boost(const MixedState& rho, const Matrix& h, int t, double mu) {
  const Matrix boost = checked_boost(rho.spin, h, t, mu);
  Matrix image = boost * rho.matrix * boost;
  const double norm = image.trace().real();
  if (!(norm > 0.0)) {
    throw std::runtime_error("t_boost: normalization collapsed");
  }
  image /= norm;
  return MixedState{rho.spin, 0.5 * (image + image.adjoint())};
}

PureState t_boost(const PureState& psi, const Matrix& h, int t, double mu) {
  const Matrix boost = checked_boost(psi.spin, h, t, mu);
  const Vector image = boost * psi.amplitudes;
  const double norm = image.norm();
  if (!(norm > 0.0)) {
    throw std::runtime_error("t_boost: normalization collapsed");
  }
  return PureState{psi.spin, image / norm};
}

}  // namespace spinmetro
