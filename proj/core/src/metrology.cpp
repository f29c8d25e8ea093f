#include "spinmetro/metrology.hpp"

#include "spinmetro/linalg.hpp"
#include "spinmetro/tensorbasis.hpp"
#include "spinmetro/wigner.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace spinmetro {

namespace {

void check_same_spin(Spin a, Spin b, const char* op) {
  if (!(a == b)) {
    throw std::invalid_argument(std::string(op) +
                                ": state and transform spins differ");
  }
}

void check_hermitian_generator(const Matrix& x, const char* op) {
  if (x.rows() != x.cols() || !is_hermitian(x, 1e-10)) {
    throw std::invalid_argument(std::string(op) +
                                ": generator must be Hermitian");
  }
}

double purity(const Matrix& rho) {
  return (rho * rho).trace().real();
}

// G(r_a, r_b) = sum_{ll'} r_a,l lambda_{ll'} r_b,l' / (2l+1).
double metric_product(Spin s, const RealVector& ra, const RealVector& rb) {
  const LambdaMatrix lam = lambda_matrix(s);
  double total = 0.0;
  for (int l = 0; l <= s.two_s; ++l) {
    total += ra(l) * lam.entries.row(l).dot(rb) / (2.0 * l + 1.0);
  }
  return total;
}

struct BetaRule {
  std::vector<double> nodes;    // cos(beta) abscissae
  std::vector<double> weights;  // summing to 2
};

template <unsigned N>
BetaRule expand_gauss() {
  using rule = boost::math::quadrature::gauss<double, N>;
  BetaRule out;
  const auto& half_nodes = rule::abscissa();
  const auto& half_weights = rule::weights();
  // boost stores the non-negative half of the symmetric rule.
  for (std::size_t i = 0; i < half_nodes.size(); ++i) {
    out.nodes.push_back(half_nodes[i]);
    out.weights.push_back(half_weights[i]);
    if (half_nodes[i] > 0.0) {
      out.nodes.push_back(-half_nodes[i]);
      out.weights.push_back(half_weights[i]);
    }
  }
  return out;
}

BetaRule beta_rule(int n) {
  switch (n) {
    case 8:
      return expand_gauss<8>();
    case 16:
      return expand_gauss<16>();
    case 24:
      return expand_gauss<24>();
    case 32:
      return expand_gauss<32>();
    case 48:
      return expand_gauss<48>();
    case 64:
      return expand_gauss<64>();
    default:
      throw std::invalid_argument(
          "haar_average: n_beta must be one of 8, 16, 24, 32, 48, 64");
  }
}

constexpr double kPi = 3.14159265358979323846;

double fidelity_matrix(const Matrix& rho, const Matrix& v) {
  return (rho * v * rho * v.adjoint()).trace().real();
}

// Exact diagonal Clebsch-Gordan column <s m; l 0 | s m> for l = 0..2s.
std::vector<std::vector<SqrtRational>> diagonal_cg_columns(Spin s) {
  std::vector<std::vector<SqrtRational>> columns;
  for (int l = 0; l <= s.two_s; ++l) {
    std::vector<SqrtRational> col;
    for (int two_m = s.two_s; two_m >= -s.two_s; two_m -= 2) {
      col.push_back(
          clebsch_gordan_exact(s.two_s, two_m, 2 * l, 0, s.two_s, two_m));
    }
    columns.push_back(std::move(col));
  }
  return columns;
}

}  // namespace

UnitaryTransform rotation_transform(Spin s, double eta) {
  return rotation_transform(s, eta, Eigen::Vector3d::UnitZ());
}

UnitaryTransform rotation_transform(Spin s, double eta,
                                    const Eigen::Vector3d& axis) {
  check_spin(s);
  if (axis.norm() < 1e-12) {
    throw std::invalid_argument("rotation_transform: axis must be nonzero");
  }
  const Eigen::Vector3d n = axis.normalized();
  const auto ops = spin_operators(s);
  const Matrix generator = n.x() * ops.sx + n.y() * ops.sy + n.z() * ops.sz;
  return UnitaryTransform{s, unitary_exp(generator, eta),
                          TransformKind::rotation};
}

UnitaryTransform squeezing_transform(Spin s, double mu, int power) {
  check_spin(s);
  if (power < 1) {
    throw std::invalid_argument("squeezing_transform: power must be >= 1");
  }
  const int n = s.dim();
  Matrix v = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double m = 0.5 * (s.two_s - 2 * i);
    v(i, i) = std::exp(Complex(0.0, -mu * std::pow(m, power)));
  }
  return UnitaryTransform{s, std::move(v), TransformKind::squeezing};
}

UnitaryTransform diagonal_transform(Spin s,
                                    const std::function<double(double)>& f,
                                    double eta) {
  check_spin(s);
  const int n = s.dim();
  Matrix v = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    const double m = 0.5 * (s.two_s - 2 * i);
    v(i, i) = std::exp(Complex(0.0, -eta * f(m)));
  }
  return UnitaryTransform{s, std::move(v), TransformKind::diagonal};
}

UnitaryTransform custom_transform(Spin s, Matrix v) {
  check_spin(s);
  if (v.rows() != s.dim() || v.cols() != s.dim()) {
    throw std::invalid_argument("custom_transform: matrix must be n x n");
  }
  const double defect =
      (v.adjoint() * v - Matrix::Identity(s.dim(), s.dim()))
          .cwiseAbs()
          .maxCoeff();
  if (defect > 1e-10) {
    throw std::invalid_argument("custom_transform: matrix is not unitary");
  }
  return UnitaryTransform{s, std::move(v), TransformKind::custom};
}

double fidelity(const PureState& psi, const UnitaryTransform& v) {
  check_same_spin(psi.spin, v.spin, "fidelity");
  const Complex amp = psi.amplitudes.dot(v.matrix * psi.amplitudes);
  return std::norm(amp);
}

double fidelity(const MixedState& rho, const UnitaryTransform& v) {
  check_same_spin(rho.spin, v.spin, "fidelity");
  return fidelity_matrix(rho.matrix, v.matrix);
}

double qfi(const PureState& psi, const Matrix& x) {
  check_hermitian_generator(x, "qfi");
  if (x.rows() != psi.spin.dim()) {
    throw std::invalid_argument("qfi: generator dimension mismatch");
  }
  const Matrix rho = psi.amplitudes * psi.amplitudes.adjoint();
  const Matrix commutator = x * rho - rho * x;
  return 2.0 * commutator.squaredNorm();
}

double qfi_phase_route(const PureState& psi, const Matrix& x, double omega) {
  check_hermitian_generator(x, "qfi_phase_route");
  if (x.rows() != psi.spin.dim()) {
    throw std::invalid_argument("qfi_phase_route: generator dimension mismatch");
  }
  const Matrix rho = psi.amplitudes * psi.amplitudes.adjoint();
  const Vector image = f_omega(rho, omega) * vectorize(x);
  return 2.0 * image.squaredNorm();
}

double avg_qfi(const PureState& psi, const Matrix& x) {
  check_hermitian_generator(x, "avg_qfi");
  if (x.rows() != psi.spin.dim()) {
    throw std::invalid_argument("avg_qfi: generator dimension mismatch");
  }
  const Spin s = psi.spin;
  const RealVector wx = shell_weights(s, x);
  const RVector rv = r_vector(psi);
  double dot = 0.0;
  for (int l = 0; l <= s.two_s; ++l) {
    dot += rv.r_tilde(l) * wx(l) / std::sqrt(2.0 * l + 1.0);
  }
  const double trace_x2 = (x * x).trace().real();
  return 4.0 * (trace_x2 / s.dim() - dot);
}

RealVector shell_weights(Spin s, const Matrix& a) {
  if (a.rows() != s.dim() || a.cols() != s.dim()) {
    throw std::invalid_argument("shell_weights: matrix must be n x n");
  }
  const TBasis& basis = cached_t_basis(s);
  RealVector out = RealVector::Zero(s.dim());
  for (int l = 0; l <= s.two_s; ++l) {
    double sum = 0.0;
    for (int m = -l; m <= l; ++m) {
      sum += std::norm(basis.t(l, m).conjugate().cwiseProduct(a).sum());
    }
    out(l) = sum;
  }
  return out;
}

double avg_fidelity(const PureState& psi, const UnitaryTransform& v) {
  check_same_spin(psi.spin, v.spin, "avg_fidelity");
  return metric_product(psi.spin, r_vector(psi).r,
                        shell_weights(v.spin, v.matrix));
}

double avg_fidelity(const MixedState& rho, const UnitaryTransform& v) {
  check_same_spin(rho.spin, v.spin, "avg_fidelity");
  return metric_product(rho.spin, r_vector(rho).r,
                        shell_weights(v.spin, v.matrix));
}

double haar_average(Spin s, const EulerGrid& grid,
                    const std::function<double(const Matrix&)>& f) {
  check_spin(s);
  if (grid.n_alpha < 2 || grid.n_gamma < 2) {
    throw std::invalid_argument(
        "haar_average: alpha and gamma grids need at least two points");
  }
  const BetaRule rule = beta_rule(grid.n_beta);
  double total = 0.0;
  for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
    const double beta = std::acos(rule.nodes[j]);
    double slice = 0.0;
    for (int i = 0; i < grid.n_alpha; ++i) {
      const double alpha = 2.0 * kPi * i / grid.n_alpha;
      for (int k = 0; k < grid.n_gamma; ++k) {
        const double gamma = 2.0 * kPi * k / grid.n_gamma;
        slice += f(wigner_D(s, alpha, beta, gamma));
      }
    }
    total += rule.weights[j] * slice;
  }
  return total / (2.0 * grid.n_alpha * grid.n_gamma);
}

double avg_fidelity_quadrature(const PureState& psi,
                               const UnitaryTransform& v,
                               const EulerGrid& grid) {
  check_same_spin(psi.spin, v.spin, "avg_fidelity_quadrature");
  const Matrix rho = psi.amplitudes * psi.amplitudes.adjoint();
  return haar_average(psi.spin, grid, [&](const Matrix& u) {
    const Matrix rho_u = u * rho * u.adjoint();
    return fidelity_matrix(rho_u, v.matrix);
  });
}

double avg_fidelity_quadrature(const MixedState& rho,
                               const UnitaryTransform& v,
                               const EulerGrid& grid) {
  check_same_spin(rho.spin, v.spin, "avg_fidelity_quadrature");
  return haar_average(rho.spin, grid, [&](const Matrix& u) {
    const Matrix rho_u = u * rho.matrix * u.adjoint();
    return fidelity_matrix(rho_u, v.matrix);
  });
}

RealVector diagonal_v_components(Spin s,
                                 const std::function<double(double)>& f,
                                 double eta) {
  check_spin(s);
  const int n = s.dim();
  std::vector<double> profile(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) profile[i] = f(0.5 * (s.two_s - 2 * i));
  const auto columns = diagonal_cg_columns(s);
  RealVector out = RealVector::Zero(n);
  for (int l = 0; l <= s.two_s; ++l) {
    std::vector<double> cg(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) cg[i] = columns[l][i].to_double();
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        sum += cg[i] * cg[j] * std::cos((profile[i] - profile[j]) * eta);
      }
    }
    out(l) = sum * (2.0 * l + 1.0) / n;
  }
  return out;
}

double CosineSeries::evaluate(double x) const {
  double total = 0.0;
  for (std::size_t i = 0; i < frequencies.size(); ++i) {
    total += coefficients(static_cast<Eigen::Index>(i)) *
             std::cos(frequencies[i] * x);
  }
  return total;
}

CosineSeries RationalCosineSeries::to_double() const {
  CosineSeries out;
  out.frequencies = frequencies;
  out.coefficients = RealVector::Zero(static_cast<Eigen::Index>(
      coefficients.size()));
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    out.coefficients(static_cast<Eigen::Index>(i)) =
        coefficients[i].convert_to<double>();
  }
  return out;
}

std::vector<RationalCosineSeries> squeezing_phi_exact(Spin s) {
  check_spin(s);
  const int n = s.dim();
  const auto columns = diagonal_cg_columns(s);
  const PureShellForm form = pure_shell_form(s);
  const int nfree = static_cast<int>(form.free_shells.size());

  // |V_l|^2 as an exact cosine table over integer frequencies m1^2 - m2^2.
  std::vector<std::map<int, BigRational>> vl(static_cast<std::size_t>(n));
  for (int l = 0; l <= s.two_s; ++l) {
    for (int i = 0; i < n; ++i) {
      const int two_m1 = s.two_s - 2 * i;
      for (int j = 0; j < n; ++j) {
        const int two_m2 = s.two_s - 2 * j;
        const int freq4 = two_m1 * two_m1 - two_m2 * two_m2;
        if (freq4 % 4 != 0) {
          throw std::logic_error(
              "squeezing_phi_exact: non-integer frequency");
        }
        const SqrtRational product = columns[l][i] * columns[l][j];
        const auto rational = product.try_rational();
        if (!rational) {
          throw std::logic_error(
              "squeezing_phi_exact: irrational Clebsch-Gordan pairing");
        }
        vl[l][std::abs(freq4 / 4)] +=
            *rational * BigRational(2 * l + 1, n);
      }
    }
  }

  // Fbar(mu) = sum_l |V_l|^2 r_l / (2l+1) with r_l affine in the free
  // shell weights: split into the constant series and one per free shell.
  std::vector<std::map<int, BigRational>> tables(
      static_cast<std::size_t>(nfree) + 1);
  for (int l = 0; l <= s.two_s; ++l) {
    const BigRational scale(1, 2 * l + 1);
    for (const auto& [freq, coeff] : vl[l]) {
      if (form.offset[l] != 0) {
        tables[0][freq] += coeff * scale * form.offset[l];
      }
      for (int t = 0; t < nfree; ++t) {
        if (form.slope[l][t] != 0) {
          tables[t + 1][freq] += coeff * scale * form.slope[l][t];
        }
      }
    }
  }

  std::vector<RationalCosineSeries> out;
  for (auto& table : tables) {
    RationalCosineSeries series;
    for (const auto& [freq, coeff] : table) {
      if (coeff == 0) continue;
      series.frequencies.push_back(freq);
      series.coefficients.push_back(coeff);
    }
    out.push_back(std::move(series));
  }
  return out;
}

std::vector<CosineSeries> squeezing_phi(Spin s) {
  std::vector<CosineSeries> out;
  for (const auto& series : squeezing_phi_exact(s)) {
    out.push_back(series.to_double());
  }
  return out;
}

double hs_quasi_fidelity(const MixedState& rho, const MixedState& sigma) {
  check_same_spin(rho.spin, sigma.spin, "hs_quasi_fidelity");
  const double overlap = (rho.matrix * sigma.matrix).trace().real();
  return overlap / std::max(purity(rho.matrix), purity(sigma.matrix));
}

double avg_hs_fidelity(const MixedState& rho, const UnitaryTransform& v) {
  check_same_spin(rho.spin, v.spin, "avg_hs_fidelity");
  const double p = purity(rho.matrix);
  if (p < 1.0 / rho.spin.dim() - 1e-12) {
    throw std::domain_error(
        "avg_hs_fidelity: purity below the minimum 1/n");
  }
  return metric_product(rho.spin, r_vector(rho).r,
                        shell_weights(v.spin, v.matrix)) /
         p;
}

}  // namespace spinmetro
