#include "spinmetro/states.hpp"

#include "spinmetro/linalg.hpp"
#include "spinmetro/wigner.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace spinmetro {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Probability that a star sits farther out than this is zero in exact
// arithmetic: such roots stand in for roots at infinity (theta = pi).
constexpr double kRootAtInfinity = 1e8;

class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

  // Box-Muller on the raw mt19937_64 stream, so the sequence is pinned by
  // the standard rather than by the library's distribution internals.
  double next() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = unit_open();
    const double u2 = unit_open();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    spare_ = radius * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return radius * std::cos(2.0 * kPi * u2);
  }

  Complex next_complex() {
    const double re = next();
    const double im = next();
    return Complex(re, im);
  }

 private:
  double unit_open() {
    // (0, 1]: keeps log() finite.
    return (static_cast<double>(rng_() >> 11) + 1.0) * 0x1.0p-53;
  }

  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

RVector r_from_components(const TComponents& comps, Spin s) {
  RVector out;
  out.r = RealVector::Zero(s.dim());
  out.r_tilde = RealVector::Zero(s.dim());
  for (int l = 0; l <= s.two_s; ++l) {
    double sum = 0.0;
    for (int m = -l; m <= l; ++m) sum += std::norm(comps.at(l, m));
    out.r(l) = sum;
    out.r_tilde(l) = sum / std::sqrt(2.0 * l + 1.0);
  }
  return out;
}

RealVector orbit_from_r(const RealVector& r, Spin s) {
  const LambdaMatrix lam = lambda_matrix(s);
  return lam.entries * r;
}

Star star_from_unit_vector(const Eigen::Vector3d& v) {
  Star out;
  out.theta = std::atan2(std::hypot(v.x(), v.y()), v.z());
  out.phi = std::atan2(v.y(), v.x());
  if (out.phi < 0.0) out.phi += 2.0 * kPi;
  return out;
}

Star star_from_root(const Complex& zeta) {
  if (std::abs(zeta) > kRootAtInfinity) return Star{kPi, 0.0};
  Star out;
  out.theta = 2.0 * std::atan(std::abs(zeta));
  out.phi = std::arg(zeta);
  if (out.phi < 0.0) out.phi += 2.0 * kPi;
  return out;
}

// Parlett-Reinsch style balancing: similarity-scale rows/columns by powers
// of two until row and column norms are comparable. Exact in floating
// point (scale factors are powers of the radix), improves eigenvalue
// conditioning of the companion matrix markedly for lopsided coefficients.
void balance_in_place(Matrix& a) {
  const int n = static_cast<int>(a.rows());
  bool converged = false;
  while (!converged) {
    converged = true;
    for (int i = 0; i < n; ++i) {
      double row = 0.0, col = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        row += std::abs(a(i, j));
        col += std::abs(a(j, i));
      }
      if (row == 0.0 || col == 0.0) continue;
      double factor = 1.0;
      while (col * factor * factor < 0.5 * row) factor *= 2.0;
      while (col * factor * factor >= 2.0 * row) factor *= 0.5;
      // Only rescale when it shrinks the combined norm, which bounds the
      // number of sweeps.
      if (factor != 1.0 &&
          col * factor + row / factor < 0.95 * (col + row)) {
        converged = false;
        a.col(i) *= factor;
        a.row(i) /= factor;
      }
    }
  }
}

std::vector<Complex> polynomial_roots(const std::vector<Complex>& coeffs) {
  // coeffs[j] multiplies z^j; the caller guarantees a nonzero leading term.
  const int degree = static_cast<int>(coeffs.size()) - 1;
  std::vector<Complex> roots;
  if (degree == 0) return roots;
  if (degree == 1) {
    roots.push_back(-coeffs[0] / coeffs[1]);
    return roots;
  }
  Matrix companion = Matrix::Zero(degree, degree);
  for (int i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (int i = 0; i < degree; ++i) {
    companion(i, degree - 1) = -coeffs[i] / coeffs[degree];
  }
  balance_in_place(companion);
  Eigen::ComplexEigenSolver<Matrix> solver(companion, false);
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("polynomial_roots: eigensolver failed");
  }
  for (int i = 0; i < degree; ++i) roots.push_back(solver.eigenvalues()(i));
  return roots;
}

double spherical_distance(const Star& a, const Star& b) {
  const Eigen::Vector3d u = star_to_unit_vector(a);
  const Eigen::Vector3d v = star_to_unit_vector(b);
  return std::atan2(u.cross(v).norm(), u.dot(v));
}

// Minimum-cost perfect matching on a dense square cost matrix via the
// Hungarian algorithm with row/column potentials, O(n^3).
double min_cost_assignment(const RealMatrix& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      int j1 = 0;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  double total = 0.0;
  for (int j = 1; j <= n; ++j) total += cost(match[j] - 1, j - 1);
  return total;
}

}  // namespace

PureState make_pure_state(Spin s, Vector amplitudes) {
  check_spin(s);
  if (amplitudes.size() != s.dim()) {
    throw std::invalid_argument(
        "make_pure_state: amplitude count must equal 2s+1");
  }
  const double norm = amplitudes.norm();
  if (std::abs(norm - 1.0) > 1e-8) {
    throw std::invalid_argument("make_pure_state: vector is not unit norm");
  }
  amplitudes /= norm;
  return PureState{s, std::move(amplitudes)};
}

MixedState make_mixed_state(Spin s, Matrix matrix) {
  check_spin(s);
  if (matrix.rows() != s.dim() || matrix.cols() != s.dim()) {
    throw std::invalid_argument("make_mixed_state: matrix must be n x n");
  }
  if (!is_hermitian(matrix, 1e-10)) {
    throw std::invalid_argument("make_mixed_state: matrix must be Hermitian");
  }
  if (std::abs(matrix.trace().real() - 1.0) > 1e-8 ||
      std::abs(matrix.trace().imag()) > 1e-10) {
    throw std::invalid_argument("make_mixed_state: trace must be 1");
  }
  matrix = 0.5 * (matrix + Matrix(matrix.adjoint()));
  Eigen::SelfAdjointEigenSolver<Matrix> solver(matrix,
                                               Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -1e-10) {
    throw std::invalid_argument(
        "make_mixed_state: matrix has a negative eigenvalue");
  }
  return MixedState{s, std::move(matrix)};
}

MixedState to_density(const PureState& psi) {
  return MixedState{psi.spin, psi.amplitudes * psi.amplitudes.adjoint()};
}

MixedState maximally_mixed(Spin s) {
  check_spin(s);
  const int n = s.dim();
  return MixedState{s, Matrix::Identity(n, n) / static_cast<double>(n)};
}

TComponents::TComponents(Spin s, std::vector<Complex> values)
    : spin_(s), values_(std::move(values)) {
  const std::size_t expected =
      static_cast<std::size_t>(s.dim()) * static_cast<std::size_t>(s.dim());
  if (values_.size() != expected) {
    throw std::invalid_argument("TComponents: wrong component count");
  }
}

const Complex& TComponents::at(int l, int m) const {
  if (l < 0 || l > spin_.two_s || m < -l || m > l) {
    throw std::out_of_range("TComponents::at: (l, m) out of range");
  }
  return values_[static_cast<std::size_t>(l * l + m + l)];
}

Matrix TComponents::reconstruct(const TBasis& basis) const {
  const int n = spin_.dim();
  Matrix out = Matrix::Zero(n, n);
  for (int l = 0; l <= spin_.two_s; ++l) {
    for (int m = -l; m <= l; ++m) out += at(l, m) * basis.t(l, m);
  }
  return out;
}

TComponents t_components(const MixedState& rho) {
  const TBasis& basis = cached_t_basis(rho.spin);
  std::vector<Complex> values;
  values.reserve(static_cast<std::size_t>(rho.spin.dim()) * rho.spin.dim());
  for (int l = 0; l <= rho.spin.two_s; ++l) {
    for (int m = -l; m <= l; ++m) {
      values.push_back(
          basis.t(l, m).conjugate().cwiseProduct(rho.matrix).sum());
    }
  }
  return TComponents(rho.spin, std::move(values));
}

TComponents t_components(const PureState& psi) {
  return t_components(to_density(psi));
}

RVector r_vector(const MixedState& rho) {
  return r_from_components(t_components(rho), rho.spin);
}

RVector r_vector(const PureState& psi) {
  return r_from_components(t_components(psi), psi.spin);
}

RealVector orbit_r_vector(const MixedState& rho) {
  return orbit_from_r(r_vector(rho).r, rho.spin);
}

RealVector orbit_r_vector(const PureState& psi) {
  return orbit_from_r(r_vector(psi).r, psi.spin);
}

int anticoherence_order(const PureState& psi, double tol) {
  const RVector rv = r_vector(psi);
  double cumulative = 0.0;
  int order = 0;
  for (int l = 1; l <= psi.spin.two_s; ++l) {
    cumulative += rv.r(l);
    if (cumulative > tol) break;
    order = l;
  }
  return order;
}

Constellation majorana_constellation(const PureState& psi) {
  const int two_s = psi.spin.two_s;
  // Coefficient of z^{s+m} is (-1)^{s-m} sqrt(binom(2s, s-m)) a_m; with the
  // Dicke index k = s-m this is coeffs[2s-k].
  std::vector<Complex> coeffs(static_cast<std::size_t>(two_s) + 1);
  double cmax = 0.0;
  for (int k = 0; k <= two_s; ++k) {
    const double binom =
        BigInt(factorial(two_s) / (factorial(k) * factorial(two_s - k)))
            .convert_to<double>();
    const double sign = (k % 2 == 0) ? 1.0 : -1.0;
    coeffs[static_cast<std::size_t>(two_s - k)] =
        sign * std::sqrt(binom) * psi.amplitudes(k);
    cmax = std::max(cmax, std::abs(coeffs[two_s - k]));
  }
  if (cmax == 0.0) {
    throw std::domain_error(
        "majorana_constellation: zero polynomial (all amplitudes vanish)");
  }
  int degree = two_s;
  while (degree > 0 && std::abs(coeffs[degree]) <= 1e-13 * cmax) --degree;
  coeffs.resize(static_cast<std::size_t>(degree) + 1);

  Constellation out;
  for (const Complex& zeta : polynomial_roots(coeffs)) {
    out.stars.push_back(star_from_root(zeta));
  }
  for (int k = degree; k < two_s; ++k) out.stars.push_back(Star{kPi, 0.0});
  return out;
}

Constellation majorana_boost(const Constellation& c, double eta,
                             const Eigen::Vector3d& axis) {
  if (axis.norm() < 1e-12) {
    throw std::invalid_argument("majorana_boost: axis must be nonzero");
  }
  const Eigen::Quaterniond to_z =
      Eigen::Quaterniond::FromTwoVectors(axis, Eigen::Vector3d::UnitZ());
  const double scale = std::exp(eta);
  Constellation out;
  out.stars.reserve(c.stars.size());
  for (const Star& star : c.stars) {
    const Eigen::Vector3d aligned = to_z * star_to_unit_vector(star);
    const Star frame = star_from_unit_vector(aligned);
    // In root terms zeta -> e^eta zeta; on the sphere that is
    // tan(theta/2) -> e^eta tan(theta/2), azimuth unchanged.
    const double half = 0.5 * frame.theta;
    const double theta2 =
        2.0 * std::atan2(scale * std::sin(half), std::cos(half));
    const Eigen::Vector3d dragged(std::sin(theta2) * std::cos(frame.phi),
                                  std::sin(theta2) * std::sin(frame.phi),
                                  std::cos(theta2));
    out.stars.push_back(
        star_from_unit_vector(to_z.conjugate() * dragged));
  }
  return out;
}

double constellation_distance(const Constellation& a, const Constellation& b) {
  if (a.stars.size() != b.stars.size()) {
    throw std::invalid_argument(
        "constellation_distance: star counts differ");
  }
  const int n = static_cast<int>(a.stars.size());
  if (n == 0) return 0.0;
  RealMatrix cost(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      cost(i, j) = spherical_distance(a.stars[i], b.stars[j]);
    }
  }
  return min_cost_assignment(cost);
}

Eigen::Vector3d star_to_unit_vector(const Star& s) {
  return Eigen::Vector3d(std::sin(s.theta) * std::cos(s.phi),
                         std::sin(s.theta) * std::sin(s.phi),
                         std::cos(s.theta));
}

PureState named_state(const std::string& tag, Spin s) {
  check_spin(s);
  const int n = s.dim();
  Vector amps = Vector::Zero(n);
  if (tag == "coherent") {
    amps(0) = 1.0;
  } else if (tag == "ghz") {
    if (s.two_s < 1) {
      throw std::invalid_argument("named_state: ghz needs s >= 1/2");
    }
    amps(0) = 1.0 / std::sqrt(2.0);
    amps(n - 1) = 1.0 / std::sqrt(2.0);
  } else if (tag == "w") {
    if (s.two_s < 2) {
      throw std::invalid_argument("named_state: w needs s >= 1");
    }
    amps(1) = 1.0;
  } else if (tag == "tetrahedron") {
    if (s.two_s != 4) {
      throw std::invalid_argument("named_state: tetrahedron is a spin-2 state");
    }
    amps(0) = 0.5;
    amps(2) = Complex(0.0, 1.0 / std::sqrt(2.0));
    amps(4) = 0.5;
  } else if (tag == "triangular-prism") {
    if (s.two_s != 6) {
      throw std::invalid_argument(
          "named_state: triangular-prism is a spin-3 state");
    }
    amps(0) = std::sqrt(2.0) / 3.0;
    amps(3) = std::sqrt(5.0) / 3.0;
    amps(6) = std::sqrt(2.0) / 3.0;
  } else if (tag == "triangular-bipyramid") {
    if (s.two_s != 5) {
      throw std::invalid_argument(
          "named_state: triangular-bipyramid is a spin-5/2 state");
    }
    amps(1) = 0.75;
    amps(3) = std::sqrt(2.0) / 4.0;
    amps(5) = -std::sqrt(5.0) / 4.0;
  } else if (tag == "triangular-pyramid") {
    if (s.two_s != 5) {
      throw std::invalid_argument(
          "named_state: triangular-pyramid is a spin-5/2 state");
    }
    amps(2) = std::sqrt(5.0) / 3.0;
    amps(5) = 2.0 / 3.0;
  } else {
    throw std::invalid_argument("named_state: unknown tag '" + tag + "'");
  }
  return make_pure_state(s, std::move(amps));
}

std::vector<std::string> named_state_tags(Spin s) {
  std::vector<std::string> tags = {"coherent"};
  if (s.two_s >= 1) tags.push_back("ghz");
  if (s.two_s >= 2) tags.push_back("w");
  if (s.two_s == 4) tags.push_back("tetrahedron");
  if (s.two_s == 5) {
    tags.push_back("triangular-bipyramid");
    tags.push_back("triangular-pyramid");
  }
  if (s.two_s == 6) tags.push_back("triangular-prism");
  return tags;
}

PureState random_pure(Spin s, std::uint64_t seed) {
  check_spin(s);
  GaussianStream stream(seed);
  Vector amps(s.dim());
  for (int i = 0; i < s.dim(); ++i) amps(i) = stream.next_complex();
  amps.normalize();
  return PureState{s, std::move(amps)};
}

MixedState random_mixed(Spin s, std::uint64_t seed) {
  check_spin(s);
  GaussianStream stream(seed);
  const int n = s.dim();
  Matrix g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = stream.next_complex();
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return MixedState{s, std::move(rho)};
}

}  // namespace spinmetro
