#include "spinmetro/tensorbasis.hpp"

#include "spinmetro/linalg.hpp"
#include "spinmetro/wigner.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <stdexcept>

namespace spinmetro {

namespace {

void check_density_like(const Matrix& rho, const char* op) {
  if (rho.rows() != rho.cols()) {
    throw std::invalid_argument(std::string(op) + ": matrix must be square");
  }
  if (!is_hermitian(rho, 1e-10)) {
    throw std::invalid_argument(std::string(op) + ": matrix must be Hermitian");
  }
}

}  // namespace

TBasis::TBasis(Spin s) : spin_(s) {
  check_spin(s);
  const int n = s.dim();
  ops_.reserve(static_cast<size_t>(n) * n);
  for (int l = 0; l <= s.two_s; ++l) {
    const SqrtRational shell_norm =
        SqrtRational::sqrt_of(BigRational(2 * l + 1, n));
    for (int m = -l; m <= l; ++m) {
      Matrix t = Matrix::Zero(n, n);
      // Row i1 carries m1 = s - i1 (doubled: two_s - 2 i1); the coefficient
      // couples m1 = m2 + m, so each column has at most one nonzero entry.
      for (int i2 = 0; i2 < n; ++i2) {
        const int i1 = i2 - m;
        if (i1 < 0 || i1 >= n) continue;
        const int two_m1 = s.two_s - 2 * i1;
        const int two_m2 = s.two_s - 2 * i2;
        const SqrtRational cg = clebsch_gordan_exact(
            s.two_s, two_m2, 2 * l, 2 * m, s.two_s, two_m1);
        t(i1, i2) = (shell_norm * cg).to_double();
      }
      ops_.push_back(std::move(t));
    }
  }
}

int TBasis::index(int l, int m) const {
  if (l < 0 || l > spin_.two_s || m < -l || m > l) {
    throw std::out_of_range("TBasis: shell index (l, m) out of range");
  }
  return l * l + (m + l);
}

const Matrix& TBasis::t(int l, int m) const { return ops_[index(l, m)]; }

Matrix TBasis::h(int l, int m) const {
  const double sign = (m % 2 == 0) ? 1.0 : -1.0;
  if (m > 0) return t(l, m) + sign * t(l, -m);
  if (m < 0) return Complex(0, -1) * (t(l, m) - sign * t(l, -m));
  return std::sqrt(2.0) * t(l, 0);
}

TBasis build_t_basis(Spin s) { return TBasis(s); }

const TBasis& cached_t_basis(Spin s) {
  static std::mutex mu;
  static std::map<int, TBasis> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(s.two_s);
  if (it == cache.end()) it = cache.emplace(s.two_s, TBasis(s)).first;
  return it->second;
}

Vector vectorize(const Matrix& a) {
  Vector v(a.size());
  using RowMajor =
      Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  Eigen::Map<RowMajor>(v.data(), a.rows(), a.cols()) = a;
  return v;
}

Matrix devectorize(const Vector& v) {
  const auto n = static_cast<Eigen::Index>(std::llround(std::sqrt(
      static_cast<double>(v.size()))));
  if (n * n != v.size()) {
    throw std::invalid_argument("devectorize: length is not a perfect square");
  }
  using RowMajor =
      Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  return Eigen::Map<const RowMajor>(v.data(), n, n);
}

Matrix ad_rho(const Matrix& rho) {
  check_density_like(rho, "ad_rho");
  const Matrix id = Matrix::Identity(rho.rows(), rho.cols());
  return kron(rho, id) - kron(id, rho.transpose());
}

Matrix pi_rho(const Matrix& rho) {
  const Matrix ad = ad_rho(rho);
  return ad * ad;
}

Matrix f_omega(const Matrix& rho, double omega) {
  check_density_like(rho, "f_omega");
  const double purity = (rho * rho).trace().real();
  if (std::abs(purity - 1.0) > 1e-10 ||
      std::abs(rho.trace().real() - 1.0) > 1e-8) {
    throw std::invalid_argument("f_omega: defined for pure density matrices");
  }
  const Matrix id = Matrix::Identity(rho.rows(), rho.cols());
  const Complex phase(std::cos(omega), -std::sin(omega));
  const Vector vr = vectorize(rho);
  return phase * kron(rho, id) - std::conj(phase) * kron(id, rho.transpose()) +
         Complex(0.0, 2.0 * std::sin(omega)) * (vr * vr.adjoint());
}

LambdaMatrix lambda_matrix(Spin s) {
  check_spin(s);
  const int shells = s.dim();
  LambdaMatrix out{s, RealMatrix(shells, shells), {}};
  out.exact.assign(shells, std::vector<BigRational>(shells));
  for (int l = 0; l < shells; ++l) {
    for (int lp = 0; lp < shells; ++lp) {
      const SqrtRational symbol =
          six_j_exact(s.two_s, s.two_s, 2 * l, s.two_s, s.two_s, 2 * lp);
      const auto rational = symbol.try_rational();
      if (!rational.has_value()) {
        throw std::logic_error("lambda_matrix: 6j symbol fails to be rational");
      }
      BigRational value = *rational * (2 * l + 1);
      if ((s.two_s + l + lp) % 2 != 0) value = -value;
      out.exact[l][lp] = value;
      out.entries(l, lp) = value.convert_to<double>();
    }
  }
  return out;
}

RealMatrix lambda_tilde(const LambdaMatrix& lambda) {
  const int shells = lambda.spin.dim();
  RealMatrix tilde(shells, shells);
  for (int l = 0; l < shells; ++l) {
    for (int lp = 0; lp < shells; ++lp) {
      tilde(l, lp) = lambda.entries(l, lp) *
                     std::sqrt((2.0 * lp + 1.0) / (2.0 * l + 1.0));
    }
  }
  return tilde;
}

InvariantOperators build_invariant_ops(Spin s, bool with_lambda_projector) {
  check_spin(s);
  const TBasis basis(s);
  const int n = s.dim();
  InvariantOperators out;
  out.spin = s;
  out.tbb.reserve(n);
  out.tbf.reserve(n);
  for (int l = 0; l <= s.two_s; ++l) {
    Matrix tbb = Matrix::Zero(n * n, n * n);
    Matrix tbf = Matrix::Zero(n * n, n * n);
    for (int m = -l; m <= l; ++m) {
      const Matrix& t = basis.t(l, m);
      tbb += kron(t, t.conjugate());
      const Vector vt = vectorize(t);
      tbf += vt * vt.adjoint();
    }
    out.tbb.push_back(std::move(tbb));
    out.tbf.push_back(std::move(tbf));
  }
  if (with_lambda_projector) {
    if (n > 7) {
      throw std::length_error(
          "build_invariant_ops: the invariant projector is n^4 x n^4; "
          "refusing n > 7");
    }
    Matrix proj = Matrix::Zero(n * n * n * n, n * n * n * n);
    for (int l = 0; l <= s.two_s; ++l) {
      const Vector v = vectorize(out.tbb[l]);
      proj += (v * v.adjoint()) / static_cast<double>(2 * l + 1);
    }
    out.lambda_proj = std::move(proj);
  }
  return out;
}

PureShellForm pure_shell_form(Spin s) {
  const LambdaMatrix lam = lambda_matrix(s);
  const int n = s.dim();
  const int unknowns = n - 1;  // r_1 .. r_2s; r_0 is pinned to 1/n

  // Rows of (lambda - I) r = 0 with r_0 = 1/n moved to the right-hand side.
  // Each row is stored as coefficients over r_1..r_2s plus a constant.
  std::vector<std::vector<BigRational>> rows(
      static_cast<std::size_t>(n),
      std::vector<BigRational>(static_cast<std::size_t>(unknowns) + 1));
  for (int i = 0; i < n; ++i) {
    for (int j = 1; j < n; ++j) {
      rows[i][j - 1] = lam.exact[i][j];
      if (i == j) rows[i][j - 1] -= 1;
    }
    BigRational lead = lam.exact[i][0];
    if (i == 0) lead -= 1;
    rows[i][unknowns] = -lead / n;
  }

  // Eliminate from the highest shell downward so low shells stay free.
  std::vector<int> pivot_row_of(static_cast<std::size_t>(unknowns), -1);
  std::vector<char> row_used(static_cast<std::size_t>(n), 0);
  for (int col = unknowns - 1; col >= 0; --col) {
    int pivot = -1;
    for (int i = 0; i < n; ++i) {
      if (!row_used[i] && rows[i][col] != 0) {
        pivot = i;
        break;
      }
    }
    if (pivot < 0) continue;
    row_used[pivot] = 1;
    pivot_row_of[col] = pivot;
    const BigRational inv = rows[pivot][col];
    for (int j = 0; j <= unknowns; ++j) rows[pivot][j] /= inv;
    for (int i = 0; i < n; ++i) {
      if (i == pivot || rows[i][col] == 0) continue;
      const BigRational factor = rows[i][col];
      for (int j = 0; j <= unknowns; ++j) {
        rows[i][j] -= factor * rows[pivot][j];
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (row_used[i]) continue;
    for (int j = 0; j <= unknowns; ++j) {
      if (rows[i][j] != 0) {
        throw std::logic_error(
            "pure_shell_form: inconsistent elimination residue");
      }
    }
  }

  PureShellForm out;
  out.spin = s;
  for (int col = 0; col < unknowns; ++col) {
    if (pivot_row_of[col] < 0) out.free_shells.push_back(col + 1);
  }
  const int nfree = static_cast<int>(out.free_shells.size());
  out.offset.assign(static_cast<std::size_t>(n), BigRational(0));
  out.slope.assign(static_cast<std::size_t>(n),
                   std::vector<BigRational>(static_cast<std::size_t>(nfree)));
  out.offset[0] = BigRational(1, n);
  for (int t = 0; t < nfree; ++t) out.slope[out.free_shells[t]][t] = 1;
  for (int col = 0; col < unknowns; ++col) {
    const int pivot = pivot_row_of[col];
    if (pivot < 0) continue;
    const auto& row = rows[pivot];
    // Pivot row reads r_{col+1} + sum_free c_t r_free = const.
    out.offset[col + 1] = row[unknowns];
    for (int t = 0; t < nfree; ++t) {
      out.slope[col + 1][t] = -row[out.free_shells[t] - 1];
    }
  }

  out.offset_d = RealVector::Zero(n);
  out.slope_d = RealMatrix::Zero(n, nfree);
  for (int l = 0; l < n; ++l) {
    out.offset_d(l) = out.offset[l].convert_to<double>();
    for (int t = 0; t < nfree; ++t) {
      out.slope_d(l, t) = out.slope[l][t].convert_to<double>();
    }
  }
  return out;
}

}  // namespace spinmetro
