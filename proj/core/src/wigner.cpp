#include "spinmetro/wigner.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <stdexcept>
#include <vector>

namespace spinmetro {

namespace {

// Generous fixed cache: enough for every factorial appearing in the Racah
// sums up to several times the supported spin cap. A fixed-size table keeps
// returned references valid forever and makes first-use initialization
// thread-safe without locking on the hot path.
constexpr int kFactorialCacheSize = 256;

bool half_int_pair_ok(int two_j, int two_m) {
  return two_j >= 0 && std::abs(two_m) <= two_j &&
         (two_j + two_m) % 2 == 0;
}

// (a+b-c)!(a-b+c)!(-a+b+c)!/(a+b+c+1)! for a valid triad, as an exact
// rational. Arguments are doubled.
BigRational triangle_delta(int two_a, int two_b, int two_c) {
  const BigInt num = factorial((two_a + two_b - two_c) / 2) *
                     factorial((two_a - two_b + two_c) / 2) *
                     factorial((-two_a + two_b + two_c) / 2);
  const BigInt den = factorial((two_a + two_b + two_c) / 2 + 1);
  return BigRational(num, den);
}

struct SmallDTerm {
  double coefficient;
  int cos_power;
  int sin_power;
};

struct SmallDTable {
  int dim;
  // terms[row * dim + col]; row ip and column i index m' = s - ip, m = s - i.
  std::vector<std::vector<SmallDTerm>> terms;
};

// d^{(j)}_{m'm}(beta) = sum_k (-1)^{m'-m+k}
//   sqrt((j+m')!(j-m')!(j+m)!(j-m)!) /
//   ((j+m-k)! k! (j-k-m')! (m'-m+k)!) *
//   cos(beta/2)^{2j-2k+m-m'} * sin(beta/2)^{m'-m+2k}
// with k over all values keeping the factorial arguments nonnegative. The
// per-term coefficients are rational square roots, evaluated exactly and
// rounded once to double.
SmallDTable build_small_d_table(Spin s) {
  const int n = s.dim();
  SmallDTable table;
  table.dim = n;
  table.terms.resize(static_cast<size_t>(n) * n);
  for (int ip = 0; ip < n; ++ip) {
    for (int i = 0; i < n; ++i) {
      auto& entry = table.terms[static_cast<size_t>(ip) * n + i];
      const BigInt root_num = factorial(s.two_s - ip) * factorial(ip) *
                              factorial(s.two_s - i) * factorial(i);
      const int k_min = std::max(0, ip - i);
      const int k_max = std::min(s.two_s - i, ip);
      for (int k = k_min; k <= k_max; ++k) {
        const BigInt den = factorial(s.two_s - i - k) * factorial(k) *
                           factorial(ip - k) * factorial(k - ip + i);
        SqrtRational coeff =
            SqrtRational::sqrt_of(BigRational(root_num, den * den));
        if ((k + i - ip) % 2 != 0) coeff = -coeff;
        entry.push_back(SmallDTerm{coeff.to_double(),
                                   s.two_s - 2 * k + ip - i,
                                   2 * k - ip + i});
      }
    }
  }
  return table;
}

const SmallDTable& small_d_table(Spin s) {
  static std::mutex mutex;
  static std::map<int, SmallDTable> cache;
  std::scoped_lock lock(mutex);
  auto it = cache.find(s.two_s);
  if (it == cache.end()) {
    it = cache.emplace(s.two_s, build_small_d_table(s)).first;
  }
  return it->second;
}

}  // namespace

const BigInt& factorial(int n) {
  if (n < 0) {
    throw std::invalid_argument("factorial: negative argument");
  }
  if (n >= kFactorialCacheSize) {
    throw std::length_error("factorial: argument beyond cache bound");
  }
  static const std::vector<BigInt> cache = [] {
    std::vector<BigInt> c(kFactorialCacheSize);
    c[0] = 1;
    for (int i = 1; i < kFactorialCacheSize; ++i) c[i] = c[i - 1] * i;
    return c;
  }();
  return cache[n];
}

bool triangle_ok(int two_a, int two_b, int two_c) {
  if (two_a < 0 || two_b < 0 || two_c < 0) return false;
  if ((two_a + two_b + two_c) % 2 != 0) return false;
  return std::abs(two_a - two_b) <= two_c && two_c <= two_a + two_b;
}

SqrtRational clebsch_gordan_exact(int two_j1, int two_m1, int two_j2,
                                  int two_m2, int two_j, int two_m) {
  if (!half_int_pair_ok(two_j1, two_m1) || !half_int_pair_ok(two_j2, two_m2) ||
      !half_int_pair_ok(two_j, two_m)) {
    throw std::invalid_argument("clebsch_gordan: malformed (j, m) pair");
  }
  if (two_m != two_m1 + two_m2) return {};
  if (!triangle_ok(two_j1, two_j2, two_j)) return {};

  // Summation window from the six factorials in the Racah denominator.
  const int a = (two_j1 + two_j2 - two_j) / 2;  // j1 + j2 - j
  const int b = (two_j1 - two_m1) / 2;          // j1 - m1
  const int c = (two_j2 + two_m2) / 2;          // j2 + m2
  const int d = (two_j - two_j2 + two_m1) / 2;  // j - j2 + m1
  const int e = (two_j - two_j1 - two_m2) / 2;  // j - j1 - m2
  const int k_min = std::max({0, -d, -e});
  const int k_max = std::min({a, b, c});

  BigRational sum = 0;
  for (int k = k_min; k <= k_max; ++k) {
    const BigInt den = factorial(k) * factorial(a - k) * factorial(b - k) *
                       factorial(c - k) * factorial(d + k) * factorial(e + k);
    const BigRational term(1, den);
    sum += (k % 2 == 0) ? term : -term;
  }

  const BigInt m_factorials =
      factorial((two_j + two_m) / 2) * factorial((two_j - two_m) / 2) *
      factorial((two_j1 - two_m1) / 2) * factorial((two_j1 + two_m1) / 2) *
      factorial((two_j2 - two_m2) / 2) * factorial((two_j2 + two_m2) / 2);
  const BigRational radicand = BigRational(two_j + 1) *
                               triangle_delta(two_j1, two_j2, two_j) *
                               BigRational(m_factorials);
  return SqrtRational::sqrt_of(radicand) * SqrtRational::from_rational(sum);
}

double clebsch_gordan(int two_j1, int two_m1, int two_j2, int two_m2,
                      int two_j, int two_m) {
  return clebsch_gordan_exact(two_j1, two_m1, two_j2, two_m2, two_j, two_m)
      .to_double();
}

SqrtRational six_j_exact(int two_j1, int two_j2, int two_j3, int two_j4,
                         int two_j5, int two_j6) {
  const std::array<int, 6> labels{two_j1, two_j2, two_j3,
                                  two_j4, two_j5, two_j6};
  for (int two_j : labels) {
    if (two_j < 0) {
      throw std::invalid_argument("six_j: negative spin label");
    }
  }
  if (!triangle_ok(two_j1, two_j2, two_j3) ||
      !triangle_ok(two_j1, two_j5, two_j6) ||
      !triangle_ok(two_j4, two_j2, two_j6) ||
      !triangle_ok(two_j4, two_j5, two_j3)) {
    return {};
  }

  // Triad sums and pair sums bounding the Racah summation index.
  const int s1 = (two_j1 + two_j2 + two_j3) / 2;
  const int s2 = (two_j1 + two_j5 + two_j6) / 2;
  const int s3 = (two_j4 + two_j2 + two_j6) / 2;
  const int s4 = (two_j4 + two_j5 + two_j3) / 2;
  const int p1 = (two_j1 + two_j2 + two_j4 + two_j5) / 2;
  const int p2 = (two_j2 + two_j3 + two_j5 + two_j6) / 2;
  const int p3 = (two_j3 + two_j1 + two_j6 + two_j4) / 2;
  const int k_min = std::max({s1, s2, s3, s4});
  const int k_max = std::min({p1, p2, p3});

  BigRational sum = 0;
  for (int k = k_min; k <= k_max; ++k) {
    const BigInt den = factorial(k - s1) * factorial(k - s2) *
                       factorial(k - s3) * factorial(k - s4) *
                       factorial(p1 - k) * factorial(p2 - k) *
                       factorial(p3 - k);
    const BigRational term(factorial(k + 1), den);
    sum += (k % 2 == 0) ? term : -term;
  }

  const BigRational radicand = triangle_delta(two_j1, two_j2, two_j3) *
                               triangle_delta(two_j1, two_j5, two_j6) *
                               triangle_delta(two_j4, two_j2, two_j6) *
                               triangle_delta(two_j4, two_j5, two_j3);
  return SqrtRational::sqrt_of(radicand) * SqrtRational::from_rational(sum);
}

double six_j(int two_j1, int two_j2, int two_j3, int two_j4, int two_j5,
             int two_j6) {
  return six_j_exact(two_j1, two_j2, two_j3, two_j4, two_j5, two_j6)
      .to_double();
}

Matrix spin_z(Spin s) {
  check_spin(s);
  const int n = s.dim();
  Matrix sz = Matrix::Zero(n, n);
  for (int i = 0; i < n; ++i) sz(i, i) = 0.5 * (s.two_s - 2 * i);
  return sz;
}

Matrix spin_plus(Spin s) {
  check_spin(s);
  const int n = s.dim();
  Matrix sp = Matrix::Zero(n, n);
  // <s, m+1| S_+ |s, m> = sqrt((s-m)(s+m+1)); with m = s - i this is
  // sqrt(i (2s + 1 - i)) connecting column i to row i-1.
  for (int i = 1; i < n; ++i) {
    sp(i - 1, i) = std::sqrt(static_cast<double>(i) * (s.two_s + 1 - i));
  }
  return sp;
}

Matrix spin_minus(Spin s) { return spin_plus(s).adjoint(); }

SpinOperatorSet spin_operators(Spin s) {
  const Matrix sp = spin_plus(s);
  const Matrix sm = sp.adjoint();
  SpinOperatorSet ops;
  ops.sx = 0.5 * (sp + sm);
  ops.sy = Complex(0.0, -0.5) * (sp - sm);
  ops.sz = spin_z(s);
  return ops;
}

RealMatrix wigner_d(Spin s, double beta) {
  check_spin(s);
  const SmallDTable& table = small_d_table(s);
  const int n = table.dim;
  const double c = std::cos(0.5 * beta);
  const double sn = std::sin(0.5 * beta);
  std::vector<double> c_pow(s.two_s + 1), s_pow(s.two_s + 1);
  c_pow[0] = 1.0;
  s_pow[0] = 1.0;
  for (int p = 1; p <= s.two_s; ++p) {
    c_pow[p] = c_pow[p - 1] * c;
    s_pow[p] = s_pow[p - 1] * sn;
  }
  RealMatrix d(n, n);
  for (int ip = 0; ip < n; ++ip) {
    for (int i = 0; i < n; ++i) {
      double value = 0.0;
      for (const SmallDTerm& term : table.terms[static_cast<size_t>(ip) * n + i]) {
        value += term.coefficient * c_pow[term.cos_power] * s_pow[term.sin_power];
      }
      d(ip, i) = value;
    }
  }
  return d;
}

Matrix wigner_D(Spin s, double alpha, double beta, double gamma) {
  const RealMatrix d = wigner_d(s, beta);
  const int n = s.dim();
  Vector left(n), right(n);
  for (int i = 0; i < n; ++i) {
    const double m = 0.5 * (s.two_s - 2 * i);
    left(i) = std::exp(Complex(0.0, -m * alpha));
    right(i) = std::exp(Complex(0.0, -m * gamma));
  }
  return left.asDiagonal() * d.cast<Complex>() * right.asDiagonal();
}

}  // namespace spinmetro
