#include "spinmetro/wigner.hpp"

#include "spinmetro/linalg.hpp"

#include <gtest/gtest.h>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <random>

namespace spinmetro {
namespace {

using BF = boost::multiprecision::cpp_bin_float_50;

constexpr double kPi = 3.14159265358979323846;

BF bf_factorial(int n) { return BF(factorial(n)); }

// Independent 50-digit reference for the Clebsch-Gordan coefficient: the same
// Racah sum evaluated entirely in 50-digit floating point, so the production
// path (exact rationals, one rounding at the end) is checked against an
// implementation with a completely different arithmetic model.
BF cg_reference(int two_j1, int two_m1, int two_j2, int two_m2, int two_j,
                int two_m) {
  if (two_m != two_m1 + two_m2) return 0;
  if (!triangle_ok(two_j1, two_j2, two_j)) return 0;
  const int a = (two_j1 + two_j2 - two_j) / 2;
  const int b = (two_j1 - two_m1) / 2;
  const int c = (two_j2 + two_m2) / 2;
  const int d = (two_j - two_j2 + two_m1) / 2;
  const int e = (two_j - two_j1 - two_m2) / 2;
  BF sum = 0;
  for (int k = std::max({0, -d, -e}); k <= std::min({a, b, c}); ++k) {
    const BF den = bf_factorial(k) * bf_factorial(a - k) * bf_factorial(b - k) *
                   bf_factorial(c - k) * bf_factorial(d + k) *
                   bf_factorial(e + k);
    sum += (k % 2 == 0 ? 1 : -1) / den;
  }
  const BF delta = bf_factorial(a) * bf_factorial((two_j1 - two_j2 + two_j) / 2) *
                   bf_factorial((-two_j1 + two_j2 + two_j) / 2) /
                   bf_factorial((two_j1 + two_j2 + two_j) / 2 + 1);
  const BF mfac = bf_factorial((two_j + two_m) / 2) *
                  bf_factorial((two_j - two_m) / 2) *
                  bf_factorial((two_j1 - two_m1) / 2) *
                  bf_factorial((two_j1 + two_m1) / 2) *
                  bf_factorial((two_j2 - two_m2) / 2) *
                  bf_factorial((two_j2 + two_m2) / 2);
  return sqrt(BF(two_j + 1) * delta * mfac) * sum;
}

TEST(Factorial, ExactValues) {
  EXPECT_EQ(factorial(0), 1);
  EXPECT_EQ(factorial(1), 1);
  EXPECT_EQ(factorial(5), 120);
  EXPECT_EQ(factorial(20), BigInt("2432902008176640000"));
  EXPECT_THROW(factorial(-1), std::invalid_argument);
}

TEST(ClebschGordan, StretchedStateIsOne) {
  const auto c = clebsch_gordan_exact(1, 1, 1, 1, 2, 2);
  ASSERT_TRUE(c.try_rational().has_value());
  EXPECT_EQ(*c.try_rational(), 1);
}

TEST(ClebschGordan, SingletColumnClosedForm) {
  // <j m; j -m | 0 0> = (-1)^{j-m} / sqrt(2j+1)
  for (int two_j = 0; two_j <= 12; ++two_j) {
    for (int two_m = -two_j; two_m <= two_j; two_m += 2) {
      const auto c = clebsch_gordan_exact(two_j, two_m, two_j, -two_m, 0, 0);
      SqrtRational expected =
          SqrtRational::sqrt_of(BigRational(1, two_j + 1));
      if (((two_j - two_m) / 2) % 2 != 0) expected = -expected;
      EXPECT_EQ(c, expected) << "two_j=" << two_j << " two_m=" << two_m;
    }
  }
  EXPECT_NEAR(clebsch_gordan(2, 2, 2, -2, 0, 0), 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(clebsch_gordan(2, 0, 2, 0, 0, 0), -1.0 / std::sqrt(3.0), 1e-15);
}

TEST(ClebschGordan, SpinHalfTable) {
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(clebsch_gordan(1, 1, 1, -1, 2, 0), inv_sqrt2, 1e-15);
  EXPECT_NEAR(clebsch_gordan(1, -1, 1, 1, 2, 0), inv_sqrt2, 1e-15);
  EXPECT_NEAR(clebsch_gordan(1, 1, 1, -1, 0, 0), inv_sqrt2, 1e-15);
  EXPECT_NEAR(clebsch_gordan(1, -1, 1, 1, 0, 0), -inv_sqrt2, 1e-15);
}

TEST(ClebschGordan, SelectionRulesReturnZero) {
  EXPECT_TRUE(clebsch_gordan_exact(2, 2, 2, 2, 2, 2).is_zero());  // M mismatch
  EXPECT_TRUE(clebsch_gordan_exact(2, 0, 2, 0, 8, 0).is_zero());  // triangle
}

TEST(ClebschGordan, MalformedLabelsThrow) {
  EXPECT_THROW(clebsch_gordan_exact(1, 0, 2, 0, 1, 0), std::invalid_argument);
  EXPECT_THROW(clebsch_gordan_exact(2, 4, 2, 0, 2, 0), std::invalid_argument);
  EXPECT_THROW(clebsch_gordan_exact(-2, 0, 2, 0, 2, 0), std::invalid_argument);
}

TEST(ClebschGordan, CouplingUnitarity) {
  // For fixed (J, M), the squared coefficients over (m1, m2 = M - m1) sum to 1.
  for (int two_j1 = 0; two_j1 <= 6; ++two_j1) {
    for (int two_j2 = 0; two_j2 <= 6; ++two_j2) {
      for (int two_j = std::abs(two_j1 - two_j2); two_j <= two_j1 + two_j2;
           two_j += 2) {
        for (int two_m = -two_j; two_m <= two_j; two_m += 2) {
          double sum = 0.0;
          for (int two_m1 = -two_j1; two_m1 <= two_j1; two_m1 += 2) {
            const int two_m2 = two_m - two_m1;
            if (std::abs(two_m2) > two_j2) continue;
            const double c = clebsch_gordan(two_j1, two_m1, two_j2, two_m2,
                                            two_j, two_m);
            sum += c * c;
          }
          EXPECT_NEAR(sum, 1.0, 1e-13)
              << two_j1 << " " << two_j2 << " " << two_j << " " << two_m;
        }
      }
    }
  }
}

TEST(ClebschGordan, FiftyDigitReferenceSweep) {
  // Every coefficient with j1, j2 <= 6 against the 50-digit reference.
  long checked = 0;
  for (int two_j1 = 0; two_j1 <= 12; ++two_j1) {
    for (int two_j2 = 0; two_j2 <= 12; ++two_j2) {
      for (int two_j = std::abs(two_j1 - two_j2); two_j <= two_j1 + two_j2;
           two_j += 2) {
        for (int two_m1 = -two_j1; two_m1 <= two_j1; two_m1 += 2) {
          for (int two_m2 = -two_j2; two_m2 <= two_j2; two_m2 += 2) {
            const int two_m = two_m1 + two_m2;
            if (std::abs(two_m) > two_j) continue;
            const double got = clebsch_gordan(two_j1, two_m1, two_j2, two_m2,
                                              two_j, two_m);
            const BF ref = cg_reference(two_j1, two_m1, two_j2, two_m2, two_j,
                                        two_m);
            const double ref_d = ref.convert_to<double>();
            const double scale = std::max(1e-30, std::abs(ref_d));
            ASSERT_LT(std::abs(got - ref_d) / scale, 1e-13)
                << two_j1 << " " << two_m1 << " " << two_j2 << " " << two_m2
                << " " << two_j;
            ++checked;
          }
        }
      }
    }
  }
  EXPECT_GT(checked, 40000);
}

// Recoupling contraction of four Clebsch-Gordan coefficients; independent
// route to the 6j symbol:
//   sum_{m1 m2 m3} C^{j12 m12}_{j1 m1 j2 m2} C^{j m}_{j12 m12 j3 m3}
//                  C^{j23 m23}_{j2 m2 j3 m3} C^{j m}_{j1 m1 j23 m23}
//     = (-1)^{j1+j2+j3+j} sqrt((2 j12 + 1)(2 j23 + 1)) {j1 j2 j12; j3 j j23}
double six_j_by_contraction(int two_j1, int two_j2, int two_j12, int two_j3,
                            int two_j, int two_j23) {
  const int two_m = (two_j % 2 == 0) ? 0 : 1;  // any fixed projection works
  double sum = 0.0;
  for (int two_m1 = -two_j1; two_m1 <= two_j1; two_m1 += 2) {
    for (int two_m2 = -two_j2; two_m2 <= two_j2; two_m2 += 2) {
      const int two_m12 = two_m1 + two_m2;
      const int two_m3 = two_m - two_m12;
      if (std::abs(two_m12) > two_j12 || std::abs(two_m3) > two_j3) continue;
      const int two_m23 = two_m2 + two_m3;
      if (std::abs(two_m23) > two_j23) continue;
      sum += clebsch_gordan(two_j12, two_m12, two_j3, two_m3, two_j, two_m) *
             clebsch_gordan(two_j1, two_m1, two_j2, two_m2, two_j12, two_m12) *
             clebsch_gordan(two_j2, two_m2, two_j3, two_m3, two_j23, two_m23) *
             clebsch_gordan(two_j1, two_m1, two_j23, two_m23, two_j, two_m);
    }
  }
  const int phase_exp = (two_j1 + two_j2 + two_j3 + two_j) / 2;
  const double phase = (phase_exp % 2 == 0) ? 1.0 : -1.0;
  return phase * sum /
         std::sqrt(static_cast<double>((two_j12 + 1) * (two_j23 + 1)));
}

TEST(SixJ, KnownValues) {
  const auto half_table = six_j_exact(1, 1, 0, 1, 1, 2);
  ASSERT_TRUE(half_table.try_rational().has_value());
  EXPECT_EQ(*half_table.try_rational(), BigRational(1, 2));

  const auto one_sixth = six_j_exact(1, 1, 2, 1, 1, 2);
  ASSERT_TRUE(one_sixth.try_rational().has_value());
  EXPECT_EQ(*one_sixth.try_rational(), BigRational(1, 6));

  EXPECT_TRUE(six_j_exact(2, 2, 8, 2, 2, 2).is_zero());
  EXPECT_THROW(six_j_exact(-2, 2, 2, 2, 2, 2), std::invalid_argument);
}

TEST(SixJ, ZeroLabelClosedForm) {
  // {a b f; b a 0} = (-1)^{a+b+f} / sqrt((2a+1)(2b+1))
  for (int two_a = 0; two_a <= 8; ++two_a) {
    for (int two_b = 0; two_b <= 8; ++two_b) {
      for (int two_f = std::abs(two_a - two_b); two_f <= two_a + two_b;
           two_f += 2) {
        const double got = six_j(two_a, two_b, two_f, two_b, two_a, 0);
        const int phase_exp = (two_a + two_b + two_f) / 2;
        const double expected =
            ((phase_exp % 2 == 0) ? 1.0 : -1.0) /
            std::sqrt(static_cast<double>((two_a + 1) * (two_b + 1)));
        EXPECT_NEAR(got, expected, 1e-14)
            << two_a << " " << two_b << " " << two_f;
      }
    }
  }
}

TEST(SixJ, ContractionOracleSweep) {
  long checked = 0;
  for (int two_j1 = 0; two_j1 <= 6; ++two_j1) {
    for (int two_j2 = 0; two_j2 <= 6; ++two_j2) {
      for (int two_j12 = std::abs(two_j1 - two_j2);
           two_j12 <= two_j1 + two_j2 && two_j12 <= 6; two_j12 += 2) {
        for (int two_j3 = 0; two_j3 <= 6; ++two_j3) {
          for (int two_j = std::abs(two_j12 - two_j3);
               two_j <= two_j12 + two_j3 && two_j <= 6; two_j += 2) {
            for (int two_j23 = std::abs(two_j2 - two_j3);
                 two_j23 <= two_j2 + two_j3 && two_j23 <= 6; two_j23 += 2) {
              if (!triangle_ok(two_j1, two_j23, two_j)) continue;
              const double got =
                  six_j(two_j1, two_j2, two_j12, two_j3, two_j, two_j23);
              const double ref = six_j_by_contraction(
                  two_j1, two_j2, two_j12, two_j3, two_j, two_j23);
              ASSERT_NEAR(got, ref, 1e-12)
                  << two_j1 << " " << two_j2 << " " << two_j12 << " "
                  << two_j3 << " " << two_j << " " << two_j23;
              ++checked;
            }
          }
        }
      }
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(SixJ, Orthogonality) {
  // sum_x (2x+1)(2g+1) {a b x; c d g}{a b x; c d h} = delta_{gh}
  for (int two_s = 1; two_s <= 6; ++two_s) {
    for (int two_g = 0; two_g <= 2 * two_s; two_g += 2) {
      for (int two_h = 0; two_h <= 2 * two_s; two_h += 2) {
        double sum = 0.0;
        for (int two_x = 0; two_x <= 2 * two_s; two_x += 2) {
          sum += (two_x + 1) * (two_g + 1) *
                 six_j(two_s, two_s, two_x, two_s, two_s, two_g) *
                 six_j(two_s, two_s, two_x, two_s, two_s, two_h);
        }
        EXPECT_NEAR(sum, two_g == two_h ? 1.0 : 0.0, 1e-12)
            << two_s << " " << two_g << " " << two_h;
      }
    }
  }
}

TEST(SixJ, FiftyDigitExactnessSpotChecks) {
  // The lambda-type symbols {s s l; s s l'} must be exactly rational: the four
  // triangle deltas pair up into perfect squares.
  for (int two_s = 1; two_s <= 8; ++two_s) {
    for (int two_l = 0; two_l <= 2 * two_s; two_l += 2) {
      for (int two_lp = 0; two_lp <= 2 * two_s; two_lp += 2) {
        const auto symbol =
            six_j_exact(two_s, two_s, two_l, two_s, two_s, two_lp);
        EXPECT_TRUE(symbol.is_zero() || symbol.try_rational().has_value())
            << two_s << " " << two_l << " " << two_lp;
      }
    }
  }
}

TEST(SpinOperators, CommutationAndTraces) {
  for (int two_s = 1; two_s <= 8; ++two_s) {
    const Spin s{two_s};
    const auto ops = spin_operators(s);
    const Complex i_unit(0.0, 1.0);
    EXPECT_LT((ops.sx * ops.sy - ops.sy * ops.sx - i_unit * ops.sz)
                  .cwiseAbs()
                  .maxCoeff(),
              1e-13);
    EXPECT_LT((ops.sy * ops.sz - ops.sz * ops.sy - i_unit * ops.sx)
                  .cwiseAbs()
                  .maxCoeff(),
              1e-13);
    EXPECT_LT((ops.sz * ops.sx - ops.sx * ops.sz - i_unit * ops.sy)
                  .cwiseAbs()
                  .maxCoeff(),
              1e-13);

    const double sv = s.value();
    const Matrix casimir =
        ops.sx * ops.sx + ops.sy * ops.sy + ops.sz * ops.sz;
    EXPECT_LT((casimir - sv * (sv + 1.0) * Matrix::Identity(s.dim(), s.dim()))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);

    const double tr_sz2 = (ops.sz * ops.sz).trace().real();
    EXPECT_NEAR(tr_sz2, sv * (sv + 1.0) * (2.0 * sv + 1.0) / 3.0, 1e-12);
  }
}

TEST(WignerD, HalfSpinAtPi) {
  const Matrix d = wigner_D(Spin{1}, 0.0, kPi, 0.0);
  EXPECT_NEAR(std::abs(d(0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(d(0, 1).real(), -1.0, 1e-15);
  EXPECT_NEAR(d(1, 0).real(), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(d(1, 1)), 0.0, 1e-15);
}

TEST(WignerD, IdentityAndCenter) {
  for (int two_s = 0; two_s <= 6; ++two_s) {
    const Spin s{two_s};
    const int n = s.dim();
    EXPECT_LT((wigner_D(s, 0, 0, 0) - Matrix::Identity(n, n))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-15);
    // A full 2*pi turn about z is (-1)^{2s}.
    const double center = (two_s % 2 == 0) ? 1.0 : -1.0;
    EXPECT_LT((wigner_D(s, 2.0 * kPi, 0, 0) -
               center * Matrix::Identity(n, n))
                  .cwiseAbs()
                  .maxCoeff(),
              1e-12);
  }
}

TEST(WignerD, MatrixExponentialOracle) {
  std::mt19937_64 rng(20260817);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  for (int two_s = 1; two_s <= 6; ++two_s) {
    const Spin s{two_s};
    const auto ops = spin_operators(s);
    for (int rep = 0; rep < 10; ++rep) {
      const double alpha = angle(rng);
      const double beta = 0.5 * angle(rng);
      const double gamma = angle(rng);
      const Matrix expected = unitary_exp(ops.sz, alpha) *
                              unitary_exp(ops.sy, beta) *
                              unitary_exp(ops.sz, gamma);
      const Matrix got = wigner_D(s, alpha, beta, gamma);
      EXPECT_LT((got - expected).cwiseAbs().maxCoeff(), 1e-12)
          << "two_s=" << two_s;
    }
  }
}

TEST(WignerD, Unitarity) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  for (int two_s = 0; two_s <= 6; ++two_s) {
    const Spin s{two_s};
    const int n = s.dim();
    for (int rep = 0; rep < 5; ++rep) {
      const Matrix d = wigner_D(s, angle(rng), 0.5 * angle(rng), angle(rng));
      EXPECT_LT((d.adjoint() * d - Matrix::Identity(n, n))
                    .cwiseAbs()
                    .maxCoeff(),
                1e-12);
    }
  }
}

struct Quaternion {
  double w, x, y, z;
};

Quaternion quat_mul(const Quaternion& a, const Quaternion& b) {
  return {a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
          a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
          a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
          a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w};
}

Quaternion quat_from_euler(double alpha, double beta, double gamma) {
  const Quaternion qa{std::cos(0.5 * alpha), 0, 0, std::sin(0.5 * alpha)};
  const Quaternion qb{std::cos(0.5 * beta), 0, std::sin(0.5 * beta), 0};
  const Quaternion qc{std::cos(0.5 * gamma), 0, 0, std::sin(0.5 * gamma)};
  return quat_mul(quat_mul(qa, qb), qc);
}

// Inverse of quat_from_euler on the beta in [0, pi] branch; reconstructs the
// same group element including the spinor sign.
void euler_from_quat(const Quaternion& q, double& alpha, double& beta,
                     double& gamma) {
  const double cc = std::hypot(q.w, q.z);
  const double ss = std::hypot(q.x, q.y);
  beta = 2.0 * std::atan2(ss, cc);
  const double p = std::atan2(q.z, q.w);
  const double mm = (ss < 1e-300) ? 0.0 : std::atan2(q.x, q.y);
  alpha = p - mm;
  gamma = p + mm;
}

TEST(WignerD, QuaternionCompositionOracle) {
  std::mt19937_64 rng(99123);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (int two_s = 1; two_s <= 6; ++two_s) {
    const Spin s{two_s};
    for (int rep = 0; rep < 100; ++rep) {
      const double a1 = 2.0 * kPi * uni(rng);
      const double b1 = std::acos(1.0 - 2.0 * uni(rng));
      const double g1 = 2.0 * kPi * uni(rng);
      const double a2 = 2.0 * kPi * uni(rng);
      const double b2 = std::acos(1.0 - 2.0 * uni(rng));
      const double g2 = 2.0 * kPi * uni(rng);
      const Quaternion q12 =
          quat_mul(quat_from_euler(a1, b1, g1), quat_from_euler(a2, b2, g2));
      double a12, b12, g12;
      euler_from_quat(q12, a12, b12, g12);
      const Matrix product =
          wigner_D(s, a1, b1, g1) * wigner_D(s, a2, b2, g2);
      const Matrix composed = wigner_D(s, a12, b12, g12);
      ASSERT_LT((product - composed).cwiseAbs().maxCoeff(), 1e-12)
          << "two_s=" << two_s << " rep=" << rep;
    }
  }
}

TEST(SqrtRationalAlgebra, RoundTripsAndProducts) {
  const auto half = SqrtRational::from_rational(BigRational(1, 2));
  const auto two = SqrtRational::sqrt_of(BigRational(4));
  ASSERT_TRUE(two.try_rational().has_value());
  EXPECT_EQ(*two.try_rational(), 2);
  const auto product = half * two;
  ASSERT_TRUE(product.try_rational().has_value());
  EXPECT_EQ(*product.try_rational(), 1);

  const auto irr = SqrtRational::sqrt_of(BigRational(1, 3));
  EXPECT_FALSE(irr.try_rational().has_value());
  EXPECT_NEAR(irr.to_double(), 1.0 / std::sqrt(3.0), 5e-16);
  EXPECT_TRUE((irr * SqrtRational()).is_zero());
  EXPECT_THROW(SqrtRational::sqrt_of(BigRational(-1)), std::invalid_argument);
}

TEST(SpinGuard, CapIsEnforced) {
  EXPECT_NO_THROW(make_spin(max_two_s()));
  EXPECT_THROW(make_spin(max_two_s() + 1), std::invalid_argument);
  EXPECT_THROW(make_spin(-1), std::invalid_argument);
}

}  // namespace
}  // namespace spinmetro
