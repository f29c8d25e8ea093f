#pragma once

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_int.hpp>

#include <optional>
#include <stdexcept>

namespace spinmetro {

using BigInt = boost::multiprecision::cpp_int;
using BigRational = boost::multiprecision::cpp_rational;
using BigFloat50 = boost::multiprecision::cpp_bin_float_50;

// Exact scalar of the form sign * sqrt(radicand) with a nonnegative rational
// radicand. Closed under multiplication and negation, which is all the
// angular-momentum formulas need: the Racah-type sum is rational, the
// normalization prefactor is a square root, and their product folds into a
// single radicand. Conversion to double is the only rounding step.
class SqrtRational {
 public:
  SqrtRational() = default;  // zero

  // The exact value v (radicand v^2).
  static SqrtRational from_rational(const BigRational& v) {
    SqrtRational out;
    out.sign_ = v.sign();
    out.radicand_ = v * v;
    return out;
  }

  // sqrt(v), v >= 0.
  static SqrtRational sqrt_of(const BigRational& v) {
    if (v.sign() < 0) {
      throw std::invalid_argument("SqrtRational::sqrt_of: negative radicand");
    }
    SqrtRational out;
    out.sign_ = v.sign();
    out.radicand_ = v;
    return out;
  }

  friend SqrtRational operator*(const SqrtRational& a, const SqrtRational& b) {
    SqrtRational out;
    out.sign_ = a.sign_ * b.sign_;
    if (out.sign_ != 0) out.radicand_ = a.radicand_ * b.radicand_;
    return out;
  }

  SqrtRational operator-() const {
    SqrtRational out = *this;
    out.sign_ = -out.sign_;
    return out;
  }

  bool is_zero() const { return sign_ == 0; }
  int sign() const { return sign_; }

  // Nonnegative radicand; the represented value is sign() * sqrt(radicand()).
  const BigRational& radicand() const { return radicand_; }

  bool operator==(const SqrtRational& o) const {
    return sign_ == o.sign_ && (sign_ == 0 || radicand_ == o.radicand_);
  }

  // Exact rational value when the radicand is a perfect square of a rational.
  std::optional<BigRational> try_rational() const {
    if (sign_ == 0) return BigRational(0);
    const BigInt num = numerator(radicand_);
    const BigInt den = denominator(radicand_);
    const BigInt sn = boost::multiprecision::sqrt(num);
    const BigInt sd = boost::multiprecision::sqrt(den);
    if (sn * sn != num || sd * sd != den) return std::nullopt;
    BigRational root(sn, sd);
    if (sign_ < 0) root = -root;
    return root;
  }

  // Correctly rounded within a couple of ulps: the radicand is evaluated in
  // 50-digit floating point before the square root.
  double to_double() const {
    if (sign_ == 0) return 0.0;
    const BigFloat50 num(numerator(radicand_));
    const BigFloat50 den(denominator(radicand_));
    const BigFloat50 root = sqrt(num / den);
    return sign_ * root.convert_to<double>();
  }

 private:
  int sign_ = 0;
  BigRational radicand_ = 0;
};

}  // namespace spinmetro
