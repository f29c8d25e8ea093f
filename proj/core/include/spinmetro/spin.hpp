#pragma once

#include <stdexcept>
#include <string>

namespace spinmetro {

// Half-integer spin quantum numbers are carried as doubled integers (two_s = 2s)
// so that parity and triangle rules stay exact. No floating-point spin labels
// appear anywhere in the library.
struct Spin {
  int two_s = 0;

  // Hilbert-space dimension n = 2s + 1. Also the number of tensor shells
  // l = 0..2s, so r-vectors have length dim().
  constexpr int dim() const noexcept { return two_s + 1; }

  constexpr double value() const noexcept { return 0.5 * two_s; }

  constexpr bool operator==(const Spin&) const noexcept = default;
};

// Largest supported 2s. Matrix sizes grow like n^2 (and n^4 for the doubled
// operators), so operations refuse spins beyond the cap instead of silently
// grinding or losing precision. Override with the environment variable
// SPINMETRO_MAX_TWO_S.
inline constexpr int kDefaultMaxTwoS = 20;

int max_two_s();

// Validating constructor used at API boundaries.
Spin make_spin(int two_s);

// Throws std::invalid_argument if s is negative or beyond the configured cap.
void check_spin(Spin s);

}  // namespace spinmetro
