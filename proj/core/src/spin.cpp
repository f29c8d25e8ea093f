#include "spinmetro/spin.hpp"

#include <cstdlib>

namespace spinmetro {

int max_two_s() {
  static const int cap = [] {
    const char* env = std::getenv("SPINMETRO_MAX_TWO_S");
    if (env == nullptr) return kDefaultMaxTwoS;
    char* end = nullptr;
    const long parsed = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || parsed < 0 || parsed > 1000) {
      return kDefaultMaxTwoS;
    }
    return static_cast<int>(parsed);
  }();
  return cap;
}

Spin make_spin(int two_s) {
  Spin s{two_s};
  check_spin(s);
  return s;
}

void check_spin(Spin s) {
  if (s.two_s < 0) {
    throw std::invalid_argument("spin: 2s must be non-negative, got " +
                                std::to_string(s.two_s));
  }
  if (s.two_s > max_two_s()) {
    throw std::invalid_argument(
        "spin: 2s = " + std::to_string(s.two_s) +
        " exceeds the supported maximum " + std::to_string(max_two_s()) +
        " (override with SPINMETRO_MAX_TWO_S)");
  }
}

}  // namespace spinmetro
