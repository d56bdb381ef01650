#pragma once

#include <cmath>

#include "tunnel/errors.hpp"

namespace tunnel {

// Complete elliptic integrals in the modulus convention:
// K(u) = int_0^{pi/2} dx / sqrt(1 - u^2 sin^2 x).
inline double elliptic_K(double u) {
  u = std::abs(u);
  if (!(u < 1)) throw DomainError("elliptic_K: modulus must be below 1");
  return std::comp_ellint_1(u);
}

inline double elliptic_E(double u) {
  u = std::abs(u);
  if (u > 1) throw DomainError("elliptic_E: modulus must not exceed 1");
  if (u == 1) return 1.0;
  return std::comp_ellint_2(u);
}

}  // namespace tunnel
