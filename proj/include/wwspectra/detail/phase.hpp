#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>

namespace ww::detail {

/// Fractional part of theta * t, computed from the exact product.
///
/// The product is split with an fma into hi + lo; frac(hi) is exact for
/// |hi| < 2^52, so the result carries no cancellation error from large t.
inline double frac_product(double theta, std::int64_t t) {
  const double td = static_cast<double>(t);
  const double hi = theta * td;
  const double lo = std::fma(theta, td, -hi);
  double r = (hi - std::floor(hi)) + lo;
  r -= std::floor(r);
  return r;
}

/// e^{-2 pi i theta t}
inline std::complex<double> conj_character(double theta, std::int64_t t) {
  const double a = -2.0 * std::numbers::pi * frac_product(theta, t);
  return {std::cos(a), std::sin(a)};
}

/// e^{+2 pi i theta t}
inline std::complex<double> character(double theta, std::int64_t t) {
  const double a = 2.0 * std::numbers::pi * frac_product(theta, t);
  return {std::cos(a), std::sin(a)};
}

}  // namespace ww::detail
