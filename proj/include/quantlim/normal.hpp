#pragma once

#include <cmath>
#include <limits>

namespace quantlim {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779;
inline constexpr double kInvSqrt2 = 0.7071067811865475244;

inline double norm_pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

// Standard normal CDF via the complementary error function; absolute error
// stays below ~1e-15 across the real line, including +-infinity.
inline double norm_cdf(double z) { return 0.5 * std::erfc(-z * kInvSqrt2); }

// Upper tail Q(z) = 1 - Phi(z); relative-accurate for large positive z.
inline double norm_tail(double z) { return 0.5 * std::erfc(z * kInvSqrt2); }

// Phi(zhi) - Phi(zlo) for a standardized interval; endpoints may be infinite.
// Intervals entirely in one tail use the erfc form whose arguments stay
// positive, so far-tail cell probabilities keep their relative accuracy
// instead of cancelling to zero.
inline double norm_interval_prob(double zlo, double zhi) {
  if (zlo >= 0.0) return norm_tail(zlo) - norm_tail(zhi);
  return norm_cdf(zhi) - norm_cdf(zlo);
}

// d/dz contribution phi(z); zero at infinite endpoints (phi decays faster than
// any polynomial, so phi(z) and z*phi(z) both vanish).
inline double norm_pdf_safe(double z) {
  if (std::isinf(z)) return 0.0;
  return norm_pdf(z);
}

inline double z_times_pdf_safe(double z) {
  if (std::isinf(z)) return 0.0;
  return z * norm_pdf(z);
}

}  // namespace quantlim
