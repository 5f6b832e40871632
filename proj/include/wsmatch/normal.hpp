#pragma once

#include <cmath>

namespace wsmatch {

inline constexpr double kInvSqrt2Pi = 0.3989422804014326779399461;
inline constexpr double kInvSqrt2 = 0.7071067811865475244008444;

inline double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// erfc-based CDF: accurate in both tails (relative error stays small down to
// Phi(-37) ~ 1e-300), unlike the 0.5*(1+erf(.)) form.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

// Inverse standard normal CDF (Wichura's PPND16 rational approximations,
// ~1e-16 relative accuracy).  Throws std::domain_error unless 0 < p < 1.
double inverse_normal_cdf(double p);

// P(X <= a, Y <= b) for standard bivariate normal with correlation rho.
// Gauss-Legendre scheme after Drezner/Wesolowsky with the high-|rho|
// transformation; absolute error below 5e-16.
double bivariate_normal_cdf(double a, double b, double rho);

// Moments E[U^k | U < q] (below) / E[U^k | U > q] (above) of a standard
// normal, k = 1..4, via the recursion M_k = (k-1) M_{k-2} -/+ q^{k-1} phi(q)/mass.
struct TruncatedMoments {
  double m1, m2, m3, m4;
};
TruncatedMoments truncated_normal_moments_below(double q);
TruncatedMoments truncated_normal_moments_above(double q);

}  // namespace wsmatch
