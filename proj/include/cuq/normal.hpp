#pragma once

namespace cuq {

/// Standard normal density.
double normal_pdf(double x);

/// Standard normal CDF, Phi(x).
double normal_cdf(double x);

/// Upper tail 1 - Phi(x), accurate in the right tail.
double normal_ccdf(double x);

/// Inverse of Phi on (0, 1). Throws DomainError outside the open interval.
double normal_quantile(double p);

/// Largest |u| the transforms ever hand to Phi^-1 or receive from it.
inline constexpr double kNormalTailClamp = 8.5;

}  // namespace cuq
