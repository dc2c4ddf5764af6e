#pragma once

namespace mfcrit {

/// Standard normal CDF.
double normal_cdf(double x);

/// 1 - Phi(x), accurate in the upper tail.
double normal_upper_tail(double x);

/// Phi^{-1}(p) for 0 < p < 1.
double normal_quantile(double p);

} // namespace mfcrit
