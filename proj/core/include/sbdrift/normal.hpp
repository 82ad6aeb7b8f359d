#pragma once

namespace sbdrift::normal {

double pdf(double z);

/// Standard normal CDF via erfc; accurate in both tails.
double cdf(double z);

/// Phi^{-1}(p) for p in (0, 1).
double quantile(double p);

}  // namespace sbdrift::normal
