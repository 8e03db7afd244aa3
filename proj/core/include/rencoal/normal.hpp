#pragma once

namespace rencoal {

/// Standard normal density.
double normal_pdf(double z);

/// Standard normal distribution function, accurate in both tails.
double normal_cdf(double z);

/// E[(w - X)^+] for X ~ N(mean, stddev^2). stddev == 0 gives (w - mean)^+.
double gaussian_expected_shortfall(double mean, double stddev, double w);

/// Pr(X <= w) for X ~ N(mean, stddev^2); a unit step at the mean when stddev == 0.
double gaussian_cdf(double mean, double stddev, double w);

}  // namespace rencoal
