#include "rencoal/normal.hpp"

#include <cmath>
#include <numbers>

namespace rencoal {

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double gaussian_cdf(double mean, double stddev, double w) {
  if (stddev <= 0.0) return w >= mean ? 1.0 : 0.0;
  return normal_cdf((w - mean) / stddev);
}

double gaussian_expected_shortfall(double mean, double stddev, double w) {
  const double d = w - mean;
  if (stddev <= 0.0) return d > 0.0 ? d : 0.0;
  const double z = d / stddev;
  // d * Phi(z) + s * phi(z); for z << 0 both terms are tiny and of opposite
  // sign, so switch to the Mills-ratio expansion to avoid cancellation.
  if (z < -8.0) {
    // 1/z^2 - 3/z^4 + 15/z^6 - ..., summed until the terms stop shrinking.
    const double inv_z2 = 1.0 / (z * z);
    double term = inv_z2;
    double tail = term;
    for (int k = 1; k < 200; ++k) {
      const double next = -term * (2.0 * k + 1.0) * inv_z2;
      if (std::abs(next) >= std::abs(term) || std::abs(next) < 1e-17 * tail) break;
      tail += next;
      term = next;
    }
    return stddev * normal_pdf(z) * tail;
  }
  return d * normal_cdf(z) + stddev * normal_pdf(z);
}

}  // namespace rencoal
