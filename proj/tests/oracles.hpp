#pragma once

// Test-only reference computations. Nothing here calls into the library's
// solvers or distribution code.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

namespace oracle {

inline double phi(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

inline double Phi(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double gauss_cdf(double m, double s, double w) {
  if (s == 0.0) return w >= m ? 1.0 : 0.0;
  return Phi((w - m) / s);
}

/// Plain bisection for a sign change of f on [lo, hi] (f(lo) > 0 > f(hi)).
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  for (int i = 0; i < 300; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Monte Carlo E[(w - X)^+] for X ~ N(m, s^2): returns {mean, standard error}.
inline std::pair<double, double> mc_shortfall(double m, double s, double w, std::size_t n,
                                              unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> normal(m, s);
  double acc = 0.0, acc2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = std::max(w - normal(rng), 0.0);
    acc += v;
    acc2 += v * v;
  }
  const double mean = acc / static_cast<double>(n);
  const double var = (acc2 - static_cast<double>(n) * mean * mean) / static_cast<double>(n - 1);
  return {mean, std::sqrt(var / static_cast<double>(n))};
}

/// Exact standard error of the n-sample mean of (w - X)^+ for X ~ N(m, s^2),
/// from the closed-form second moment s^2 [(z^2 + 1) Phi(z) + z phi(z)].
/// Sample standard errors are unreliable far in the tail, where only a handful
/// of draws are nonzero.
inline double shortfall_mc_std_error(double m, double s, double w, std::size_t n) {
  const double z = (w - m) / s;
  const double first = s * (z * Phi(z) + phi(z));
  const double second = s * s * ((z * z + 1.0) * Phi(z) + z * phi(z));
  return std::sqrt(std::max(second - first * first, 0.0) / static_cast<double>(n));
}

/// Damped simultaneous best responses for Gaussian groups (means m_k,
/// stds s_k), each reply found by bisection on the group's FOC.
inline std::vector<double> damped_best_response(double alpha, double q, const std::vector<double>& m,
                                                const std::vector<double>& s,
                                                std::vector<double> bids, double damping,
                                                int iterations) {
  const std::size_t k = m.size();
  for (int it = 0; it < iterations; ++it) {
    double total = 0.0;
    for (double b : bids) total += b;
    std::vector<double> next(k);
    for (std::size_t g = 0; g < k; ++g) {
      const double others = total - bids[g];
      auto foc = [&](double w) {
        return 1.0 - 2.0 * alpha * w - alpha * others - q * gauss_cdf(m[g], s[g], w);
      };
      double br = 0.0;
      const double hi = std::max(0.0, (1.0 - alpha * others) / (2.0 * alpha));
      if (foc(0.0) > 0.0) br = bisect(foc, 0.0, hi);
      next[g] = (1.0 - damping) * bids[g] + damping * br;
    }
    bids = next;
  }
  return bids;
}

/// Fixed-penalty profit of a Gaussian group by direct formula.
inline double gauss_profit(double alpha, double q, double m, double s, double w, double total) {
  const double d = w - m;
  const double es = s == 0.0 ? std::max(d, 0.0) : d * Phi(d / s) + s * phi(d / s);
  return (1.0 - alpha * total) * w - q * es;
}

}  // namespace oracle
