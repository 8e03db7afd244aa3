#pragma once

// Prices and payoffs. All quantities are per-unit of total (inelastic) demand.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "rencoal/partition.hpp"
#include "rencoal/stochastic.hpp"

namespace rencoal {

enum class Settlement { fixed_penalty, real_time_market };

std::string to_string(Settlement s);
Settlement parse_settlement(const std::string& text);

/// Gaussian demand shock added to the real-time net demand.
struct DemandShock {
  double mean = 0.0;
  double stddev = 0.0;
};

struct MarketParams {
  double alpha = 3.4;  ///< day-ahead price drop per unit of total bid
  double q = 1.0;      ///< shortfall penalty rate (fixed_penalty)
  double pbar = 0.0;   ///< real-time price cap (real_time_market)
  DemandShock eps;     ///< real-time demand shock (real_time_market)
  Settlement settlement = Settlement::fixed_penalty;

  /// Throws InvalidArgument unless alpha > 0, q >= 0, pbar >= 0, eps.stddev >= 0.
  void validate() const;

  /// Total bid at which the linear price reaches zero.
  double bid_ceiling() const { return 1.0 / alpha; }
};

struct PriceQuote {
  double value = 1.0;
  bool clamped = false;  ///< the linear model went negative and was clamped to 0
};

/// Day-ahead clearing price 1 - alpha * total_bid, clamped below at 0.
PriceQuote price(const MarketParams& params, double total_bid);

/// Unclamped linear price 1 - alpha * total_bid, as used inside payoffs.
inline double linear_price(const MarketParams& params, double total_bid) {
  return 1.0 - params.alpha * total_bid;
}

/// Per-group day-ahead bids for a partition.
struct BidProfile {
  Partition partition;
  std::vector<double> bids;

  double total() const;
  /// Throws InvalidArgument on size mismatch or a negative / non-finite bid.
  void validate() const;
  /// True when the total bid does not exceed 1/alpha + tol.
  bool within_ceiling(const MarketParams& params, double tol = 1e-9) const;
};

/// (1 - alpha * total) * w_k - q * E[(w_k - S_k)^+].
double group_profit_fixed_penalty(const MarketParams& params, const ForecastModel& model,
                                  const BidProfile& profile, std::size_t k);

/// Same payoff with a precomputed group distribution (hot loops).
double group_profit_fixed_penalty(const MarketParams& params, const GroupSumDistribution& group,
                                  double bid, double total_bid);

struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Monte Carlo estimate of (1 - alpha * total) * w_k - E[p_rt * (w_k - S_k)]
/// with p_rt = pbar * 1(eps + total - sum_i W_i / N > 0). The draw depends on
/// the whole profile, not on k, so all groups share the same scenarios.
McEstimate group_profit_real_time(const MarketParams& params, const ForecastModel& model,
                                  const BidProfile& profile, std::size_t k, std::size_t samples,
                                  std::uint64_t seed);

/// All groups' real-time profits from one set of scenarios.
std::vector<McEstimate> group_profits_real_time(const MarketParams& params,
                                                const ForecastModel& model,
                                                const BidProfile& profile, std::size_t samples,
                                                std::uint64_t seed);

/// Closed-form real-time profit for Gaussian models: the imbalance and the
/// group output are jointly Gaussian, so E[S_k 1(D > 0)] is a bivariate-normal
/// partial expectation.
double group_profit_real_time_analytic(const MarketParams& params, const ForecastModel& model,
                                       const BidProfile& profile, std::size_t k);

/// Pr(sum_i W_i / N - eps < total_bid): the real-time price sits at the cap.
/// Gaussian models only.
double cap_probability(const MarketParams& params, const ForecastModel& model, double total_bid);

}  // namespace rencoal
