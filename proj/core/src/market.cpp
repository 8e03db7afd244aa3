#include "rencoal/market.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rencoal/errors.hpp"
#include "rencoal/normal.hpp"
#include "rencoal/rng.hpp"

namespace rencoal {

std::string to_string(Settlement s) {
  return s == Settlement::fixed_penalty ? "fixed_penalty" : "real_time_market";
}

Settlement parse_settlement(const std::string& text) {
  if (text == "fixed_penalty" || text == "fixed") return Settlement::fixed_penalty;
  if (text == "real_time_market" || text == "real_time" || text == "realtime") {
    return Settlement::real_time_market;
  }
  detail::throw_invalid("unknown settlement '" + text + "' (expected fixed_penalty or real_time_market)");
}

void MarketParams::validate() const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) detail::throw_invalid("market: alpha must be > 0");
  if (!(q >= 0.0) || !std::isfinite(q)) detail::throw_invalid("market: q must be >= 0");
  if (!(pbar >= 0.0) || !std::isfinite(pbar)) detail::throw_invalid("market: pbar must be >= 0");
  if (!(eps.stddev >= 0.0) || !std::isfinite(eps.stddev) || !std::isfinite(eps.mean)) {
    detail::throw_invalid("market: demand shock stddev must be >= 0");
  }
}

PriceQuote price(const MarketParams& params, double total_bid) {
  if (total_bid < 0.0) detail::throw_invalid("price: total bid must be nonnegative");
  const double p = linear_price(params, total_bid);
  if (p < 0.0) return {0.0, true};
  return {p, false};
}

double BidProfile::total() const { return std::accumulate(bids.begin(), bids.end(), 0.0); }

void BidProfile::validate() const {
  if (bids.size() != partition.n_groups()) {
    detail::throw_invalid("bid profile: " + std::to_string(bids.size()) + " bids for " +
                          std::to_string(partition.n_groups()) + " groups");
  }
  for (std::size_t k = 0; k < bids.size(); ++k) {
    if (!std::isfinite(bids[k]) || bids[k] < 0.0) {
      detail::throw_invalid("bid profile: bid of group " + std::to_string(k + 1) +
                            " must be finite and nonnegative");
    }
  }
}

bool BidProfile::within_ceiling(const MarketParams& params, double tol) const {
  return total() <= params.bid_ceiling() + tol;
}

namespace {

void check_profile(const ForecastModel& model, const BidProfile& profile, std::size_t k) {
  profile.validate();
  if (profile.partition.n_producers() != model.n_producers()) {
    detail::throw_invalid("partition covers " + std::to_string(profile.partition.n_producers()) +
                          " producers, model has " + std::to_string(model.n_producers()));
  }
  if (k >= profile.partition.n_groups()) {
    detail::throw_invalid("group index " + std::to_string(k + 1) + " out of range 1.." +
                          std::to_string(profile.partition.n_groups()));
  }
}

// Cov(S_k, T) where S_k, T are the delivered outputs of the group and the system.
double group_total_covariance(const ForecastModel& model, std::span<const std::size_t> group) {
  const double n = static_cast<double>(model.n_producers());
  if (model.kind() == ModelKind::gaussian_iid) {
    const double sd = model.iid_stddev();
    return static_cast<double>(group.size()) * sd * sd / (n * n);
  }
  const Eigen::MatrixXd cov = model.covariance();
  double acc = 0.0;
  for (std::size_t i : group) acc += cov.row(static_cast<Eigen::Index>(i)).sum();
  return acc / (n * n);
}

double total_output_variance(const ForecastModel& model) {
  const double n = static_cast<double>(model.n_producers());
  if (model.kind() == ModelKind::gaussian_iid) {
    const double sd = model.iid_stddev();
    return sd * sd / n;
  }
  return std::max(model.covariance().sum(), 0.0) / (n * n);
}

double total_output_mean(const ForecastModel& model) {
  if (model.kind() == ModelKind::gaussian_iid) return model.iid_mean();
  return model.mean_vector().mean();
}

}  // namespace

double group_profit_fixed_penalty(const MarketParams& params, const GroupSumDistribution& group,
                                  double bid, double total_bid) {
  return linear_price(params, total_bid) * bid - params.q * group.expected_shortfall(bid);
}

double group_profit_fixed_penalty(const MarketParams& params, const ForecastModel& model,
                                  const BidProfile& profile, std::size_t k) {
  if (params.settlement != Settlement::fixed_penalty) {
    detail::throw_invalid("group_profit_fixed_penalty requires fixed_penalty settlement");
  }
  check_profile(model, profile, k);
  const auto dist = group_sum(model, profile.partition.group(k));
  return group_profit_fixed_penalty(params, dist, profile.bids[k], profile.total());
}

std::vector<McEstimate> group_profits_real_time(const MarketParams& params,
                                                const ForecastModel& model,
                                                const BidProfile& profile, std::size_t samples,
                                                std::uint64_t seed) {
  if (params.settlement != Settlement::real_time_market) {
    detail::throw_invalid("real-time profit requires real_time_market settlement");
  }
  if (samples == 0) detail::throw_invalid("real-time profit: sample count must be positive");
  check_profile(model, profile, 0);

  const Eigen::MatrixXd sums = sample_group_sums(model, profile.partition, samples, seed);
  Rng eps_rng = make_rng(seed, 1);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double total = profile.total();
  const double day_ahead = linear_price(params, total);
  const std::size_t k_groups = profile.partition.n_groups();
  std::vector<double> acc(k_groups, 0.0);
  std::vector<double> acc2(k_groups, 0.0);
  for (Eigen::Index t = 0; t < sums.rows(); ++t) {
    const double eps = params.eps.mean + params.eps.stddev * normal(eps_rng);
    const double imbalance = eps + total - sums.row(t).sum();
    const double p_rt = imbalance > 0.0 ? params.pbar : 0.0;
    for (std::size_t k = 0; k < k_groups; ++k) {
      const double w = profile.bids[k];
      const double v = day_ahead * w - p_rt * (w - sums(t, static_cast<Eigen::Index>(k)));
      acc[k] += v;
      acc2[k] += v * v;
    }
  }
  const double n = static_cast<double>(samples);
  std::vector<McEstimate> out(k_groups);
  for (std::size_t k = 0; k < k_groups; ++k) {
    const double mean = acc[k] / n;
    const double var = samples > 1 ? std::max(acc2[k] - n * mean * mean, 0.0) / (n - 1.0) : 0.0;
    out[k] = {mean, std::sqrt(var / n), samples};
  }
  return out;
}

McEstimate group_profit_real_time(const MarketParams& params, const ForecastModel& model,
                                  const BidProfile& profile, std::size_t k, std::size_t samples,
                                  std::uint64_t seed) {
  check_profile(model, profile, k);
  return group_profits_real_time(params, model, profile, samples, seed)[k];
}

double cap_probability(const MarketParams& params, const ForecastModel& model, double total_bid) {
  if (!model.is_gaussian()) detail::throw_invalid("cap_probability requires a Gaussian model");
  // D = eps + X - T > 0
  const double mean_d = params.eps.mean + total_bid - total_output_mean(model);
  const double sd_d = std::sqrt(params.eps.stddev * params.eps.stddev + total_output_variance(model));
  if (sd_d <= 0.0) return mean_d > 0.0 ? 1.0 : 0.0;
  return normal_cdf(mean_d / sd_d);
}

double group_profit_real_time_analytic(const MarketParams& params, const ForecastModel& model,
                                       const BidProfile& profile, std::size_t k) {
  if (params.settlement != Settlement::real_time_market) {
    detail::throw_invalid("real-time profit requires real_time_market settlement");
  }
  if (!model.is_gaussian()) detail::throw_invalid("analytic real-time profit requires a Gaussian model");
  check_profile(model, profile, k);

  const auto& group = profile.partition.group(k);
  const double total = profile.total();
  const double w = profile.bids[k];
  const double mean_s = model.group_mean(group);
  const double mean_d = params.eps.mean + total - total_output_mean(model);
  const double sd_d = std::sqrt(params.eps.stddev * params.eps.stddev + total_output_variance(model));

  double p_cap = 0.0;
  double partial = 0.0;  // E[S_k 1(D > 0)]
  if (sd_d <= 0.0) {
    p_cap = mean_d > 0.0 ? 1.0 : 0.0;
    partial = mean_s * p_cap;
  } else {
    const double z = mean_d / sd_d;
    p_cap = normal_cdf(z);
    const double cov_sd = -group_total_covariance(model, group);
    partial = mean_s * p_cap + cov_sd / sd_d * normal_pdf(z);
  }
  return linear_price(params, total) * w - params.pbar * (w * p_cap - partial);
}

}  // namespace rencoal
