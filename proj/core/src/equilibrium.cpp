#include "rencoal/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "rencoal/errors.hpp"

namespace rencoal {

namespace {

struct Root {
  double x = 0.0;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Root of a nonincreasing f on [lo, hi] by bisection. A nonpositive value at
// lo is a corner solution. If f jumps across zero the bracket collapses onto
// the jump, which is the generalized root (the concave payoff's maximizer).
template <class F>
Root decreasing_root(F&& f, double lo, double hi, double tol) {
  const double f_lo = f(lo);
  if (f_lo <= tol) return {lo, f_lo, 0, true};
  const double f_hi = f(hi);
  if (f_hi > tol) return {hi, f_hi, 0, false};
  if (f_hi >= -tol) return {hi, f_hi, 0, true};
  std::size_t it = 0;
  for (; it < 2000; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (std::abs(fm) <= tol) return {mid, fm, it + 1, true};
    if (fm > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {hi, f(hi), it, true};
}

void check_groups(const ForecastModel& model, std::size_t k) {
  const std::size_t n = model.n_producers();
  if (k == 0 || k > n) {
    detail::throw_invalid("group count K=" + std::to_string(k) + " must be in [1, " +
                          std::to_string(n) + "]");
  }
  if (n % k != 0) {
    detail::throw_invalid("N=" + std::to_string(n) + " is not divisible by K=" + std::to_string(k) +
                          "; use solve_asymmetric for unequal groups");
  }
  if (!model.is_exchangeable()) {
    detail::throw_invalid("symmetric solvers need an exchangeable (gaussian_iid) model; "
                          "use solve_asymmetric");
  }
}

// Generalized FOC residual: zero when g changes sign at w (a jump), the
// complementary-slackness violation at the w = 0 corner, |g| otherwise.
template <class G>
double foc_residual(G&& g, double w) {
  const double v = g(w);
  if (w <= 0.0) return std::max(0.0, v);
  if (v < 0.0) {
    const double before = g(w - 1e-12 * std::max(1.0, w));
    if (before >= 0.0) return 0.0;
  }
  return std::abs(v);
}

EquilibriumResult finish(const MarketParams& params, Partition partition, std::vector<double> bids,
                         const std::vector<double>& group_profits, SolverDiagnostics diag) {
  EquilibriumResult r;
  r.total_bid = std::accumulate(bids.begin(), bids.end(), 0.0);
  const auto quote = price(params, std::max(r.total_bid, 0.0));
  r.clearing_price = quote.value;
  diag.price_clamped = quote.clamped;
  r.group_profits = group_profits;
  r.per_producer_profit.resize(bids.size());
  for (std::size_t k = 0; k < bids.size(); ++k) {
    r.per_producer_profit[k] = group_profits[k] / static_cast<double>(partition.group_size(k));
  }
  r.partition = std::move(partition);
  r.bids = std::move(bids);
  r.diagnostics = std::move(diag);
  return r;
}

std::vector<GroupSumDistribution> group_distributions(const ForecastModel& model,
                                                      const Partition& partition) {
  std::vector<GroupSumDistribution> out;
  out.reserve(partition.n_groups());
  for (const auto& g : partition.groups()) out.push_back(group_sum(model, g));
  return out;
}

}  // namespace

std::string to_string(AsymmetricMethod m) {
  return m == AsymmetricMethod::aggregate_bisection ? "aggregate_bisection" : "damped_best_response";
}

double EquilibriumResult::mean_producer_profit() const {
  const double total = std::accumulate(group_profits.begin(), group_profits.end(), 0.0);
  return total / static_cast<double>(partition.n_producers());
}

double fixed_penalty_foc(const MarketParams& params, const GroupSumDistribution& group, double bid,
                         double others_total) {
  return 1.0 - 2.0 * params.alpha * bid - params.alpha * others_total - params.q * group.cdf(bid);
}

EquilibriumResult solve_symmetric(const MarketParams& params, const ForecastModel& model,
                                  std::size_t n_groups, const SolverOptions& options) {
  params.validate();
  if (params.settlement != Settlement::fixed_penalty) {
    detail::throw_invalid("solve_symmetric requires fixed_penalty settlement; use solve_real_time");
  }
  check_groups(model, n_groups);

  Partition partition = Partition::equal_blocks(model.n_producers(), n_groups);
  const auto dist = group_sum(model, partition.group(0));
  const double kp1 = static_cast<double>(n_groups) + 1.0;
  auto f = [&](double w) { return 1.0 - kp1 * params.alpha * w - params.q * dist.cdf(w); };

  const Root root = decreasing_root(f, 0.0, 1.0 / (params.alpha * kp1), options.symmetric_tolerance);

  SolverDiagnostics diag;
  diag.iterations = root.iterations;
  diag.residual = foc_residual(f, root.x);
  diag.converged = root.converged;
  diag.method = "symmetric_bisection";

  std::vector<double> bids(n_groups, root.x);
  const double total = root.x * static_cast<double>(n_groups);
  const double profit = group_profit_fixed_penalty(params, dist, root.x, total);
  return finish(params, std::move(partition), std::move(bids),
                std::vector<double>(n_groups, profit), std::move(diag));
}

namespace {

double max_residual(const MarketParams& params, const std::vector<GroupSumDistribution>& dists,
                    const std::vector<double>& bids) {
  const double total = std::accumulate(bids.begin(), bids.end(), 0.0);
  double worst = 0.0;
  for (std::size_t k = 0; k < bids.size(); ++k) {
    const double others = total - bids[k];
    auto g = [&](double w) { return fixed_penalty_foc(params, dists[k], w, others); };
    worst = std::max(worst, foc_residual(g, bids[k]));
  }
  return worst;
}

// Group k's best reply to the opponents' total bid.
double best_response(const MarketParams& params, const GroupSumDistribution& dist, double others) {
  const double hi = std::max(0.0, (1.0 - params.alpha * others) / (2.0 * params.alpha));
  auto g = [&](double w) { return fixed_penalty_foc(params, dist, w, others); };
  return decreasing_root(g, 0.0, hi, 0.0).x;
}

// Group k's bid consistent with a total bid X (opponents = X - w).
double reply_to_total(const MarketParams& params, const GroupSumDistribution& dist, double total) {
  const double hi = std::max(0.0, (1.0 - params.alpha * total) / params.alpha);
  auto phi = [&](double w) {
    return 1.0 - params.alpha * total - params.alpha * w - params.q * dist.cdf(w);
  };
  return decreasing_root(phi, 0.0, hi, 0.0).x;
}

std::vector<double> cournot_start(const MarketParams& params, std::size_t k) {
  return std::vector<double>(k, 1.0 / (params.alpha * (static_cast<double>(k) + 1.0)));
}

}  // namespace

EquilibriumResult solve_asymmetric(const MarketParams& params, const ForecastModel& model,
                                   const Partition& partition, const SolverOptions& options) {
  params.validate();
  if (params.settlement != Settlement::fixed_penalty) {
    detail::throw_invalid("solve_asymmetric requires fixed_penalty settlement");
  }
  if (partition.n_producers() != model.n_producers()) {
    detail::throw_invalid("partition covers " + std::to_string(partition.n_producers()) +
                          " producers, model has " + std::to_string(model.n_producers()));
  }
  const std::size_t k_groups = partition.n_groups();
  const auto dists = group_distributions(model, partition);

  SolverDiagnostics diag;
  diag.method = to_string(options.method);
  std::vector<double> bids(k_groups, 0.0);

  if (options.method == AsymmetricMethod::aggregate_bisection) {
    auto replies = [&](double total) {
      for (std::size_t k = 0; k < k_groups; ++k) bids[k] = reply_to_total(params, dists[k], total);
      return std::accumulate(bids.begin(), bids.end(), 0.0);
    };
    auto h = [&](double total) { return replies(total) - total; };
    const Root root = decreasing_root(h, 0.0, params.bid_ceiling(), 1e-15);
    replies(root.x);
    diag.iterations = root.iterations;
  } else {
    if (!(options.damping > 0.0 && options.damping <= 1.0)) {
      detail::throw_invalid("best response: damping must be in (0, 1]");
    }
    bids = options.start.value_or(cournot_start(params, k_groups));
    if (bids.size() != k_groups) detail::throw_invalid("best response: start has wrong length");
    diag.start = bids;
    std::vector<double> next(k_groups);
    for (diag.iterations = 0; diag.iterations < options.max_iterations;) {
      const double total = std::accumulate(bids.begin(), bids.end(), 0.0);
      double delta = 0.0;
      for (std::size_t k = 0; k < k_groups; ++k) {
        const double br = best_response(params, dists[k], total - bids[k]);
        next[k] = (1.0 - options.damping) * bids[k] + options.damping * br;
        delta = std::max(delta, std::abs(next[k] - bids[k]));
      }
      bids.swap(next);
      ++diag.iterations;
      if (delta <= options.step_tolerance &&
          max_residual(params, dists, bids) <= options.residual_tolerance) {
        break;
      }
    }
  }

  diag.residual = max_residual(params, dists, bids);
  diag.converged = diag.residual <= options.residual_tolerance &&
                   (options.method == AsymmetricMethod::aggregate_bisection ||
                    diag.iterations < options.max_iterations);

  const double total = std::accumulate(bids.begin(), bids.end(), 0.0);
  std::vector<double> profits(k_groups);
  for (std::size_t k = 0; k < k_groups; ++k) {
    profits[k] = group_profit_fixed_penalty(params, dists[k], bids[k], total);
  }
  return finish(params, partition, std::move(bids), profits, std::move(diag));
}

EquilibriumResult solve_real_time(const MarketParams& params, const ForecastModel& model,
                                  std::size_t n_groups, const SolverOptions& options) {
  params.validate();
  if (params.settlement != Settlement::real_time_market) {
    detail::throw_invalid("solve_real_time requires real_time_market settlement");
  }
  check_groups(model, n_groups);

  const double k = static_cast<double>(n_groups);
  auto g = [&](double w) {
    return 1.0 - params.alpha * (k + 1.0) * w - params.pbar * cap_probability(params, model, k * w);
  };
  const Root root = decreasing_root(g, 0.0, 1.0 / (params.alpha * (k + 1.0)), options.symmetric_tolerance);

  SolverDiagnostics diag;
  diag.iterations = root.iterations;
  diag.residual = foc_residual(g, root.x);
  diag.converged = root.converged;
  diag.method = "real_time_bisection";

  Partition partition = Partition::equal_blocks(model.n_producers(), n_groups);
  BidProfile profile{partition, std::vector<double>(n_groups, root.x)};
  // Exchangeable groups have equal profits.
  const double profit = group_profit_real_time_analytic(params, model, profile, 0);
  return finish(params, std::move(partition), std::move(profile.bids),
                std::vector<double>(n_groups, profit), std::move(diag));
}

DeviationReport verify_equilibrium(const MarketParams& params, const ForecastModel& model,
                                   const Partition& partition, const std::vector<double>& bids,
                                   double grid_step, double threshold) {
  params.validate();
  if (!(grid_step > 0.0)) detail::throw_invalid("verify_equilibrium: grid step must be positive");
  BidProfile profile{partition, bids};
  profile.validate();
  if (partition.n_producers() != model.n_producers()) {
    detail::throw_invalid("verify_equilibrium: partition and model sizes differ");
  }
  const double ceiling = params.bid_ceiling();
  for (double b : bids) {
    if (b > ceiling + 1e-12) detail::throw_invalid("verify_equilibrium: bids must lie in [0, 1/alpha]");
  }

  const std::size_t k_groups = partition.n_groups();
  const double total = profile.total();
  const bool real_time = params.settlement == Settlement::real_time_market;
  const double p_cap = real_time ? cap_probability(params, model, total) : 0.0;
  const auto steps = static_cast<std::size_t>(std::floor(ceiling / grid_step));

  DeviationReport report;
  report.gains.assign(k_groups, 0.0);
  report.best_deviations = bids;
  report.max_gain = -std::numeric_limits<double>::infinity();

  for (std::size_t k = 0; k < k_groups; ++k) {
    const double others = total - bids[k];
    std::function<double(double)> profit;
    std::optional<GroupSumDistribution> dist;
    if (real_time) {
      // E[S_k 1(D > 0)] is held fixed and cancels in the gain.
      profit = [&](double w) {
        return linear_price(params, others + w) * w - params.pbar * p_cap * w;
      };
    } else {
      dist = group_sum(model, partition.group(k));
      profit = [&](double w) { return group_profit_fixed_penalty(params, *dist, w, others + w); };
    }
    const double base = profit(bids[k]);
    double best_gain = 0.0;
    double best_bid = bids[k];
    for (std::size_t j = 0; j <= steps + 1; ++j) {
      const double w = j <= steps ? static_cast<double>(j) * grid_step : ceiling;
      const double gain = profit(w) - base;
      if (gain > best_gain) {
        best_gain = gain;
        best_bid = w;
      }
    }
    report.gains[k] = best_gain;
    report.best_deviations[k] = best_bid;
    if (best_gain > report.max_gain) {
      report.max_gain = best_gain;
      report.worst_group = k;
    }
  }
  report.certified = report.max_gain <= threshold;
  return report;
}

}  // namespace rencoal
