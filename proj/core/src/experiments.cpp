#include "rencoal/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rencoal/errors.hpp"
#include "rencoal/parallel.hpp"
#include "rencoal/rng.hpp"

namespace rencoal {

std::string to_string(PartitionSource s) {
  switch (s) {
    case PartitionSource::symmetric:
      return "symmetric";
    case PartitionSource::greedy:
      return "greedy";
    case PartitionSource::baseline:
      return "baseline";
  }
  return "unknown";
}

PartitionSource parse_partition_source(const std::string& text) {
  if (text == "symmetric") return PartitionSource::symmetric;
  if (text == "greedy") return PartitionSource::greedy;
  if (text == "baseline") return PartitionSource::baseline;
  detail::throw_invalid("unknown partition source '" + text + "' (expected symmetric, greedy or baseline)");
}

std::vector<std::size_t> divisors(std::size_t n) {
  std::vector<std::size_t> small, large;
  for (std::size_t d = 1; d * d <= n; ++d) {
    if (n % d != 0) continue;
    small.push_back(d);
    if (d != n / d) large.push_back(n / d);
  }
  small.insert(small.end(), large.rbegin(), large.rend());
  return small;
}

std::vector<std::size_t> log_grid(std::size_t n, std::size_t points) {
  if (n == 0) return {};
  std::vector<std::size_t> out{1};
  if (points >= 2 && n > 1) {
    const double top = std::log(static_cast<double>(n));
    for (std::size_t j = 1; j < points; ++j) {
      const double v = std::exp(top * static_cast<double>(j) / static_cast<double>(points - 1));
      out.push_back(std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(v)), 1, n));
    }
    out.push_back(n);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.params.validate();
  const std::size_t n = spec.model.n_producers();
  if (spec.k_list.empty()) detail::throw_invalid("sweep: K list is empty");
  std::vector<std::size_t> ks = spec.k_list;
  std::sort(ks.begin(), ks.end());
  ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
  if (ks.front() < 1 || ks.back() > n) {
    detail::throw_invalid("sweep: K values must lie in [1, " + std::to_string(n) + "]");
  }
  const bool real_time = spec.params.settlement == Settlement::real_time_market;
  if (real_time && spec.source != PartitionSource::symmetric) {
    detail::throw_invalid("sweep: real-time settlement supports only symmetric partitions");
  }

  std::optional<CovarianceEstimate> cov = spec.covariance;
  if (spec.source == PartitionSource::greedy && !cov) cov = CovarianceEstimate{spec.model.covariance(), 0};

  std::vector<SweepRow> rows(ks.size());
  detail::parallel_for(ks.size(), spec.threads, [&](std::size_t j) {
    const std::size_t k = ks[j];
    EquilibriumResult r;
    if (real_time) {
      r = solve_real_time(spec.params, spec.model, k, spec.solver);
    } else if (spec.source == PartitionSource::symmetric) {
      r = solve_symmetric(spec.params, spec.model, k, spec.solver);
    } else {
      const Partition p = spec.source == PartitionSource::greedy
                              ? greedy_partition(*cov, k, spec.greedy)
                              : baseline_partition(n, k, spec.baseline, stream_seed(spec.seed, k));
      r = solve_asymmetric(spec.params, spec.model, p, spec.solver);
    }
    rows[j] = {k, r.total_bid, r.clearing_price, r.mean_producer_profit(), r.diagnostics.converged,
               r.diagnostics.residual};
  });
  return rows;
}

std::size_t groups_for(std::size_t n, ScalingRule rule) {
  if (n == 0) detail::throw_invalid("scaling: N must be positive");
  switch (rule) {
    case ScalingRule::individual:
      return n;
    case ScalingRule::grand_coalition:
      return 1;
    case ScalingRule::two_thirds:
      break;
  }
  // Smallest k with k^3 >= n^2.
  if (n > (std::size_t{1} << 31)) detail::throw_invalid("scaling: N too large for the two-thirds rule");
  const std::uint64_t n2 = static_cast<std::uint64_t>(n) * n;
  auto k = static_cast<std::size_t>(std::llround(std::cbrt(static_cast<double>(n) * static_cast<double>(n))));
  auto cube = [](std::size_t v) { return static_cast<std::uint64_t>(v) * v * v; };
  while (k > 1 && cube(k - 1) >= n2) --k;
  while (cube(k) < n2) ++k;
  return k;
}

std::vector<ScalingRow> scaling_study(const std::vector<std::size_t>& n_list,
                                      const MarketParams& params, const ModelFamily& family,
                                      ScalingRule rule, const SolverOptions& solver) {
  if (!std::is_sorted(n_list.begin(), n_list.end())) {
    detail::throw_invalid("scaling: N list must be ascending");
  }
  std::vector<ScalingRow> rows;
  rows.reserve(n_list.size());
  for (std::size_t n : n_list) {
    const ForecastModel model = family(n);
    const std::size_t k = groups_for(n, rule);
    const EquilibriumResult r =
        (model.is_exchangeable() && n % k == 0)
            ? solve_symmetric(params, model, k, solver)
            : solve_asymmetric(params, model, Partition::near_equal_blocks(n, k), solver);
    rows.push_back({n, k, r.total_bid, params.bid_ceiling() - r.total_bid, r.diagnostics.converged});
  }
  return rows;
}

namespace {

std::vector<std::size_t> resolve_order(const std::vector<std::size_t>& order, std::size_t n) {
  if (order.empty()) {
    std::vector<std::size_t> out(n);
    std::iota(out.begin(), out.end(), std::size_t{0});
    return out;
  }
  std::vector<bool> seen(n, false);
  for (std::size_t i : order) {
    if (i >= n || seen[i]) detail::throw_invalid("aggregation curve: order must be a permutation of producers");
    seen[i] = true;
  }
  if (order.size() != n) detail::throw_invalid("aggregation curve: order must list every producer");
  return order;
}

}  // namespace

std::vector<AggregationPoint> aggregation_std_curve(const Eigen::MatrixXd& values,
                                                    const std::vector<std::size_t>& order,
                                                    const std::vector<double>& capacities) {
  const auto n = static_cast<std::size_t>(values.cols());
  if (values.rows() < 2) detail::throw_invalid("aggregation curve: need T >= 2 observations");
  if (!capacities.empty() && capacities.size() != n) {
    detail::throw_invalid("aggregation curve: capacity count does not match columns");
  }
  const auto ord = resolve_order(order, n);
  const Eigen::Index t_count = values.rows();
  Eigen::VectorXd weighted = Eigen::VectorXd::Zero(t_count);
  double capacity = 0.0;
  std::vector<AggregationPoint> out;
  out.reserve(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t i = ord[j];
    const double c = capacities.empty() ? 1.0 : capacities[i];
    weighted += c * values.col(static_cast<Eigen::Index>(i));
    capacity += c;
    const Eigen::VectorXd agg = weighted / capacity;
    const double mean = agg.mean();
    const double var = (agg.array() - mean).square().sum() / static_cast<double>(t_count - 1);
    out.push_back({j + 1, std::sqrt(var)});
  }
  return out;
}

std::vector<AggregationPoint> aggregation_std_curve(const ForecastModel& model,
                                                    const std::vector<std::size_t>& order) {
  const std::size_t n = model.n_producers();
  std::vector<AggregationPoint> out;
  out.reserve(n);
  if (model.kind() == ModelKind::gaussian_iid) {
    for (std::size_t j = 1; j <= n; ++j) {
      out.push_back({j, model.iid_stddev() / std::sqrt(static_cast<double>(j))});
    }
    return out;
  }
  const auto ord = resolve_order(order, n);
  const Eigen::MatrixXd cov = model.covariance();
  double sum = 0.0;  // 1^T C_n 1, grown one producer at a time
  for (std::size_t j = 0; j < n; ++j) {
    const auto i = static_cast<Eigen::Index>(ord[j]);
    double cross = 0.0;
    for (std::size_t l = 0; l < j; ++l) cross += cov(i, static_cast<Eigen::Index>(ord[l]));
    sum += 2.0 * cross + cov(i, i);
    const double m = static_cast<double>(j + 1);
    out.push_back({j + 1, std::sqrt(std::max(sum, 0.0)) / m});
  }
  return out;
}

std::vector<PathSummary> sample_path_study(const MarketParams& params, const ForecastModel& model,
                                           const std::vector<Partition>& partitions,
                                           const PathStudyOptions& options) {
  params.validate();
  if (params.settlement != Settlement::real_time_market) {
    detail::throw_invalid("sample paths require real_time_market settlement");
  }
  if (options.days < 2) detail::throw_invalid("sample paths: need at least 2 days");
  if (partitions.empty()) detail::throw_invalid("sample paths: no partitions given");
  for (const auto& p : partitions) {
    if (p.n_producers() != model.n_producers()) {
      detail::throw_invalid("sample paths: partition and model sizes differ");
    }
    if (!p.is_equal_sized()) detail::throw_invalid("sample paths: partitions must have equal-size groups");
  }

  const double n = static_cast<double>(model.n_producers());
  std::optional<double> common = options.common_total;
  if (options.policy == BidPolicy::common_total && !common) {
    common = solve_real_time(params, model, partitions.front().n_groups()).total_bid;
  }

  std::vector<PathSummary> out;
  out.reserve(partitions.size());
  for (std::size_t p = 0; p < partitions.size(); ++p) {
    const Partition& part = partitions[p];
    const std::size_t k_groups = part.n_groups();
    std::vector<double> bids;
    if (options.policy == BidPolicy::equilibrium) {
      bids = solve_real_time(params, model, k_groups).bids;
    } else {
      bids.resize(k_groups);
      for (std::size_t k = 0; k < k_groups; ++k) {
        bids[k] = *common * static_cast<double>(part.group_size(k)) / n;
      }
    }
    const double total = std::accumulate(bids.begin(), bids.end(), 0.0);
    const std::size_t ref = part.group_of(0);
    const double size = static_cast<double>(part.group_size(ref));
    const double day_ahead = linear_price(params, total) * bids[ref];

    const Eigen::MatrixXd sums = sample_group_sums(model, part, options.days, stream_seed(options.seed, 2 * p));
    Rng eps_rng = make_rng(options.seed, 2 * p + 1);
    std::normal_distribution<double> normal(0.0, 1.0);

    std::vector<double> path(options.days);
    for (std::size_t d = 0; d < options.days; ++d) {
      const auto row = static_cast<Eigen::Index>(d);
      const double eps = params.eps.mean + params.eps.stddev * normal(eps_rng);
      const double imbalance = eps + total - sums.row(row).sum();
      const double p_rt = imbalance > 0.0 ? params.pbar : 0.0;
      const double shortfall = bids[ref] - sums(row, static_cast<Eigen::Index>(ref));
      path[d] = (day_ahead - p_rt * shortfall) / size;
    }
    const double days = static_cast<double>(options.days);
    const double mean = std::accumulate(path.begin(), path.end(), 0.0) / days;
    double ss = 0.0;
    for (double v : path) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (days - 1.0));

    PathSummary s;
    s.n_groups = k_groups;
    s.reference_group_size = part.group_size(ref);
    s.bids = std::move(bids);
    s.total_bid = total;
    s.mean = mean;
    s.stddev = sd;
    s.std_error = sd / std::sqrt(days);
    if (options.keep_paths) s.path = std::move(path);
    out.push_back(std::move(s));
  }
  return out;
}

}  // namespace rencoal
