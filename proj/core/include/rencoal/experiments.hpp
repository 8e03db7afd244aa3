#pragma once

// Studies built on the solvers: group-count sweeps, the N^(2/3) scaling rule,
// aggregation standard-deviation curves and real-time profit sample paths.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rencoal/equilibrium.hpp"
#include "rencoal/grouping.hpp"
#include "rencoal/market.hpp"
#include "rencoal/partition.hpp"
#include "rencoal/stochastic.hpp"

namespace rencoal {

enum class PartitionSource { symmetric, greedy, baseline };

std::string to_string(PartitionSource s);
PartitionSource parse_partition_source(const std::string& text);

struct SweepSpec {
  ForecastModel model;
  MarketParams params;
  std::vector<std::size_t> k_list{};
  PartitionSource source = PartitionSource::symmetric;
  std::uint64_t seed = 0;
  BaselineScheme baseline = BaselineScheme::random;
  GreedyOptions greedy{};
  /// Greedy input; defaults to the model covariance.
  std::optional<CovarianceEstimate> covariance{};
  SolverOptions solver{};
  std::size_t threads = 0;  ///< 0 = hardware concurrency
};

struct SweepRow {
  std::size_t k = 0;
  double total_bid = 0.0;
  double clearing_price = 0.0;
  double per_producer_profit = 0.0;  ///< total group profit / N
  bool converged = false;
  double residual = 0.0;

  friend bool operator==(const SweepRow&, const SweepRow&) = default;
};

/// One row per distinct K, ascending. Real-time settlement uses
/// solve_real_time; otherwise the partition source picks the solver.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// All divisors of n, ascending.
std::vector<std::size_t> divisors(std::size_t n);

/// About `points` log-spaced group counts in [1, n], always including 1 and n.
std::vector<std::size_t> log_grid(std::size_t n, std::size_t points = 20);

enum class ScalingRule { two_thirds, individual, grand_coalition };

/// ceil(n^(2/3)) computed exactly, n for individual, 1 for the grand coalition.
std::size_t groups_for(std::size_t n, ScalingRule rule);

struct ScalingRow {
  std::size_t n = 0;
  std::size_t k = 0;
  double total_bid = 0.0;
  double gap = 0.0;  ///< 1/alpha - total_bid
  bool converged = false;
};

using ModelFamily = std::function<ForecastModel(std::size_t)>;

/// Equilibrium total bid along N under a group-count rule. Equal groups of an
/// exchangeable model use solve_symmetric; otherwise near-equal contiguous
/// groups are solved with solve_asymmetric.
std::vector<ScalingRow> scaling_study(const std::vector<std::size_t>& n_list,
                                      const MarketParams& params, const ModelFamily& family,
                                      ScalingRule rule = ScalingRule::two_thirds,
                                      const SolverOptions& solver = {});

struct AggregationPoint {
  std::size_t n = 0;
  double stddev = 0.0;
};

/// Standard deviation of the capacity-weighted aggregate of the first n
/// producers (in `order`), normalized by their total capacity. `values` is
/// T x N per-unit (per own capacity); empty `capacities` means equal capacity.
std::vector<AggregationPoint> aggregation_std_curve(const Eigen::MatrixXd& values,
                                                    const std::vector<std::size_t>& order = {},
                                                    const std::vector<double>& capacities = {});

/// Analytic version: sqrt(1^T C_n 1) / n for the first n producers in `order`.
std::vector<AggregationPoint> aggregation_std_curve(const ForecastModel& model,
                                                    const std::vector<std::size_t>& order = {});

enum class BidPolicy {
  equilibrium,   ///< each partition's real-time equilibrium bids
  common_total,  ///< every partition bids the same total, split by group size
};

struct PathStudyOptions {
  std::size_t days = 365;
  std::uint64_t seed = 0;
  BidPolicy policy = BidPolicy::equilibrium;
  /// Total bid for common_total; defaults to the first partition's equilibrium total.
  std::optional<double> common_total;
  bool keep_paths = false;
};

struct PathSummary {
  std::size_t n_groups = 0;
  std::size_t reference_group_size = 0;
  std::vector<double> bids;
  double total_bid = 0.0;
  double mean = 0.0;       ///< mean realized per-producer profit
  double stddev = 0.0;     ///< day-to-day standard deviation
  double std_error = 0.0;  ///< stddev / sqrt(days)
  std::vector<double> path;
};

/// Simulates independent days at fixed bids and reports the realized
/// per-producer profit of the group containing producer 1. Partitions must be
/// equal-sized and the model exchangeable (real-time equilibria are symmetric).
std::vector<PathSummary> sample_path_study(const MarketParams& params, const ForecastModel& model,
                                           const std::vector<Partition>& partitions,
                                           const PathStudyOptions& options = {});

}  // namespace rencoal
