#pragma once

// Nash equilibrium bids of the group Cournot game.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "rencoal/market.hpp"
#include "rencoal/partition.hpp"
#include "rencoal/stochastic.hpp"

namespace rencoal {

enum class AsymmetricMethod {
  /// Nested bisection on the total bid: every group's best reply to a total X
  /// is monotone in X, so the fixed point sum_k w_k(X) = X is bracketed.
  aggregate_bisection,
  /// Damped simultaneous best-response iteration. With damping d the q = 0
  /// iteration contracts only when d < 4 / (K + 1).
  damped_best_response,
};

std::string to_string(AsymmetricMethod m);

struct SolverOptions {
  double symmetric_tolerance = 1e-10;  ///< |FOC| target for scalar roots
  double residual_tolerance = 1e-8;    ///< per-group FOC residual for asymmetric solves
  double step_tolerance = 1e-9;        ///< max bid change (best response)
  double damping = 0.5;                ///< best-response damping factor
  std::size_t max_iterations = 10000;  ///< outer best-response iterations
  AsymmetricMethod method = AsymmetricMethod::aggregate_bisection;
  /// Best-response starting bids; defaults to the q = 0 Cournot bids.
  std::optional<std::vector<double>> start;
};

struct SolverDiagnostics {
  std::size_t iterations = 0;
  double residual = 0.0;  ///< max per-group FOC residual
  bool converged = false;
  std::string method;
  std::vector<double> start;  ///< starting bids (iterative methods)
  bool price_clamped = false;
};

struct EquilibriumResult {
  Partition partition;
  std::vector<double> bids;
  double total_bid = 0.0;
  double clearing_price = 1.0;
  std::vector<double> group_profits;
  std::vector<double> per_producer_profit;  ///< group profit / group size
  SolverDiagnostics diagnostics;

  /// Total profit of all groups divided by N.
  double mean_producer_profit() const;
};

/// K equal groups of an exchangeable (gaussian_iid) model under the fixed
/// penalty: the common bid is the root of 1 - (K+1) alpha w - q Pr(S <= w).
EquilibriumResult solve_symmetric(const MarketParams& params, const ForecastModel& model,
                                  std::size_t n_groups, const SolverOptions& options = {});

/// Arbitrary partition under the fixed penalty. Non-convergence is reported in
/// the diagnostics, not thrown.
EquilibriumResult solve_asymmetric(const MarketParams& params, const ForecastModel& model,
                                   const Partition& partition, const SolverOptions& options = {});

/// K equal groups under real-time settlement: root of
/// 1 - alpha (K+1) w - pbar Pr(sum_i W_i / N - eps < K w).
EquilibriumResult solve_real_time(const MarketParams& params, const ForecastModel& model,
                                  std::size_t n_groups, const SolverOptions& options = {});

/// Group k's first-order condition 1 - 2 alpha w_k - alpha sum_{l != k} w_l
/// - q Pr(S_k <= w_k) at the given profile (fixed penalty).
double fixed_penalty_foc(const MarketParams& params, const GroupSumDistribution& group, double bid,
                         double others_total);

struct DeviationReport {
  std::vector<double> gains;            ///< best unilateral gain per group
  std::vector<double> best_deviations;  ///< bid achieving it per group
  double max_gain = 0.0;
  std::size_t worst_group = 0;
  bool certified = false;  ///< max_gain <= threshold
};

/// Scans every group's unilateral deviations over the grid {0, h, 2h, ...}
/// of [0, 1/alpha] (plus 1/alpha) and reports the largest profit gain.
///
/// Under real-time settlement groups are treated as price takers in the
/// real-time stage: the cap probability is held at its value for the given
/// profile, matching the first-order condition solve_real_time uses.
DeviationReport verify_equilibrium(const MarketParams& params, const ForecastModel& model,
                                   const Partition& partition, const std::vector<double>& bids,
                                   double grid_step, double threshold = 1e-6);

}  // namespace rencoal
