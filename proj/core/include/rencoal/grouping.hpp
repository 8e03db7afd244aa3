#pragma once

// Coalition construction: the greedy covariance-based grouping plus
// baseline partitions used as controls.

#include <cstddef>
#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "rencoal/partition.hpp"

namespace rencoal {

/// Empirical covariance of per-unit forecast errors.
struct CovarianceEstimate {
  Eigen::MatrixXd matrix;
  std::size_t sample_count = 0;
};

/// Unbiased (T - 1) covariance of the columns of a T x N error matrix.
/// Requires T >= 2.
CovarianceEstimate empirical_covariance(const Eigen::MatrixXd& errors);

struct GreedyOptions {
  /// Cap on group size; unset means unlimited, which is the algorithm as
  /// published. Exchangeable inputs then collapse into one large group.
  std::optional<std::size_t> max_group_size;
};

/// Greedy group construction.
///
/// Seeds group 1 with producer 1; each further seed is the unassigned producer
/// with the smallest covariance against the sum of all seeded producers. The
/// remaining producers are taken in ascending order and each joins the group
/// whose current sum it covaries least with. Ties go to the lowest index.
Partition greedy_partition(const CovarianceEstimate& cov, std::size_t n_groups,
                           const GreedyOptions& options = {});

enum class BaselineScheme { contiguous_equal, random };

/// contiguous_equal: blocks of N/K consecutive producers (requires K | N).
/// random: seeded uniform shuffle cut into blocks whose sizes differ by at most one.
Partition baseline_partition(std::size_t n_producers, std::size_t n_groups, BaselineScheme scheme,
                             std::uint64_t seed = 0);

/// 1^T C 1 over each group's indices, summed over groups.
double total_group_variance(const Eigen::MatrixXd& cov, const Partition& partition);

}  // namespace rencoal
