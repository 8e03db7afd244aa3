#include "rencoal/grouping.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "rencoal/errors.hpp"
#include "rencoal/rng.hpp"
#include "rencoal/stochastic.hpp"

namespace rencoal {

CovarianceEstimate empirical_covariance(const Eigen::MatrixXd& errors) {
  if (errors.rows() < 2) {
    detail::throw_invalid("empirical covariance: need T >= 2 observations, got " +
                          std::to_string(errors.rows()));
  }
  if (errors.cols() == 0) detail::throw_invalid("empirical covariance: no columns");
  return {sample_covariance(errors), static_cast<std::size_t>(errors.rows())};
}

Partition greedy_partition(const CovarianceEstimate& cov, std::size_t n_groups,
                           const GreedyOptions& options) {
  const Eigen::MatrixXd& c = cov.matrix;
  if (c.rows() != c.cols() || c.rows() == 0) {
    detail::throw_invalid("greedy partition: covariance must be a nonempty square matrix");
  }
  const auto n = static_cast<std::size_t>(c.rows());
  if (n_groups < 1) detail::throw_invalid("greedy partition: K must be at least 1");
  if (n_groups > n) {
    detail::throw_invalid("greedy partition: K=" + std::to_string(n_groups) + " exceeds N=" +
                          std::to_string(n));
  }
  const std::size_t cap = options.max_group_size.value_or(n);
  if (cap == 0 || cap * n_groups < n) {
    detail::throw_invalid("greedy partition: max group size " + std::to_string(cap) +
                          " cannot hold N=" + std::to_string(n) + " producers in K=" +
                          std::to_string(n_groups) + " groups");
  }

  auto at = [&](std::size_t i, std::size_t j) {
    return c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  };

  std::vector<std::vector<std::size_t>> groups(n_groups);
  std::vector<bool> assigned(n, false);
  // Running cov(W_i, sum over the seeded union) for every i.
  std::vector<double> union_cov(n, 0.0);
  auto take = [&](std::size_t i, std::size_t k) {
    groups[k].push_back(i);
    assigned[i] = true;
  };

  take(0, 0);
  for (std::size_t i = 0; i < n; ++i) union_cov[i] = at(i, 0);

  for (std::size_t k = 1; k < n_groups; ++k) {
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (assigned[i]) continue;
      if (best == n || union_cov[i] < union_cov[best]) best = i;
    }
    take(best, k);
    for (std::size_t i = 0; i < n; ++i) union_cov[i] += at(i, best);
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (assigned[i]) continue;
    std::size_t best = n_groups;
    double best_cov = 0.0;
    for (std::size_t k = 0; k < n_groups; ++k) {
      if (groups[k].size() >= cap) continue;
      double s = 0.0;
      for (std::size_t l : groups[k]) s += at(i, l);
      if (best == n_groups || s < best_cov) {
        best = k;
        best_cov = s;
      }
    }
    take(i, best);
  }
  return Partition(std::move(groups), n);
}

Partition baseline_partition(std::size_t n_producers, std::size_t n_groups, BaselineScheme scheme,
                             std::uint64_t seed) {
  if (scheme == BaselineScheme::contiguous_equal) {
    return Partition::equal_blocks(n_producers, n_groups);
  }
  if (n_groups == 0 || n_groups > n_producers) {
    detail::throw_invalid("baseline partition: K must be in [1, N]");
  }
  std::vector<std::size_t> order(n_producers);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = make_rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  const Partition blocks = Partition::near_equal_blocks(n_producers, n_groups);
  std::vector<std::vector<std::size_t>> groups(n_groups);
  for (std::size_t k = 0; k < n_groups; ++k) {
    for (std::size_t pos : blocks.group(k)) groups[k].push_back(order[pos]);
  }
  return Partition(std::move(groups), n_producers);
}

double total_group_variance(const Eigen::MatrixXd& cov, const Partition& partition) {
  double total = 0.0;
  for (const auto& g : partition.groups()) {
    for (std::size_t i : g) {
      for (std::size_t j : g) total += cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return total;
}

}  // namespace rencoal
