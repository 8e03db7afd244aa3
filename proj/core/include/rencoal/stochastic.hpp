#pragma once

// Producer output models. Every producer i has a per-unit output W_i
// (fraction of total demand before scaling); its delivered output is W_i / N,
// so a group S delivers (1/N) * sum_{i in S} W_i.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rencoal/partition.hpp"

namespace rencoal {

enum class ModelKind { gaussian_iid, gaussian_correlated, empirical };

std::string to_string(ModelKind kind);

/// Joint distribution of producer outputs W_1..W_N.
class ForecastModel {
 public:
  /// Default per-producer standard deviation as a fraction of the mean.
  static constexpr double kDefaultRelativeStddev = 0.25;

  /// Independent N(mean, stddev^2) outputs.
  static ForecastModel gaussian_iid(std::size_t n_producers, double mean, double stddev);

  /// Jointly Gaussian outputs. The covariance must be symmetric to 1e-9 with no
  /// eigenvalue below -1e-9; eigenvalues in [-1e-9, 0) are clipped to zero.
  static ForecastModel gaussian_correlated(Eigen::VectorXd mean, Eigen::MatrixXd covariance);

  /// Historical per-unit output realizations, one row per observation
  /// (T >= 2) and one column per producer.
  static ForecastModel empirical(Eigen::MatrixXd samples);

  ModelKind kind() const { return kind_; }
  std::size_t n_producers() const { return n_; }

  /// Only the i.i.d. model is treated as exchangeable across a partition.
  bool is_exchangeable() const { return kind_ == ModelKind::gaussian_iid; }
  bool is_gaussian() const { return kind_ != ModelKind::empirical; }

  /// i.i.d. scalar parameters; valid only for gaussian_iid.
  double iid_mean() const;
  double iid_stddev() const;

  /// Per-producer means (expanded on demand for gaussian_iid).
  Eigen::VectorXd mean_vector() const;
  /// Per-producer covariance (expanded on demand for gaussian_iid).
  Eigen::MatrixXd covariance() const;
  /// Empirical sample matrix (T x N); empty for Gaussian kinds.
  const Eigen::MatrixXd& samples() const { return samples_; }

  /// Mean and variance of the group's delivered output (1/N) sum W_i.
  double group_mean(std::span<const std::size_t> group) const;
  double group_variance(std::span<const std::size_t> group) const;

  /// Human-readable notes for producers whose Gaussian output has
  /// stddev > mean / 3 (non-negligible mass below zero).
  std::vector<std::string> warnings() const;

  /// Factor F with F F^T equal to the clipped covariance (gaussian_correlated).
  const Eigen::MatrixXd& covariance_factor() const { return factor_; }

 private:
  ForecastModel() = default;

  void check_group(std::span<const std::size_t> group) const;

  ModelKind kind_ = ModelKind::gaussian_iid;
  std::size_t n_ = 0;
  double iid_mean_ = 0.0;
  double iid_stddev_ = 0.0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Eigen::MatrixXd factor_;
  Eigen::MatrixXd samples_;
};

enum class DistributionSource { analytic, monte_carlo, empirical };

/// Distribution of one group's delivered output.
///
/// Analytic sources are Gaussian. Sample-backed sources keep the sorted values
/// and evaluate Pr(S <= w) with the <= convention at each order statistic and
/// linear interpolation between consecutive order statistics.
class GroupSumDistribution {
 public:
  static GroupSumDistribution gaussian(double mean, double stddev);
  static GroupSumDistribution from_samples(std::vector<double> values, DistributionSource source,
                                           std::uint64_t seed = 0);

  double mean() const { return mean_; }
  double stddev() const { return stddev_; }
  DistributionSource source() const { return source_; }
  bool is_analytic() const { return source_ == DistributionSource::analytic; }
  std::size_t sample_count() const { return sorted_ ? sorted_->size() : 0; }
  std::uint64_t seed() const { return seed_; }
  std::span<const double> sorted_samples() const;

  /// Pr(group output <= w); nondecreasing with values in [0, 1].
  double cdf(double w) const;

  /// E[(w - S)^+], the expected shortfall below the bid w.
  double expected_shortfall(double w) const;

  /// Standard error of the sample-average shortfall at w (0 for analytic).
  double expected_shortfall_std_error(double w) const;

 private:
  GroupSumDistribution() = default;

  double mean_ = 0.0;
  double stddev_ = 0.0;
  DistributionSource source_ = DistributionSource::analytic;
  std::uint64_t seed_ = 0;
  std::shared_ptr<const std::vector<double>> sorted_;
  std::shared_ptr<const std::vector<double>> prefix_;  // prefix_[m] = sum of m smallest
};

/// Distribution of (1/N) sum_{i in group} W_i. Exact for Gaussian kinds;
/// the empirical distribution of group row sums for empirical models.
GroupSumDistribution group_sum(const ForecastModel& model, std::span<const std::size_t> group);

/// Sample-backed estimate of the same distribution from `samples` draws.
GroupSumDistribution group_sum_monte_carlo(const ForecastModel& model,
                                           std::span<const std::size_t> group,
                                           std::size_t samples, std::uint64_t seed);

/// count x N matrix of per-unit outputs W (not divided by N). Empirical
/// models resample rows with replacement. Deterministic given the seed.
Eigen::MatrixXd sample_outputs(const ForecastModel& model, std::size_t count, std::uint64_t seed);

/// count x K matrix of group delivered outputs (1/N) sum_{i in S_k} W_i
/// drawn jointly. Deterministic given the seed.
Eigen::MatrixXd sample_group_sums(const ForecastModel& model, const Partition& partition,
                                  std::size_t count, std::uint64_t seed);

/// Unbiased (T-1) sample covariance of the columns of `data`.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& data);

}  // namespace rencoal
