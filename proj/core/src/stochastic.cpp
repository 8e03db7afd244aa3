#include "rencoal/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rencoal/errors.hpp"
#include "rencoal/normal.hpp"
#include "rencoal/rng.hpp"

namespace rencoal {

namespace {

constexpr double kSymmetryTolerance = 1e-9;
constexpr double kEigenTolerance = 1e-9;

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::gaussian_iid:
      return "gaussian_iid";
    case ModelKind::gaussian_correlated:
      return "gaussian_correlated";
    case ModelKind::empirical:
      return "empirical";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// ForecastModel

ForecastModel ForecastModel::gaussian_iid(std::size_t n_producers, double mean, double stddev) {
  if (n_producers == 0) detail::throw_invalid("forecast model: N must be positive");
  if (!std::isfinite(mean) || !std::isfinite(stddev) || stddev < 0.0) {
    detail::throw_invalid("forecast model: mean must be finite and stddev nonnegative");
  }
  ForecastModel m;
  m.kind_ = ModelKind::gaussian_iid;
  m.n_ = n_producers;
  m.iid_mean_ = mean;
  m.iid_stddev_ = stddev;
  return m;
}

ForecastModel ForecastModel::gaussian_correlated(Eigen::VectorXd mean, Eigen::MatrixXd covariance) {
  const auto n = mean.size();
  if (n == 0) detail::throw_invalid("forecast model: N must be positive");
  if (covariance.rows() != n || covariance.cols() != n) {
    detail::throw_invalid("forecast model: covariance must be " + std::to_string(n) + "x" +
                          std::to_string(n));
  }
  if (!mean.allFinite() || !covariance.allFinite()) {
    detail::throw_data("forecast model: non-finite mean or covariance entry");
  }
  const double asym = (covariance - covariance.transpose()).cwiseAbs().maxCoeff();
  if (asym > kSymmetryTolerance) {
    detail::throw_data("forecast model: covariance is not symmetric (max |C - C^T| = " +
                       fmt_double(asym) + ")");
  }
  Eigen::MatrixXd sym = 0.5 * (covariance + covariance.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("forecast model: covariance eigendecomposition failed");
  }
  Eigen::VectorXd values = eig.eigenvalues();
  if (values.minCoeff() < -kEigenTolerance) {
    throw NumericalError("forecast model: covariance is not positive semidefinite (eigenvalue " +
                         fmt_double(values.minCoeff()) + ")");
  }
  values = values.cwiseMax(0.0);

  ForecastModel m;
  m.kind_ = ModelKind::gaussian_correlated;
  m.n_ = static_cast<std::size_t>(n);
  m.mean_ = std::move(mean);
  m.cov_ = std::move(sym);
  m.factor_ = eig.eigenvectors() * values.cwiseSqrt().asDiagonal();
  return m;
}

ForecastModel ForecastModel::empirical(Eigen::MatrixXd samples) {
  if (samples.cols() == 0) detail::throw_invalid("forecast model: N must be positive");
  if (samples.rows() < 2) detail::throw_invalid("forecast model: empirical model needs T >= 2 rows");
  if (!samples.allFinite()) detail::throw_data("forecast model: non-finite sample entry");
  ForecastModel m;
  m.kind_ = ModelKind::empirical;
  m.n_ = static_cast<std::size_t>(samples.cols());
  m.mean_ = samples.colwise().mean().transpose();
  m.cov_ = sample_covariance(samples);
  m.samples_ = std::move(samples);
  return m;
}

double ForecastModel::iid_mean() const {
  if (kind_ != ModelKind::gaussian_iid) detail::throw_invalid("forecast model is not gaussian_iid");
  return iid_mean_;
}

double ForecastModel::iid_stddev() const {
  if (kind_ != ModelKind::gaussian_iid) detail::throw_invalid("forecast model is not gaussian_iid");
  return iid_stddev_;
}

Eigen::VectorXd ForecastModel::mean_vector() const {
  if (kind_ == ModelKind::gaussian_iid) {
    return Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n_), iid_mean_);
  }
  return mean_;
}

Eigen::MatrixXd ForecastModel::covariance() const {
  if (kind_ == ModelKind::gaussian_iid) {
    const auto n = static_cast<Eigen::Index>(n_);
    return Eigen::MatrixXd::Identity(n, n) * (iid_stddev_ * iid_stddev_);
  }
  return cov_;
}

void ForecastModel::check_group(std::span<const std::size_t> group) const {
  if (group.empty()) detail::throw_invalid("group is empty");
  for (std::size_t i : group) {
    if (i >= n_) {
      detail::throw_invalid("producer index " + std::to_string(i + 1) + " out of range 1.." +
                            std::to_string(n_));
    }
  }
}

double ForecastModel::group_mean(std::span<const std::size_t> group) const {
  check_group(group);
  const double n = static_cast<double>(n_);
  if (kind_ == ModelKind::gaussian_iid) return static_cast<double>(group.size()) * iid_mean_ / n;
  double sum = 0.0;
  for (std::size_t i : group) sum += mean_(static_cast<Eigen::Index>(i));
  return sum / n;
}

double ForecastModel::group_variance(std::span<const std::size_t> group) const {
  check_group(group);
  const double n = static_cast<double>(n_);
  if (kind_ == ModelKind::gaussian_iid) {
    return static_cast<double>(group.size()) * iid_stddev_ * iid_stddev_ / (n * n);
  }
  double sum = 0.0;
  for (std::size_t i : group) {
    for (std::size_t j : group) sum += cov_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  return std::max(sum, 0.0) / (n * n);
}

std::vector<std::string> ForecastModel::warnings() const {
  std::vector<std::string> out;
  if (kind_ == ModelKind::empirical) return out;
  if (kind_ == ModelKind::gaussian_iid) {
    if (iid_stddev_ > iid_mean_ / 3.0) {
      out.push_back("producer stddev " + fmt_double(iid_stddev_) + " exceeds mean/3 = " +
                    fmt_double(iid_mean_ / 3.0) +
                    "; the Gaussian output model puts non-negligible mass below zero");
    }
    return out;
  }
  std::size_t flagged = 0;
  for (Eigen::Index i = 0; i < mean_.size(); ++i) {
    const double sd = std::sqrt(std::max(cov_(i, i), 0.0));
    if (sd > mean_(i) / 3.0) {
      if (++flagged <= 5) {
        out.push_back("producer " + std::to_string(i + 1) + " stddev " + fmt_double(sd) +
                      " exceeds mean/3 = " + fmt_double(mean_(i) / 3.0));
      }
    }
  }
  if (flagged > 5) out.push_back(std::to_string(flagged - 5) + " more producers with stddev > mean/3");
  return out;
}

// ---------------------------------------------------------------------------
// GroupSumDistribution

GroupSumDistribution GroupSumDistribution::gaussian(double mean, double stddev) {
  if (!std::isfinite(mean) || !std::isfinite(stddev) || stddev < 0.0) {
    detail::throw_invalid("group sum: mean must be finite and stddev nonnegative");
  }
  GroupSumDistribution d;
  d.mean_ = mean;
  d.stddev_ = stddev;
  d.source_ = DistributionSource::analytic;
  return d;
}

GroupSumDistribution GroupSumDistribution::from_samples(std::vector<double> values,
                                                        DistributionSource source,
                                                        std::uint64_t seed) {
  if (values.empty()) detail::throw_invalid("group sum: no samples");
  if (source == DistributionSource::analytic) {
    detail::throw_invalid("group sum: sample-backed distribution cannot be analytic");
  }
  std::sort(values.begin(), values.end());
  std::vector<double> prefix(values.size() + 1, 0.0);
  std::partial_sum(values.begin(), values.end(), prefix.begin() + 1);

  const double n = static_cast<double>(values.size());
  const double mean = prefix.back() / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);

  GroupSumDistribution d;
  d.mean_ = mean;
  d.stddev_ = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  d.source_ = source;
  d.seed_ = seed;
  d.sorted_ = std::make_shared<const std::vector<double>>(std::move(values));
  d.prefix_ = std::make_shared<const std::vector<double>>(std::move(prefix));
  return d;
}

std::span<const double> GroupSumDistribution::sorted_samples() const {
  if (!sorted_) return {};
  return {sorted_->data(), sorted_->size()};
}

double GroupSumDistribution::cdf(double w) const {
  if (is_analytic()) return gaussian_cdf(mean_, stddev_, w);
  const auto& x = *sorted_;
  const std::size_t n = x.size();
  const auto m = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), w) - x.begin());
  if (m == 0) return 0.0;
  if (m == n) return 1.0;
  const double lo = x[m - 1];
  const double hi = x[m];
  const double frac = (w - lo) / (hi - lo);
  return (static_cast<double>(m) + frac) / static_cast<double>(n);
}

double GroupSumDistribution::expected_shortfall(double w) const {
  if (is_analytic()) return gaussian_expected_shortfall(mean_, stddev_, w);
  const auto& x = *sorted_;
  const auto m = static_cast<std::size_t>(std::upper_bound(x.begin(), x.end(), w) - x.begin());
  const double total = static_cast<double>(m) * w - (*prefix_)[m];
  return std::max(total, 0.0) / static_cast<double>(x.size());
}

double GroupSumDistribution::expected_shortfall_std_error(double w) const {
  if (is_analytic()) return 0.0;
  const auto& x = *sorted_;
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return 0.0;
  const double mean = expected_shortfall(w);
  double ss = 0.0;
  for (double v : x) {
    const double s = v < w ? w - v : 0.0;
    ss += (s - mean) * (s - mean);
  }
  return std::sqrt(ss / (n - 1.0) / n);
}

// ---------------------------------------------------------------------------
// Free functions

GroupSumDistribution group_sum(const ForecastModel& model, std::span<const std::size_t> group) {
  const double mean = model.group_mean(group);  // validates the group
  if (model.is_gaussian()) {
    return GroupSumDistribution::gaussian(mean, std::sqrt(model.group_variance(group)));
  }
  const auto& s = model.samples();
  const double n = static_cast<double>(model.n_producers());
  std::vector<double> sums(static_cast<std::size_t>(s.rows()), 0.0);
  for (Eigen::Index t = 0; t < s.rows(); ++t) {
    double acc = 0.0;
    for (std::size_t i : group) acc += s(t, static_cast<Eigen::Index>(i));
    sums[static_cast<std::size_t>(t)] = acc / n;
  }
  return GroupSumDistribution::from_samples(std::move(sums), DistributionSource::empirical);
}

GroupSumDistribution group_sum_monte_carlo(const ForecastModel& model,
                                           std::span<const std::size_t> group,
                                           std::size_t samples, std::uint64_t seed) {
  if (samples == 0) detail::throw_invalid("group sum: sample count must be positive");
  const double mean = model.group_mean(group);
  Rng rng = make_rng(seed);
  std::vector<double> values(samples);
  if (model.is_gaussian()) {
    const double sd = std::sqrt(model.group_variance(group));
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : values) v = mean + sd * normal(rng);
  } else {
    const auto& s = model.samples();
    const double n = static_cast<double>(model.n_producers());
    std::uniform_int_distribution<Eigen::Index> row(0, s.rows() - 1);
    for (auto& v : values) {
      const Eigen::Index t = row(rng);
      double acc = 0.0;
      for (std::size_t i : group) acc += s(t, static_cast<Eigen::Index>(i));
      v = acc / n;
    }
  }
  return GroupSumDistribution::from_samples(std::move(values), DistributionSource::monte_carlo, seed);
}

Eigen::MatrixXd sample_outputs(const ForecastModel& model, std::size_t count, std::uint64_t seed) {
  if (count == 0) detail::throw_invalid("sample_outputs: count must be positive");
  const auto n = static_cast<Eigen::Index>(model.n_producers());
  const auto rows = static_cast<Eigen::Index>(count);
  Rng rng = make_rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(rows, n);

  switch (model.kind()) {
    case ModelKind::gaussian_iid: {
      const double mu = model.iid_mean();
      const double sd = model.iid_stddev();
      for (Eigen::Index t = 0; t < rows; ++t) {
        for (Eigen::Index i = 0; i < n; ++i) out(t, i) = mu + sd * normal(rng);
      }
      break;
    }
    case ModelKind::gaussian_correlated: {
      const Eigen::VectorXd mean = model.mean_vector();
      const Eigen::MatrixXd& factor = model.covariance_factor();
      Eigen::VectorXd z(n);
      for (Eigen::Index t = 0; t < rows; ++t) {
        for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
        out.row(t) = (mean + factor * z).transpose();
      }
      break;
    }
    case ModelKind::empirical: {
      const auto& s = model.samples();
      std::uniform_int_distribution<Eigen::Index> row(0, s.rows() - 1);
      for (Eigen::Index t = 0; t < rows; ++t) out.row(t) = s.row(row(rng));
      break;
    }
  }
  return out;
}

Eigen::MatrixXd sample_group_sums(const ForecastModel& model, const Partition& partition,
                                  std::size_t count, std::uint64_t seed) {
  if (count == 0) detail::throw_invalid("sample_group_sums: count must be positive");
  if (partition.n_producers() != model.n_producers()) {
    detail::throw_invalid("sample_group_sums: partition covers " +
                          std::to_string(partition.n_producers()) + " producers, model has " +
                          std::to_string(model.n_producers()));
  }
  const auto k_groups = static_cast<Eigen::Index>(partition.n_groups());
  const auto rows = static_cast<Eigen::Index>(count);
  Eigen::MatrixXd out(rows, k_groups);

  if (model.kind() == ModelKind::gaussian_iid) {
    // Group sums of independent producers are independent Gaussians.
    std::vector<double> means(partition.n_groups());
    std::vector<double> sds(partition.n_groups());
    for (std::size_t k = 0; k < partition.n_groups(); ++k) {
      means[k] = model.group_mean(partition.group(k));
      sds[k] = std::sqrt(model.group_variance(partition.group(k)));
    }
    Rng rng = make_rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index t = 0; t < rows; ++t) {
      for (Eigen::Index k = 0; k < k_groups; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        out(t, k) = means[kk] + sds[kk] * normal(rng);
      }
    }
    return out;
  }

  const Eigen::MatrixXd w = sample_outputs(model, count, seed);
  const double n = static_cast<double>(model.n_producers());
  for (Eigen::Index k = 0; k < k_groups; ++k) {
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(rows);
    for (std::size_t i : partition.group(static_cast<std::size_t>(k))) {
      acc += w.col(static_cast<Eigen::Index>(i));
    }
    out.col(k) = acc / n;
  }
  return out;
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& data) {
  if (data.rows() < 2) detail::throw_invalid("sample covariance: need at least 2 observations");
  const Eigen::RowVectorXd means = data.colwise().mean();
  const Eigen::MatrixXd centered = data.rowwise() - means;
  Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(data.rows() - 1);
  return 0.5 * (cov + cov.transpose());
}

}  // namespace rencoal
