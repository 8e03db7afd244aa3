#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <set>

#include "rencoal/errors.hpp"
#include "rencoal/grouping.hpp"

using namespace rencoal;

namespace {

CovarianceEstimate wrap(const Eigen::MatrixXd& m) { return {m, 100}; }

/// B blocks of `size` producers; within a block outputs are +f or -f
/// alternately, blocks independent.
Eigen::MatrixXd anti_correlated_blocks(std::size_t blocks, std::size_t size) {
  const auto n = static_cast<Eigen::Index>(blocks * size);
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      if (i / static_cast<Eigen::Index>(size) == j / static_cast<Eigen::Index>(size))
        c(i, j) = ((i + j) % 2 == 0) ? 1.0 : -1.0;
  return c;
}

void expect_valid(const Partition& p, std::size_t n, std::size_t k) {
  ASSERT_EQ(p.n_groups(), k);
  std::set<std::size_t> seen;
  for (const auto& g : p.groups()) {
    EXPECT_FALSE(g.empty());
    for (auto i : g) EXPECT_TRUE(seen.insert(i).second);
  }
  EXPECT_EQ(seen.size(), n);
  EXPECT_EQ(*seen.rbegin(), n - 1);
}

}  // namespace

TEST(Greedy, TwoProducersTwoGroups) {
  const auto p = greedy_partition(wrap(Eigen::MatrixXd::Identity(2, 2)), 2);
  EXPECT_EQ(p.to_text(), "1\n2\n");
}

TEST(Greedy, AntiCorrelatedPairsHandTrace) {
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(4, 4);
  c(0, 1) = c(1, 0) = -1.0;
  c(2, 3) = c(3, 2) = -1.0;
  EXPECT_EQ(greedy_partition(wrap(c), 2).to_text(), "1,3,4\n2\n");
}

TEST(Greedy, IdentityCollapsesIntoFirstGroup) {
  EXPECT_EQ(greedy_partition(wrap(Eigen::MatrixXd::Identity(6, 6)), 3).to_text(), "1,4,5,6\n2\n3\n");
}

TEST(Greedy, SizeCapBalancesExchangeableInput) {
  GreedyOptions opts;
  opts.max_group_size = 2;
  const auto p = greedy_partition(wrap(Eigen::MatrixXd::Identity(6, 6)), 3, opts);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(p.group_size(k), 2u);
}

TEST(Greedy, Errors) {
  const auto c = wrap(Eigen::MatrixXd::Identity(3, 3));
  EXPECT_THROW(greedy_partition(c, 0), InvalidArgument);
  EXPECT_THROW(greedy_partition(c, 4), InvalidArgument);
  GreedyOptions tight;
  tight.max_group_size = 1;
  EXPECT_THROW(greedy_partition(c, 2, tight), InvalidArgument);
}

TEST(Greedy, AlwaysValidAndScaleInvariant) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> z;
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 5 + trial % 20;
    Eigen::MatrixXd a(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) a(i, j) = z(rng);
    const Eigen::MatrixXd c = a * a.transpose();
    const std::size_t k = 1 + static_cast<std::size_t>(trial) % static_cast<std::size_t>(n);
    const auto p = greedy_partition(wrap(c), k);
    expect_valid(p, static_cast<std::size_t>(n), k);
    EXPECT_EQ(p, greedy_partition(wrap(c), k));
    EXPECT_EQ(p, greedy_partition(wrap(c * 7.25), k));
  }
}

TEST(Greedy, BeatsRandomOnAntiCorrelatedBlocks) {
  const auto c = anti_correlated_blocks(4, 10);
  const auto greedy = greedy_partition(wrap(c), 4);
  const double greedy_var = total_group_variance(c, greedy);
  std::vector<double> random;
  for (std::uint64_t seed = 0; seed < 100; ++seed)
    random.push_back(total_group_variance(c, baseline_partition(40, 4, BaselineScheme::random, seed)));
  std::nth_element(random.begin(), random.begin() + 50, random.end());
  EXPECT_LT(greedy_var, random[50]);
}

TEST(EmpiricalCovariance, Examples) {
  Eigen::MatrixXd constant = Eigen::MatrixXd::Constant(5, 3, 2.5);
  EXPECT_TRUE(empirical_covariance(constant).matrix.isZero(0.0));

  Eigen::MatrixXd same(4, 2);
  same << 1, 1, 2, 2, 4, 4, 7, 7;
  const auto cs = empirical_covariance(same);
  const double v = (std::pow(1 - 3.5, 2) + std::pow(2 - 3.5, 2) + std::pow(4 - 3.5, 2) + std::pow(7 - 3.5, 2)) / 3;
  EXPECT_NEAR(cs.matrix(0, 0), v, 1e-14);
  EXPECT_NEAR(cs.matrix(0, 1), v, 1e-14);
  EXPECT_NEAR(cs.matrix(1, 1), v, 1e-14);
  EXPECT_EQ(cs.sample_count, 4u);

  Eigen::MatrixXd xy(3, 2);
  xy << 0, 2, 1, 1, 2, 0;
  EXPECT_NEAR(empirical_covariance(xy).matrix(0, 1), -1.0, 1e-15);

  EXPECT_THROW(empirical_covariance(Eigen::MatrixXd::Zero(1, 3)), InvalidArgument);
}

TEST(EmpiricalCovariance, SymmetricWithNonnegativeDiagonal) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z;
  Eigen::MatrixXd e(30, 6);
  for (Eigen::Index i = 0; i < e.size(); ++i) e.data()[i] = z(rng);
  const auto c = empirical_covariance(e).matrix;
  EXPECT_TRUE(c.isApprox(c.transpose(), 0.0) || (c - c.transpose()).cwiseAbs().maxCoeff() < 1e-15);
  EXPECT_TRUE((c.diagonal().array() >= 0.0).all());
}

TEST(Baseline, ContiguousBlocks) {
  EXPECT_EQ(baseline_partition(6, 3, BaselineScheme::contiguous_equal).to_text(), "1,2\n3,4\n5,6\n");
  EXPECT_THROW(baseline_partition(7, 3, BaselineScheme::contiguous_equal), InvalidArgument);
}

TEST(Baseline, RandomIsSeededAndNearEqual) {
  const auto a = baseline_partition(23, 5, BaselineScheme::random, 9);
  expect_valid(a, 23, 5);
  EXPECT_EQ(a, baseline_partition(23, 5, BaselineScheme::random, 9));
  EXPECT_NE(a, baseline_partition(23, 5, BaselineScheme::random, 10));
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_GE(a.group_size(k), 4u);
    EXPECT_LE(a.group_size(k), 5u);
  }
}

TEST(PartitionText, RoundTripAndErrors) {
  const auto p = Partition::parse("2,5\n1,3\n4\n");
  EXPECT_EQ(p.n_producers(), 5u);
  EXPECT_EQ(p.group_of(4), 0u);
  EXPECT_EQ(Partition::parse(p.to_text()), p);
  EXPECT_THROW(Partition::parse("1,2\n2,3\n"), DataError);
  EXPECT_THROW(Partition::parse("1,3\n"), DataError);
  EXPECT_THROW(Partition::parse("1,x\n"), DataError);
}
