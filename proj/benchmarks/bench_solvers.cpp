#include <benchmark/benchmark.h>

#include <random>

#include "rencoal/equilibrium.hpp"
#include "rencoal/experiments.hpp"
#include "rencoal/grouping.hpp"
#include "rencoal/normal.hpp"

using namespace rencoal;

namespace {

MarketParams penalty_market() {
  MarketParams p;
  p.alpha = 3.4;
  p.q = 1.0;
  return p;
}

ForecastModel correlated_model(Eigen::Index n, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = 0.05 * u(rng);
  return ForecastModel::gaussian_correlated(Eigen::VectorXd::Constant(n, 0.3), a * a.transpose());
}

void BM_GaussianShortfall(benchmark::State& state) {
  double w = 0.2;
  for (auto _ : state) {
    benchmark::DoNotOptimize(gaussian_expected_shortfall(0.3, 0.05, w));
    w += 1e-9;
  }
}
BENCHMARK(BM_GaussianShortfall);

void BM_EmpiricalShortfall(benchmark::State& state) {
  const auto model = ForecastModel::gaussian_iid(10, 0.3, 0.075);
  const std::vector<std::size_t> group{0, 1, 2, 3, 4};
  const auto dist = group_sum_monte_carlo(model, group, static_cast<std::size_t>(state.range(0)), 1);
  for (auto _ : state) benchmark::DoNotOptimize(dist.expected_shortfall(0.14));
}
BENCHMARK(BM_EmpiricalShortfall)->Arg(1000)->Arg(100000);

void BM_SolveSymmetric(benchmark::State& state) {
  const auto model = ForecastModel::gaussian_iid(1000, 0.3, 0.075);
  const auto k = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(solve_symmetric(penalty_market(), model, k).total_bid);
}
BENCHMARK(BM_SolveSymmetric)->Arg(1)->Arg(20)->Arg(1000);

void BM_SolveAsymmetric(benchmark::State& state) {
  const auto n = state.range(0);
  const auto model = correlated_model(n, 3);
  const auto partition = Partition::near_equal_blocks(static_cast<std::size_t>(n), static_cast<std::size_t>(n / 4));
  for (auto _ : state) benchmark::DoNotOptimize(solve_asymmetric(penalty_market(), model, partition).total_bid);
}
BENCHMARK(BM_SolveAsymmetric)->Arg(40)->Arg(200);

void BM_GreedyPartition(benchmark::State& state) {
  const auto n = state.range(0);
  const CovarianceEstimate cov{correlated_model(n, 5).covariance(), 1000};
  for (auto _ : state) benchmark::DoNotOptimize(greedy_partition(cov, static_cast<std::size_t>(n / 10)));
}
BENCHMARK(BM_GreedyPartition)->Arg(100)->Arg(300);

void BM_SweepDivisors(benchmark::State& state) {
  SweepSpec spec{.model = ForecastModel::gaussian_iid(1000, 0.3, 0.075), .params = penalty_market(),
                 .k_list = divisors(1000)};
  spec.threads = 1;
  for (auto _ : state) benchmark::DoNotOptimize(run_sweep(spec).size());
}
BENCHMARK(BM_SweepDivisors)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
