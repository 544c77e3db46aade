#include <vector>

#include <benchmark/benchmark.h>

#include "covfield/estimators.hpp"
#include "covfield/geometry.hpp"
#include "covfield/lrsp.hpp"
#include "covfield/posterior.hpp"
#include "covfield/precond.hpp"

namespace {

using namespace covfield;

void BM_Fit(benchmark::State& state) {
  const auto x = generate_gaussian_cloud(static_cast<std::size_t>(state.range(0)), 3, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit(x, {1.0, 1.0, 0.0}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Fit)->RangeMultiplier(2)->Range(64, 512)->Complexity(benchmark::oNCubed);

void BM_PosteriorCovPointwise(benchmark::State& state) {
  const auto s = generate_gaussian_cloud(static_cast<std::size_t>(state.range(0)), 3, 2);
  const auto m = fit(s, {1.0, 1.0, 0.0});
  const auto q = generate_gaussian_cloud(2, 3, 3);
  for (auto _ : state) benchmark::DoNotOptimize(posterior_cov(m, q[0], q[1]));
}
BENCHMARK(BM_PosteriorCovPointwise)->RangeMultiplier(4)->Range(16, 256);

void BM_PosteriorCovMatrix(benchmark::State& state) {
  const auto m = fit(preset_observations(Preset::Uniform1d), {0.1, 1.0, 0.0});
  const auto grid = equispaced(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(posterior_cov_matrix(m, grid, grid));
}
BENCHMARK(BM_PosteriorCovMatrix)->Arg(101)->Arg(1001);

// The geometric estimators cost O(r) per query.
void BM_GSmall(benchmark::State& state) {
  const auto s = equispaced(static_cast<std::size_t>(state.range(0)));
  const double x[] = {0.123};
  const double y[] = {0.456};
  for (auto _ : state) benchmark::DoNotOptimize(g_small(x, y, s, {0.1, 1.0, 0.0}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_GSmall)->RangeMultiplier(4)->Range(16, 4096)->Complexity(benchmark::oN);

void BM_SparseCorrection(benchmark::State& state) {
  const auto x = generate_gaussian_cloud(1000, 3, 42);
  const auto perm = random_permutation(x.size(), 42);
  const std::vector<std::size_t> lm(perm.begin(), perm.begin() + 100);
  const auto f = nystrom_build(x, lm, {0.5, 1.0, 0.0});
  const auto pattern = pattern_by_radius(x, 0.5 * static_cast<double>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(sparse_correction(x, f, pattern));
  state.counters["nnz"] = static_cast<double>(pattern.nnz());
}
BENCHMARK(BM_SparseCorrection)->Arg(1)->Arg(2)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_AfnBuild(benchmark::State& state) {
  const auto x = generate_gaussian_cloud(static_cast<std::size_t>(state.range(0)), 3, 42);
  const KernelConfig cfg{bandwidth_percentile(x, 2.0), 1.0, 0.0};
  const std::size_t r = x.size() / 5;
  for (auto _ : state) benchmark::DoNotOptimize(afn_build(x, cfg, r, GeometricRule{2.0 * cfg.sigma}));
}
BENCHMARK(BM_AfnBuild)->Arg(500)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_AfnApplyInverse(benchmark::State& state) {
  const auto x = generate_gaussian_cloud(1000, 3, 42);
  const KernelConfig cfg{bandwidth_percentile(x, 2.0), 1.0, 0.0};
  const auto p = afn_build(x, cfg, 200, GeometricRule{2.0 * cfg.sigma});
  const Eigen::VectorXd v = Eigen::VectorXd::Ones(1000);
  for (auto _ : state) benchmark::DoNotOptimize(p.apply_inverse(v));
}
BENCHMARK(BM_AfnApplyInverse)->Unit(benchmark::kMicrosecond);

void BM_PcgFixedIterations(benchmark::State& state) {
  const auto x = generate_gaussian_cloud(1000, 3, 42);
  const KernelConfig cfg{bandwidth_percentile(x, 2.0), 1.0, 0.0};
  const Eigen::MatrixXd k = kernel_matrix(x, x, cfg);
  const auto p = afn_build(x, cfg, 200, GeometricRule{2.0 * cfg.sigma});
  const Eigen::VectorXd b = Eigen::VectorXd::Ones(1000);
  const LinearOperator a = [&k](const Eigen::VectorXd& v) -> Eigen::VectorXd { return k * v; };
  const LinearOperator m = [&p](const Eigen::VectorXd& v) { return p.apply_inverse(v); };
  for (auto _ : state) benchmark::DoNotOptimize(pcg(a, b, m, 1e-300, 20));
}
BENCHMARK(BM_PcgFixedIterations)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
