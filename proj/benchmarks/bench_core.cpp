#include <cmath>
#include <vector>

#include <benchmark/benchmark.h>

#include "inslab/common/rng.hpp"
#include "inslab/dgp_sim/dgp.hpp"
#include "inslab/model_core/contracts.hpp"
#include "inslab/np_estim/kernel.hpp"
#include "inslab/np_estim/moments.hpp"
#include "inslab/np_estim/qp.hpp"
#include "inslab/np_estim/step2.hpp"

using namespace inslab;

namespace {

DgpConfig design(long n) {
  DgpConfig c;
  c.n = n;
  c.seed = 7;
  return c;
}

void BM_FrontierUniform(benchmark::State& state) {
  const auto H = DamageDist::uniform(0.0, 1e4);
  double a = 1e-4;
  for (auto _ : state) {
    benchmark::DoNotOptimize(frontier_theta(a, {600, 1000}, {850, 500}, H));
    a = a < 1e-3 ? a + 1e-7 : 1e-4;
  }
}
BENCHMARK(BM_FrontierUniform);

void BM_FrontierEmpirical(benchmark::State& state) {
  Rng rng(3);
  const auto ex = DamageDist::exponential(5000.0);
  std::vector<double> d(static_cast<std::size_t>(state.range(0)));
  for (auto& x : d) x = ex.quantile(rng.uniform());
  const auto H = estimate_damage_cdf(d);
  for (auto _ : state) {
    benchmark::DoNotOptimize(frontier_theta(5e-4, {487.5, 1000}, {700, 500}, H));
  }
}
BENCHMARK(BM_FrontierEmpirical)->Arg(10000)->Arg(100000);

void BM_FactorialMomentsAndDemix(benchmark::State& state) {
  std::vector<long> js;
  for (const auto& r : simulate_dataset(design(state.range(0)))) js.push_back(r.j);
  for (auto _ : state) {
    const auto ms = factorial_moments(js, moment_order_rule(static_cast<long>(js.size())));
    benchmark::DoNotOptimize(demix_poisson(ms));
  }
}
BENCHMARK(BM_FactorialMomentsAndDemix)->Arg(20000)->Arg(100000)->Unit(benchmark::kMillisecond);

void BM_KernelRegress(benchmark::State& state) {
  const auto recs = simulate_dataset(design(state.range(0)));
  std::vector<double> z, y;
  for (const auto& r : recs) {
    z.push_back(r.z);
    y.push_back(r.chi == 1);
  }
  const KernelSpec spec{silverman_bandwidth(z)};
  for (auto _ : state) benchmark::DoNotOptimize(kernel_regress(z, y, 150.0, spec));
}
BENCHMARK(BM_KernelRegress)->Arg(20000)->Arg(100000)->Unit(benchmark::kMicrosecond);

void BM_SolveQp(benchmark::State& state) {
  const int n = 5, m = static_cast<int>(state.range(0));
  QpProblem p;
  p.G = Eigen::MatrixXd::Identity(n, n);
  p.g = Eigen::VectorXd::Constant(n, -1.0);
  p.A_eq.resize(0, n);
  p.b_eq.resize(0);
  p.A_in.resize(m, n);
  for (int i = 0; i < m; ++i) {
    const double t = static_cast<double>(i) / (m - 1);
    for (int k = 0; k < n; ++k) p.A_in(i, k) = -std::pow(t, k);
  }
  p.b_in = Eigen::VectorXd::Constant(m, -1.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_qp(p));
}
BENCHMARK(BM_SolveQp)->Arg(101)->Arg(201)->Unit(benchmark::kMicrosecond);

void BM_SimulateDataset(benchmark::State& state) {
  const auto cfg = design(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(simulate_dataset(cfg));
}
BENCHMARK(BM_SimulateDataset)->Arg(20000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
