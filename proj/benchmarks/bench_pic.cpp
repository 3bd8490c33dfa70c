// PIC kernels: deposition, Poisson solve, interpolation and full steps.

#include <benchmark/benchmark.h>

#include "uaosc/pic_vlasov.hpp"

using namespace uaosc;

namespace {

PicConfig config(int n1, int n2, int ppc, PusherMode pusher) {
  PicConfig cfg;
  cfg.grid = Grid2D::make(n1, n2, 0.5, n2 == 4 ? kTwoPi : 0.5);
  cfg.ic.k2 = n2 == 4 ? kTwoPi : 0.5;
  cfg.n_particles = std::size_t(n1) * std::size_t(n2) * std::size_t(ppc);
  cfg.mag.B = 0.1;
  cfg.mag.eps = 1e-3;
  cfg.pusher = pusher;
  return cfg;
}

void BM_Deposit(benchmark::State& state) {
  const PicConfig cfg = config(64, 64, 50, PusherMode::order2);
  const auto ens = sample_initial(cfg.ic, cfg.grid, cfg.n_particles, 1);
  const int m = int(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(deposit_density(ens, cfg.grid, m));
  state.SetItemsProcessed(state.iterations() * std::int64_t(ens.size()));
}

void BM_Poisson(benchmark::State& state) {
  const int n = int(state.range(0));
  const Grid2D g = Grid2D::make(n, n, 0.5, 0.5);
  std::vector<double> rho(g.nodes(), 1.0);
  for (std::size_t i = 0; i < rho.size(); ++i) rho[i] += 0.01 * double(i % 7);
  PoissonSolver solver(g);
  FieldState out;
  for (auto _ : state) {
    solver.solve_into(rho, out, true);
    benchmark::DoNotOptimize(out.E1.data());
  }
}

void BM_PicStep(benchmark::State& state) {
  const auto pusher = static_cast<PusherMode>(state.range(0));
  PicSimulation sim(config(64, 4, 50, pusher));
  for (auto _ : state) sim.step();
  state.SetLabel(to_string(pusher));
}

}  // namespace

BENCHMARK(BM_Deposit)->DenseRange(1, 3);
BENCHMARK(BM_Poisson)->RangeMultiplier(2)->Range(32, 256);
BENCHMARK(BM_PicStep)->DenseRange(0, 2);

BENCHMARK_MAIN();
