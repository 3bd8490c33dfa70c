// Per-step cost of the time integrators on the 4x4 particle system.

#include <benchmark/benchmark.h>

#include "uaosc/harness.hpp"
#include "uaosc/linear_ua.hpp"
#include "uaosc/nonlinear_ua.hpp"
#include "uaosc/sav_schemes.hpp"

using namespace uaosc;

namespace {

const Vec4 kU0(0.5, 0.25, -0.25, 0.5);

void BM_RunScheme(benchmark::State& state, const std::string& scheme, ProblemKind kind) {
  const Problem pb = make_problem(kind, PeriodicProfile::from_id("cos"), 1.0, 1e-3);
  const double dt = 1.0 / 64;
  for (auto _ : state) benchmark::DoNotOptimize(run_scheme(scheme, pb, kU0, dt, 1.0));
  state.SetItemsProcessed(state.iterations() * 64);
}

void BM_ParticleIntegrals(benchmark::State& state) {
  const auto prof = PeriodicProfile::from_id("1+cos");
  for (auto _ : state) {
    ParticleIntegrals ints(prof, 1.0, 1e-3, 0.01);
    benchmark::DoNotOptimize(ints.blocks(0.37));
  }
}

void BM_NestedIntegral(benchmark::State& state) {
  const OscPoly th = profile_as_oscpoly(PeriodicProfile::from_id("1+cos"), 1, 1e-3);
  const std::vector<OscPoly> seq(std::size_t(state.range(0)), th);
  for (auto _ : state) benchmark::DoNotOptimize(nested_integral(seq, 0.37, 0.01));
}

}  // namespace

BENCHMARK_CAPTURE(BM_RunScheme, explicit1, std::string("explicit1"), ProblemKind::particle_linear);
BENCHMARK_CAPTURE(BM_RunScheme, explicit4, std::string("explicit4"), ProblemKind::particle_linear);
BENCHMARK_CAPTURE(BM_RunScheme, midpoint_ua, std::string("midpoint_ua"), ProblemKind::particle_linear);
BENCHMARK_CAPTURE(BM_RunScheme, averaged_midpoint, std::string("averaged_midpoint"), ProblemKind::particle_linear);
BENCHMARK_CAPTURE(BM_RunScheme, nl_order2, std::string("nl_order2"), ProblemKind::particle_nonlinear);
BENCHMARK_CAPTURE(BM_RunScheme, sav_ua_choice2, std::string("sav_ua_choice2"), ProblemKind::particle_sav);
BENCHMARK(BM_ParticleIntegrals);
BENCHMARK(BM_NestedIntegral)->DenseRange(1, 3);

BENCHMARK_MAIN();
