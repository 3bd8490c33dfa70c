#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "uaosc/harness.hpp"
#include "uaosc/nonlinear_ua.hpp"
#include "uaosc/particle_model.hpp"
#include "uaosc/reference.hpp"

using namespace uaosc;

namespace {

MatX fd_jacobian(const NonlinearTerm& nl, const VecX& U) {
  const int d = int(U.size());
  MatX J(d, d);
  for (int j = 0; j < d; ++j) {
    const double h = 1e-6 * (1.0 + std::abs(U[j]));
    VecX p = U, m = U;
    p[j] += h;
    m[j] -= h;
    J.col(j) = (nl.eval(p) - nl.eval(m)) / (2.0 * h);
  }
  return J;
}

const VecX kU0 = Vec4(0.5, 0.25, -0.25, 0.5);

}  // namespace

TEST_CASE("Jacobians match centred differences at random points") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (const NonlinearTerm& nl : {trig_cubic_force(), potential_force(PotentialField::trig_quartic(), -1.0)}) {
    for (int i = 0; i < 20; ++i) {
      const VecX U = Vec4(u(rng), u(rng), u(rng), u(rng));
      const MatX J = nl.jac(U), F = fd_jacobian(nl, U);
      CHECK((J - F).norm() <= 1e-5 * std::max(1.0, J.norm()));
    }
  }
}

TEST_CASE("finite-difference fallback is flagged and accurate") {
  NonlinearTerm nl = trig_cubic_force();
  CHECK_FALSE(nl.reduced_accuracy());
  NonlinearTerm fd = nl;
  fd.jacobian = nullptr;
  CHECK(fd.reduced_accuracy());
  const VecX U = Vec4(0.3, -0.7, 0.1, 0.2);
  CHECK((fd.jac(U) - nl.jac(U)).norm() <= 1e-6);
}

TEST_CASE("g = 0 reduces to the linear explicit schemes") {
  const auto sys = build_A(PeriodicProfile::from_id("1+cos"), 1.0, 0.01);
  const NonlinearTerm zero = NonlinearTerm::zero(4);
  const StepContext c1{0.17, 0.05, 1}, c2{0.17, 0.05, 2};
  const VecX a1 = step_nl_order1(sys, zero, c1, kU0), b1 = step_explicit(sys, c1, kU0);
  const VecX a2 = step_nl_order2(sys, zero, c2, kU0), b2 = step_explicit(sys, c2, kU0);
  CHECK((a1 - b1).norm() <= 1e-15 * b1.norm());
  CHECK((a2 - b2).norm() <= 1e-15 * b2.norm());
}

TEST_CASE("A = 0 reduces to Euler and the second-order Taylor method") {
  const LinearOscSystem zero(PeriodicProfile::from_id("cos"), 0.1, {MatX::Zero(4, 4)});
  const NonlinearTerm nl = trig_cubic_force();
  const double dt = 0.05;
  const VecX g = nl.eval(kU0);
  const VecX euler = kU0 + dt * g;
  const VecX taylor = euler + nl.jac(kU0) * (0.5 * dt * dt * g);
  CHECK((step_nl_order1(zero, nl, {0.0, dt, 1}, kU0) - euler).norm() <= 1e-15);
  CHECK((step_nl_order2(zero, nl, {0.0, dt, 2}, kU0) - taylor).norm() <= 1e-15);
}

TEST_CASE("htilde") {
  const auto sys = build_A(PeriodicProfile::from_id("cos"), 1.0, 0.01);
  const VecX g = Vec4(0.0, 0.0, 1.0, -2.0);
  const StepContext ctx{0.3, 0.1, 2};
  CHECK(htilde(sys, ctx, kU0, g, 0.3).norm() == 0.0);
  const LinearOscSystem zero(PeriodicProfile::from_id("cos"), 0.01, {MatX::Zero(4, 4)});
  CHECK((htilde(zero, ctx, kU0, g, 0.37) - 0.07 * g).norm() <= 1e-15);
}

TEST_CASE("htilde tracks the exact increment to O(dt^2) uniformly in eps") {
  const NonlinearTerm nl = trig_cubic_force();
  const std::vector<double> dts{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> worst(dts.size(), 0.0);
  for (double eps : {1e-1, 1e-2, 1e-3}) {
    const auto sys = build_A(PeriodicProfile::from_id("cos"), 1.0, eps);
    const OdeSpec ode = make_ode(sys, &nl);
    const VecX g0 = nl.eval(kU0);
    for (std::size_t i = 0; i < dts.size(); ++i) {
      std::vector<double> ts;
      for (int k = 1; k <= 8; ++k) ts.push_back(dts[i] * k / 8.0);
      const auto ref = reference_solve(ode, kU0, ts);
      for (std::size_t k = 0; k < ts.size(); ++k) {
        const VecX h = ref.states[k] - kU0;
        worst[i] = std::max(worst[i], (h - htilde(sys, {0.0, dts[i], 2}, kU0, g0, ts[k])).norm());
      }
    }
  }
  CHECK(fit_loglog(dts, worst).slope >= 1.8);
}

TEST_CASE("order2 matrices reproduce the stepper") {
  const auto sys = build_A(PeriodicProfile::from_id("1+cos"), 1.0, 0.02);
  const NonlinearTerm nl = trig_cubic_force();
  const StepContext ctx{0.41, 0.05, 2};
  const Order2Matrices m = order2_matrices(sys, ctx);
  const VecX g = nl.eval(kU0);
  const VecX U1 = kU0 + m.H1 * kU0 + m.H2 * kU0 + m.K1 * g + ctx.dt * g + nl.jac(kU0) * (m.K2 * kU0 + 0.5 * ctx.dt * ctx.dt * g);
  CHECK((U1 - step_nl_order2(sys, nl, ctx, kU0)).norm() <= 1e-14);
}

TEST_CASE("uniform order of the nonlinear schemes on a reduced grid") {
  ConvergenceSpec spec;
  spec.problem = ProblemKind::particle_nonlinear;
  spec.profile = "cos";
  spec.eps = {1.0, 1e-1, 1e-2, 1e-3};
  spec.dt = {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
  spec.U0 = kU0;
  const auto tables = run_convergence(spec, {"nl_order1", "nl_order2"});
  CHECK(tables[0].uniform.slope == doctest::Approx(1.0).epsilon(0.2));
  CHECK(tables[1].uniform.slope == doctest::Approx(2.0).epsilon(0.1));

  spec.problem = ProblemKind::particle_sav;
  const auto phi = run_convergence(spec, {"nl_order2"});
  CHECK(phi[0].uniform.slope == doctest::Approx(2.0).epsilon(0.1));
}
