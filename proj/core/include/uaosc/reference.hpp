#pragma once
// Independent oracles: fine-step trajectories, adaptive quadrature and the
// kinetic dispersion relation.  Nothing here shares code with the schemes.

#include <functional>
#include <vector>

#include "uaosc/linear_ua.hpp"
#include "uaosc/nonlinear_ua.hpp"
#include "uaosc/types.hpp"

namespace uaosc {

struct BudgetExceededError : Error {
  using Error::Error;
};

struct ReferenceGateError : Error {
  using Error::Error;
};

enum class ReferenceMethod {
  rk8,  ///< Fehlberg 7(8), used as a fixed-step eighth-order method
  rk4,  ///< classical four-stage method
};

struct ReferenceConfig {
  int substeps_per_fast_period = 200;
  ReferenceMethod method = ReferenceMethod::rk8;
  /// Relative endpoint change allowed when the reference step is halved.
  double gate_tol = 1e-10;
  /// Smallest fast period (eps * P) accepted before the cost model refuses.
  double min_fast_period = kTwoPi * 1e-6;
  /// Upper bound on right-hand-side steps over all passes.
  double max_steps = 2.0e8;
  bool run_gate = true;
};

/// dU = f(t, U); raw arrays of length dim.
using OdeRhs = std::function<void(double t, const double* U, double* dU)>;

struct OdeSpec {
  int dim = 0;
  OdeRhs rhs;
  /// eps * P of the fast oscillation, 0 for a non-oscillatory system.
  double fast_period = 0.0;
};

struct ReferenceResult {
  std::vector<double> times;
  std::vector<VecX> states;
  /// max relative change between the two resolutions at the sample times
  double gate_change = 0.0;
  double steps = 0.0;
};

/// Fixed-step integration resolving the fast period; samples at `times`
/// (ascending, starting after t = 0).  Gated by self-convergence.
ReferenceResult reference_solve(const OdeSpec& spec, const VecX& U0, const std::vector<double>& times,
                                const ReferenceConfig& cfg = {});

/// Linear systems: the one-period propagator is integrated finely and raised
/// to the number of whole periods, the remainder integrated directly.
ReferenceResult reference_solve_linear(const LinearOscSystem& sys, const VecX& U0, const std::vector<double>& times,
                                       const ReferenceConfig& cfg = {});

/// Right-hand side of U' = A(t/eps) U + g(U).
OdeSpec make_ode(const LinearOscSystem& sys, const NonlinearTerm* nl = nullptr);

// ------------------------------------------------------------ quadrature

struct QuadratureToleranceError : Error {
  using Error::Error;
};

using ScalarFn = std::function<cplx(double)>;

/// int_a^b f_1(s_1) int_a^{s_1} f_2(s_2) ... (forward) or with the inner
/// ranges [s_i, b] (backward) by nested adaptive Gauss-Kronrod.
cplx quadrature_oracle(const std::vector<ScalarFn>& factors, double a, double b,
                       Ordering order = Ordering::forward, double tol = 1e-12);

// ------------------------------------------------------------ Landau

struct NoConvergenceError : Error {
  using Error::Error;
};

/// Faddeeva function w(z) = exp(-z^2) erfc(-i z).
cplx faddeeva(cplx z);
/// Plasma dispersion function Z(zeta) = i sqrt(pi) w(zeta).
cplx plasma_z(cplx zeta);
/// 1 + (1 + zeta Z(zeta)) / k^2 with zeta = omega / (sqrt(2) k).
cplx landau_dispersion(cplx omega, double k);

struct LandauRoot {
  double omega_r;
  double gamma;
  double residual;
};

/// Least-damped root of the electrostatic dispersion relation for a unit
/// Maxwellian.
LandauRoot landau_dispersion_rate(double k);

}  // namespace uaosc
