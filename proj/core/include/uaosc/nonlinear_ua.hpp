#pragma once
// Explicit UA schemes of order 1 and 2 for U' = A(t/eps) U + g(U).

#include <functional>

#include "uaosc/linear_ua.hpp"

namespace uaosc {

/// Autonomous nonlinearity g with its Jacobian.  Without a Jacobian, centred
/// differences with step 1e-6 (1 + |U|) are used and the term reports reduced
/// accuracy.
struct NonlinearTerm {
  int dim = 0;
  std::function<void(const double* U, double* out)> g;
  /// Row-major d x d.
  std::function<void(const double* U, double* jac)> jacobian;

  VecX eval(const VecX& U) const;
  MatX jac(const VecX& U) const;
  bool reduced_accuracy() const { return !jacobian; }

  static NonlinearTerm zero(int dim);
};

/// U + (int A) U + dt g(U)
VecX step_nl_order1(const LinearOscSystem& sys, const NonlinearTerm& nl, const StepContext& ctx, const VecX& U);

/// (int_{t_n}^{s} A) U + (s - t_n) g_n
VecX htilde(const LinearOscSystem& sys, const StepContext& ctx, const VecX& U, const VecX& g_n, double s);

/// U + H1 U + H2 U + (int A (s - t_n)) g + dt g + grad g(U) (int int A U + dt^2/2 g)
VecX step_nl_order2(const LinearOscSystem& sys, const NonlinearTerm& nl, const StepContext& ctx, const VecX& U);

/// Per-step matrices of the order-2 scheme evaluated at t_n; used by the
/// particle pusher to share them across an ensemble.
struct Order2Matrices {
  MatX H1, H2, K1, K2;
};
Order2Matrices order2_matrices(const LinearOscSystem& sys, const StepContext& ctx);

}  // namespace uaosc
