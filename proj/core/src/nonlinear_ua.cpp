#include "uaosc/nonlinear_ua.hpp"

#include <cmath>

namespace uaosc {

VecX NonlinearTerm::eval(const VecX& U) const {
  VecX out(dim);
  g(U.data(), out.data());
  return out;
}

MatX NonlinearTerm::jac(const VecX& U) const {
  MatX J(dim, dim);
  if (jacobian) {
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> Jr(dim, dim);
    jacobian(U.data(), Jr.data());
    J = Jr;
    return J;
  }
  const double h = 1e-6 * (1.0 + U.norm());
  for (int j = 0; j < dim; ++j) {
    VecX up = U, dn = U;
    up[j] += h;
    dn[j] -= h;
    J.col(j) = (eval(up) - eval(dn)) / (2.0 * h);
  }
  return J;
}

NonlinearTerm NonlinearTerm::zero(int dim) {
  NonlinearTerm nl;
  nl.dim = dim;
  nl.g = [dim](const double*, double* out) {
    for (int i = 0; i < dim; ++i) out[i] = 0.0;
  };
  nl.jacobian = [dim](const double*, double* jac) {
    for (int i = 0; i < dim * dim; ++i) jac[i] = 0.0;
  };
  return nl;
}

VecX step_nl_order1(const LinearOscSystem& sys, const NonlinearTerm& nl, const StepContext& ctx, const VecX& U) {
  validate(ctx);
  const MatX H1 = sys.forward_power(1, ctx.dt).evaluate(ctx.t_n);
  return U + H1 * U + ctx.dt * nl.eval(U);
}

VecX htilde(const LinearOscSystem& sys, const StepContext& ctx, const VecX& U, const VecX& g_n, double s) {
  validate(ctx);
  if (s < ctx.t_n || s > ctx.t_n + ctx.dt) throw InvalidArgument("htilde: s outside the step");
  if (s == ctx.t_n) return VecX::Zero(U.size());
  const OscMatrix& A = sys.modes();
  const MatX I1 = nested_modes(std::span<const OscMatrix>(&A, 1), s - ctx.t_n).evaluate(ctx.t_n);
  return I1 * U + (s - ctx.t_n) * g_n;
}

Order2Matrices order2_matrices(const LinearOscSystem& sys, const StepContext& ctx) {
  validate(ctx);
  return {sys.forward_power(1, ctx.dt).evaluate(ctx.t_n), sys.forward_power(2, ctx.dt).evaluate(ctx.t_n),
          sys.a_then_one(ctx.dt).evaluate(ctx.t_n), sys.one_then_a(ctx.dt).evaluate(ctx.t_n)};
}

VecX step_nl_order2(const LinearOscSystem& sys, const NonlinearTerm& nl, const StepContext& ctx, const VecX& U) {
  const Order2Matrices m = order2_matrices(sys, ctx);
  const VecX g = nl.eval(U);
  const VecX int_htilde = m.K2 * U + (0.5 * ctx.dt * ctx.dt) * g;
  return U + m.H1 * U + m.H2 * U + m.K1 * g + ctx.dt * g + nl.jac(U) * int_htilde;
}

}  // namespace uaosc
