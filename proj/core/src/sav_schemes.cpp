#include "uaosc/sav_schemes.hpp"

namespace uaosc {

SavState init_sav(const Vec2& x0, const Vec2& q0, const PotentialField& field) {
  return {x0, q0, field.phi(x0), std::nullopt};
}

double hamiltonian_bar(const SavState& s, double theta_avg, double theta2_avg) {
  return 0.5 * s.q.squaredNorm() + theta_avg * s.q.dot(j_apply(s.x)) + 0.5 * theta2_avg * s.x.squaredNorm() +
         s.log_r;
}

Vec2 bbar_taylor(const SavState& s, const PotentialField& field, double theta_avg, double dt) {
  return field.grad(s.x) + field.hess(s.x) * (0.5 * dt * (s.q + theta_avg * j_apply(s.x)));
}

Vec2 bbar_extrapolation(const Vec2& x_prev, const Vec2& x_curr, const PotentialField& field) {
  return -0.5 * field.grad(x_prev) + 1.5 * field.grad(x_curr);
}

namespace {

// U_{n+1} - U_n = M (U_n + U_{n+1})/2 + f; the rhs is assembled exactly as in
// cayley_apply so that f = 0 reproduces the linear midpoint bit for bit.
Vec4 midpoint_with_source(const MatX& M, const Vec4& U, const Vec4& f) {
  const MatX I = MatX::Identity(4, 4);
  const VecX Ux = U;
  VecX rhs = Ux + 0.5 * (M * Ux);
  rhs += f;
  return solve_checked(I - 0.5 * M, rhs);
}

// d log r = b . dx with b the step mean of grad phi.
SavState advance(const SavState& s, const Vec4& U1, const Vec2& b_mean) {
  SavState out;
  out.x = U1.head<2>();
  out.q = U1.tail<2>();
  out.log_r = s.log_r + b_mean.dot(out.x - s.x);
  out.x_prev = s.x;
  return out;
}

}  // namespace

SavState step_sav_averaged(const SavState& s, const PotentialField& field, double theta_avg, double theta2_avg,
                           const StepContext& ctx, BbarMode mode) {
  validate(ctx);
  const double dt = ctx.dt;
  const Vec2 bbar = (mode == BbarMode::extrapolation && s.x_prev) ? bbar_extrapolation(*s.x_prev, s.x, field)
                                                                  : bbar_taylor(s, field, theta_avg, dt);
  const Mat2 J = j_matrix();
  MatX Abar = MatX::Zero(4, 4);
  Abar.block(0, 0, 2, 2) = theta_avg * J;
  Abar.block(0, 2, 2, 2) = Mat2::Identity();
  Abar.block(2, 0, 2, 2) = theta2_avg * (J * J);
  Abar.block(2, 2, 2, 2) = theta_avg * J;
  Vec4 f = Vec4::Zero();
  f.tail<2>() = -dt * bbar;
  const Vec4 U1 = midpoint_with_source(dt * Abar, s.packed(), f);
  return advance(s, U1, bbar);
}

Vec2 b_mean_taylor(const Vec2& x, const Vec2& q, const Vec2& b, const Mat2& db, const ParticleIntegrals& ints,
                   double t_n) {
  const double dt = ints.dt();
  const Vec2 h_mean = 0.5 * dt * q + (ints.inner_theta(t_n) / dt) * j_apply(x);
  return b + db * h_mean;
}

Vec2 b_mean(const SavState& s, const PotentialField& field, const ParticleIntegrals& ints, double t_n, BMode mode) {
  if (mode == BMode::choice1 && s.x_prev) return bbar_extrapolation(*s.x_prev, s.x, field);
  return b_mean_taylor(s.x, s.q, field.grad(s.x), field.hess(s.x), ints, t_n);
}

SavState step_sav_ua(const SavState& s, const ParticleIntegrals& ints, const PotentialField& field, double t_n,
                     BMode mode, MomentReading reading) {
  const double dt = ints.dt();
  const Vec2 bm = b_mean(s, field, ints, t_n, mode);
  const ParticleBlocks blk = ints.blocks(t_n, reading);
  const MatX M = blk.B + 0.5 * blk.A;
  Vec4 f = Vec4::Zero();
  f.tail<2>() = -dt * bm - ints.centered_moment(t_n) * j_apply(field.grad(s.x));
  const Vec4 U1 = midpoint_with_source(M, s.packed(), f);
  return advance(s, U1, bm);
}

SavState step_sav_ua(const SavState& s, const PeriodicProfile& profile, double B_amp, double eps,
                     const PotentialField& field, const StepContext& ctx, BMode mode) {
  validate(ctx);
  const ParticleIntegrals ints(profile, coupling(B_amp, ModelScaling::normalized), eps, ctx.dt);
  return step_sav_ua(s, ints, field, ctx.t_n, mode);
}

}  // namespace uaosc
