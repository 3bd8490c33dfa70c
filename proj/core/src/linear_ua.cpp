#include "uaosc/linear_ua.hpp"

#include <array>
#include <cmath>
#include <mutex>

#include <Eigen/LU>

namespace uaosc {

void validate(const StepContext& ctx) {
  if (!(ctx.dt > 0.0)) throw InvalidArgument("step requires dt > 0");
  if (ctx.order < 1) throw InvalidArgument("step order must be >= 1");
}

// ---------------------------------------------------------------- cache

const OscMatrix* CoefficientCache::find(Kind kind, int depth, double dt) const {
  std::shared_lock lock(mutex_);
  auto it = entries_.find(Key{kind, depth, dt});
  return it == entries_.end() ? nullptr : it->second.get();
}

const OscMatrix& CoefficientCache::insert(Kind kind, int depth, double dt, OscMatrix value) {
  std::unique_lock lock(mutex_);
  auto [it, fresh] = entries_.try_emplace(Key{kind, depth, dt}, nullptr);
  if (fresh) it->second = std::make_unique<OscMatrix>(std::move(value));
  return *it->second;
}

// ---------------------------------------------------------------- system

LinearOscSystem::LinearOscSystem(PeriodicProfile profile, double eps, std::vector<MatX> power_coeffs)
    : profile_(std::move(profile)),
      eps_(eps),
      power_coeffs_(std::move(power_coeffs)),
      cache_(std::make_shared<CoefficientCache>()) {
  if (!(eps > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (power_coeffs_.empty()) throw InvalidArgument("system needs at least one coefficient matrix");
  dim_ = int(power_coeffs_.front().rows());
  for (const auto& c : power_coeffs_) {
    if (c.rows() != dim_ || c.cols() != dim_) throw InvalidArgument("coefficient matrices must be square and equal-sized");
  }
  modes_.omega = OscPoly::omega_for(eps_, profile_.period());
  modes_.rows = modes_.cols = dim_;
  for (std::size_t m = 0; m < power_coeffs_.size(); ++m) {
    if (power_coeffs_[m].isZero(0.0)) continue;
    const PeriodicProfile pm = profile_.power(int(m));
    for (const auto& [k, c] : pm.coeffs()) {
      OscMatrix term;
      term.omega = modes_.omega;
      term.rows = term.cols = dim_;
      term.modes[k] = power_coeffs_[m].cast<cplx>() * c;
      modes_ += term;
    }
  }
  if (modes_.modes.empty()) modes_.modes[0] = MatXc::Zero(dim_, dim_);
}

MatX LinearOscSystem::evaluate(double t) const {
  MatX out = MatX::Zero(dim_, dim_);
  const double th = profile_(t / eps_);
  double p = 1.0;
  for (const auto& c : power_coeffs_) {
    out += p * c;
    p *= th;
  }
  return out;
}

MatX LinearOscSystem::averaged() const {
  MatX out = MatX::Zero(dim_, dim_);
  for (std::size_t m = 0; m < power_coeffs_.size(); ++m)
    out += (m == 0 ? 1.0 : power_average(profile_, int(m))) * power_coeffs_[m];
  return out;
}

LinearOscSystem LinearOscSystem::with_epsilon(double eps) const {
  return LinearOscSystem(profile_, eps, power_coeffs_);
}

const OscMatrix& LinearOscSystem::forward_power(int k, double dt) const {
  using K = CoefficientCache::Kind;
  if (const auto* hit = cache_->find(K::forward_power, k, dt)) return *hit;
  std::vector<OscMatrix> seq(k, modes_);
  return cache_->insert(K::forward_power, k, dt, nested_modes(seq, dt, Ordering::forward));
}

const OscMatrix& LinearOscSystem::backward_pair(double dt) const {
  using K = CoefficientCache::Kind;
  if (const auto* hit = cache_->find(K::backward_pair, 2, dt)) return *hit;
  std::array<OscMatrix, 2> seq{modes_, modes_};
  return cache_->insert(K::backward_pair, 2, dt, nested_modes(seq, dt, Ordering::backward));
}

const OscMatrix& LinearOscSystem::a_then_one(double dt) const {
  using K = CoefficientCache::Kind;
  if (const auto* hit = cache_->find(K::a_then_one, 2, dt)) return *hit;
  std::array<OscMatrix, 2> seq{modes_, OscMatrix::identity(modes_.omega, dim_)};
  return cache_->insert(K::a_then_one, 2, dt, nested_modes(seq, dt));
}

const OscMatrix& LinearOscSystem::one_then_a(double dt) const {
  using K = CoefficientCache::Kind;
  if (const auto* hit = cache_->find(K::one_then_a, 2, dt)) return *hit;
  std::array<OscMatrix, 2> seq{OscMatrix::identity(modes_.omega, dim_), modes_};
  return cache_->insert(K::one_then_a, 2, dt, nested_modes(seq, dt));
}

// ---------------------------------------------------------------- steppers

std::vector<MatX> hk_matrices(const LinearOscSystem& sys, const StepContext& ctx) {
  validate(ctx);
  if (ctx.order > 4) throw InvalidArgument("explicit order above 4 is not supported");
  std::vector<MatX> H;
  H.reserve(ctx.order);
  for (int k = 1; k <= ctx.order; ++k) H.push_back(sys.forward_power(k, ctx.dt).evaluate(ctx.t_n));
  return H;
}

VecX step_explicit(const LinearOscSystem& sys, const StepContext& ctx, const VecX& U) {
  const auto H = hk_matrices(sys, ctx);
  VecX out = U;
  for (const auto& h : H) out += h * U;
  return out;
}

VecX solve_checked(const MatX& M, const VecX& rhs) {
  Eigen::FullPivLU<MatX> lu(M);
  lu.setThreshold(1e-13);
  if (!lu.isInvertible()) throw SingularMatrixError("linear solve matrix is singular (time step too large?)");
  // one refinement step removes the LU rounding bias that otherwise
  // accumulates as norm drift over long midpoint runs
  VecX x = lu.solve(rhs);
  const VecX r = rhs - M * x;
  x += lu.solve(r);
  return x;
}

VecX cayley_apply(const MatX& M, const VecX& U) {
  const MatX I = MatX::Identity(M.rows(), M.cols());
  return solve_checked(I - 0.5 * M, U + 0.5 * (M * U));
}

VecX step_midpoint_naive(const LinearOscSystem& sys, const StepContext& ctx, const VecX& U) {
  validate(ctx);
  return cayley_apply(sys.forward_power(1, ctx.dt).evaluate(ctx.t_n), U);
}

MatX ua_midpoint_matrix(const LinearOscSystem& sys, const StepContext& ctx) {
  validate(ctx);
  const MatX H1 = sys.forward_power(1, ctx.dt).evaluate(ctx.t_n);
  const MatX F = sys.forward_power(2, ctx.dt).evaluate(ctx.t_n);
  const MatX Bk = sys.backward_pair(ctx.dt).evaluate(ctx.t_n);
  return H1 + 0.5 * (F - Bk);
}

VecX step_midpoint_ua(const LinearOscSystem& sys, const StepContext& ctx, const VecX& U) {
  return cayley_apply(ua_midpoint_matrix(sys, ctx), U);
}

VecX step_averaged_exp_taylor(const LinearOscSystem& sys, const StepContext& ctx, const VecX& U) {
  validate(ctx);
  const MatX Abar = sys.averaged();
  VecX term = U;
  VecX out = U;
  for (int k = 1; k <= ctx.order; ++k) {
    term = (ctx.dt / k) * (Abar * term);
    out += term;
  }
  return out;
}

VecX step_averaged_midpoint(const LinearOscSystem& sys, const StepContext& ctx, const VecX& U) {
  validate(ctx);
  return cayley_apply(ctx.dt * sys.averaged(), U);
}

// ---------------------------------------------------------------- particle blocks

namespace {

OscMatrix scalar_modes(const PeriodicProfile& p, double omega) {
  OscMatrix m;
  m.omega = omega;
  m.rows = m.cols = 1;
  for (const auto& [k, c] : p.coeffs()) m.modes[k] = MatXc::Constant(1, 1, c);
  if (m.modes.empty()) m.modes[0] = MatXc::Zero(1, 1);
  return m;
}

OscMatrix nm(const OscMatrix& a, const OscMatrix& b, double dt, Ordering o) {
  std::array<OscMatrix, 2> seq{a, b};
  return nested_modes(seq, dt, o);
}

const Mat2 kJ = (Mat2() << 0.0, 1.0, -1.0, 0.0).finished();

}  // namespace

ParticleIntegrals::ParticleIntegrals(const PeriodicProfile& profile, double coupling, double eps, double dt)
    : dt_(dt) {
  if (!(dt > 0.0)) throw InvalidArgument("particle integrals require dt > 0");
  const double omega = OscPoly::omega_for(eps, profile.period());
  const PeriodicProfile th = profile.scaled(coupling);
  const OscMatrix t1 = scalar_modes(th, omega);
  const OscMatrix t2 = scalar_modes(th.power(2), omega);
  const OscMatrix one = OscMatrix::identity(omega, 1);
  using O = Ordering;
  t1_ = nested_modes(std::span<const OscMatrix>(&t1, 1), dt);
  t2_ = nested_modes(std::span<const OscMatrix>(&t2, 1), dt);
  ff_ = nm(t1, t1, dt, O::forward);
  bb_ = nm(t1, t1, dt, O::backward);
  one_t2_f_ = nm(one, t2, dt, O::forward);
  one_t2_b_ = nm(one, t2, dt, O::backward);
  one_t1_f_ = nm(one, t1, dt, O::forward);
  one_t1_b_ = nm(one, t1, dt, O::backward);
  t1_one_f_ = nm(t1, one, dt, O::forward);
  t1_one_b_ = nm(t1, one, dt, O::backward);
  t2_one_f_ = nm(t2, one, dt, O::forward);
  t2_one_b_ = nm(t2, one, dt, O::backward);
  t2t1_f_ = nm(t2, t1, dt, O::forward);
  t2t1_b_ = nm(t2, t1, dt, O::backward);
  t1t2_f_ = nm(t1, t2, dt, O::forward);
  t1t2_b_ = nm(t1, t2, dt, O::backward);
}

ParticleBlocks ParticleIntegrals::blocks(double t_n, MomentReading reading) const {
  const double T1 = value(t1_, t_n);
  const double T2 = value(t2_, t_n);
  const Mat2 I = Mat2::Identity();

  ParticleBlocks out;
  out.B.setZero();
  out.B.block<2, 2>(0, 0) = T1 * kJ;
  out.B.block<2, 2>(0, 2) = dt_ * I;
  out.B.block<2, 2>(2, 0) = -T2 * I;
  out.B.block<2, 2>(2, 2) = T1 * kJ;

  const double d_tt = value(ff_, t_n) - value(bb_, t_n);
  double m1 = value(t1_one_f_, t_n) - value(t1_one_b_, t_n);
  double m2 = value(t2_one_f_, t_n) - value(t2_one_b_, t_n);
  if (reading == MomentReading::literal) {
    m1 = value(t1_one_f_, t_n) - dt_ * T1;
    m2 = value(t2_one_f_, t_n) - dt_ * T2;
  }
  const double d_1t2 = value(one_t2_f_, t_n) - value(one_t2_b_, t_n);
  const double d_1t1 = value(one_t1_f_, t_n) - value(one_t1_b_, t_n);
  const double d_t2t1 = value(t2t1_f_, t_n) - value(t2t1_b_, t_n);
  const double d_t1t2 = value(t1t2_f_, t_n) - value(t1t2_b_, t_n);

  out.A.setZero();
  out.A.block<2, 2>(0, 0) = -(d_tt + d_1t2) * I;
  out.A.block<2, 2>(0, 2) = (m1 + d_1t1) * kJ;
  out.A.block<2, 2>(2, 0) = -(d_t2t1 + d_t1t2) * kJ;
  out.A.block<2, 2>(2, 2) = -(m2 + d_tt) * I;
  return out;
}

double ParticleIntegrals::centered_moment(double t_n) const {
  return value(t1_one_f_, t_n) - 0.5 * dt_ * value(t1_, t_n);
}

double ParticleIntegrals::inner_theta(double t_n) const { return value(one_t1_f_, t_n); }

ParticleBlocks midpoint_particle_blocks(const PeriodicProfile& profile, double B_amp, double eps,
                                        const StepContext& ctx, MomentReading reading) {
  validate(ctx);
  return ParticleIntegrals(profile, B_amp, eps, ctx.dt).blocks(ctx.t_n, reading);
}

Vec4 step_particle_midpoint(const ParticleBlocks& blocks, const Vec4& U) {
  const Mat4 M = blocks.B + 0.5 * blocks.A;
  return cayley_apply(M, U);
}

}  // namespace uaosc
