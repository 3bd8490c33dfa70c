#pragma once
// Scalar-auxiliary-variable midpoint schemes for the averaged and the
// oscillatory charged-particle models.  r = exp(phi(x)) is carried as log r.

#include <cmath>
#include <optional>

#include "uaosc/linear_ua.hpp"
#include "uaosc/particle_model.hpp"
#include "uaosc/potential.hpp"

namespace uaosc {

struct SavState {
  Vec2 x = Vec2::Zero();
  Vec2 q = Vec2::Zero();
  double log_r = 0.0;
  /// x of the previous step, once one has been taken.
  std::optional<Vec2> x_prev;

  double r() const { return std::exp(log_r); }
  Vec4 packed() const { return (Vec4() << x, q).finished(); }
};

SavState init_sav(const Vec2& x0, const Vec2& q0, const PotentialField& field);

/// |q|^2/2 + a1 q.Jx + a2 |x|^2/2 + log r
double hamiltonian_bar(const SavState& s, double theta_avg, double theta2_avg);

/// grad phi(x_n) + hess phi(x_n) dt/2 (q_n + a1 J x_n)
Vec2 bbar_taylor(const SavState& s, const PotentialField& field, double theta_avg, double dt);

/// -grad phi(x_{n-1})/2 + 3 grad phi(x_n)/2
Vec2 bbar_extrapolation(const Vec2& x_prev, const Vec2& x_curr, const PotentialField& field);

enum class BbarMode { taylor, extrapolation };

/// Averaged-model SAV midpoint.  theta_avg, theta2_avg already include the
/// field amplitude (B<theta>, B^2<theta^2>).  The extrapolation closure uses the
/// Taylor closure until a previous position is available.
SavState step_sav_averaged(const SavState& s, const PotentialField& field, double theta_avg, double theta2_avg,
                           const StepContext& ctx, BbarMode mode);

enum class BMode {
  /// extrapolated grad phi at the half step
  choice1,
  /// Taylor expansion along the oscillatory first-order path
  choice2,
};

/// choice2 mean of b from its value and Jacobian at x_n; shared with field
/// solvers that supply b pointwise.
Vec2 b_mean_taylor(const Vec2& x, const Vec2& q, const Vec2& b, const Mat2& db, const ParticleIntegrals& ints,
                   double t_n);

/// Mean of b over the step, (1/dt) int b, under the chosen closure.  choice1
/// falls back to choice2 on the first step.
Vec2 b_mean(const SavState& s, const PotentialField& field, const ParticleIntegrals& ints, double t_n, BMode mode);

/// Oscillatory SAV midpoint with precomputed step integrals.  The blocks must
/// be built with the same coupling as the model being integrated.
SavState step_sav_ua(const SavState& s, const ParticleIntegrals& ints, const PotentialField& field, double t_n,
                     BMode mode, MomentReading reading = MomentReading::symmetric);

/// Normalized model (theta scaled by B_amp).
SavState step_sav_ua(const SavState& s, const PeriodicProfile& profile, double B_amp, double eps,
                     const PotentialField& field, const StepContext& ctx, BMode mode);

}  // namespace uaosc
