#pragma once
// Linear schemes for U' = A(t/eps) U: explicit order p, naive and UA midpoint,
// and the two schemes for the averaged model.

#include <memory>
#include <shared_mutex>
#include <vector>

#include "uaosc/osc_matrix.hpp"
#include "uaosc/osc_quadrature.hpp"
#include "uaosc/types.hpp"

namespace uaosc {

struct StepContext {
  double t_n = 0.0;
  double dt = 0.0;
  int order = 1;
};

void validate(const StepContext& ctx);

/// Mode-resolved step integrals, keyed by (kind, depth, dt).  Values are
/// phase-free, so a single entry serves every t_n.
class CoefficientCache {
 public:
  enum class Kind { forward_power, backward_pair, a_then_one, one_then_a };
  const OscMatrix* find(Kind kind, int depth, double dt) const;
  const OscMatrix& insert(Kind kind, int depth, double dt, OscMatrix value);

 private:
  struct Key {
    Kind kind;
    int depth;
    double dt;
    auto operator<=>(const Key&) const = default;
  };
  mutable std::shared_mutex mutex_;
  std::map<Key, std::unique_ptr<OscMatrix>> entries_;
};

/// A(s) = sum_m C_m theta(s)^m with constant real d x d matrices C_m.
class LinearOscSystem {
 public:
  LinearOscSystem(PeriodicProfile profile, double eps, std::vector<MatX> power_coeffs);

  int dim() const { return dim_; }
  double epsilon() const { return eps_; }
  double omega() const { return modes_.omega; }
  const PeriodicProfile& profile() const { return profile_; }
  const std::vector<MatX>& power_coeffs() const { return power_coeffs_; }

  /// A(t/eps)
  MatX evaluate(double t) const;
  /// <A>: theta^m replaced by <theta^m>.
  MatX averaged() const;
  const OscMatrix& modes() const { return modes_; }

  LinearOscSystem with_epsilon(double eps) const;

  /// int, int int, ... of A over [t_n, t_n+dt] (phase-free, cached).
  const OscMatrix& forward_power(int k, double dt) const;
  /// int A(s) int_s^{t_n+dt} A
  const OscMatrix& backward_pair(double dt) const;
  /// int A(s) (s - t_n) ds
  const OscMatrix& a_then_one(double dt) const;
  /// int int_{t_n}^{s} A
  const OscMatrix& one_then_a(double dt) const;

 private:
  PeriodicProfile profile_;
  double eps_;
  std::vector<MatX> power_coeffs_;
  int dim_;
  OscMatrix modes_;
  std::shared_ptr<CoefficientCache> cache_;
};

std::vector<MatX> hk_matrices(const LinearOscSystem& sys, const StepContext& ctx);

VecX step_explicit(const LinearOscSystem& sys, const StepContext& ctx, const VecX& U);
VecX step_midpoint_naive(const LinearOscSystem& sys, const StepContext& ctx, const VecX& U);
VecX step_midpoint_ua(const LinearOscSystem& sys, const StepContext& ctx, const VecX& U);
VecX step_averaged_exp_taylor(const LinearOscSystem& sys, const StepContext& ctx, const VecX& U);
VecX step_averaged_midpoint(const LinearOscSystem& sys, const StepContext& ctx, const VecX& U);

/// Matrix M of the UA midpoint: H_1 + (forward - backward double integral) / 2.
MatX ua_midpoint_matrix(const LinearOscSystem& sys, const StepContext& ctx);

/// Solves (I - M/2) X = (I + M/2) U, throwing SingularMatrixError.
VecX cayley_apply(const MatX& M, const VecX& U);
/// Dense solve with a conditioning check and one step of iterative refinement.
VecX solve_checked(const MatX& M, const VecX& rhs);

// ------------------------------------------------------------ particle blocks

/// Reading of the moment term in the off-diagonal x/q blocks.
enum class MomentReading {
  /// (s - t_n) - (t_{n+1} - s): the form used in the degeneracy argument
  symmetric,
  /// (s - t_n) - dt: the lower limit substituted for the stray variable
  literal,
};

struct ParticleBlocks {
  Mat4 B;  ///< first-order block matrix
  Mat4 A;  ///< forward minus backward double-integral blocks
};

/// Scalar step integrals of theta (scaled by the coupling) needed by the
/// particle midpoint blocks and the SAV correction terms.  Phase-free, built
/// once per (profile, coupling, eps, dt).
class ParticleIntegrals {
 public:
  ParticleIntegrals(const PeriodicProfile& profile, double coupling, double eps, double dt);

  double dt() const { return dt_; }
  ParticleBlocks blocks(double t_n, MomentReading reading = MomentReading::symmetric) const;
  /// int theta(s) (s - t_{n+1/2}) ds
  double centered_moment(double t_n) const;
  /// int_{t_n}^{t_{n+1}} int_{t_n}^{s} theta
  double inner_theta(double t_n) const;

 private:
  double value(const OscMatrix& m, double t_n) const { return m.evaluate(t_n)(0, 0); }
  double dt_;
  OscMatrix t1_, t2_;            // int theta, int theta^2
  OscMatrix ff_, bb_;            // int theta int_< theta, int theta int_> theta
  OscMatrix one_t2_f_, one_t2_b_;  // int int_< theta^2, int int_> theta^2
  OscMatrix one_t1_f_, one_t1_b_;
  OscMatrix t1_one_f_, t1_one_b_;  // int theta (s - t_n), int theta (t_{n+1} - s)
  OscMatrix t2_one_f_, t2_one_b_;
  OscMatrix t2t1_f_, t2t1_b_;      // int theta^2 int_< theta, int theta^2 int_> theta
  OscMatrix t1t2_f_, t1t2_b_;
};

ParticleBlocks midpoint_particle_blocks(const PeriodicProfile& profile, double B_amp, double eps,
                                        const StepContext& ctx,
                                        MomentReading reading = MomentReading::symmetric);

/// U_{n+1} from U_{n+1} - U_n = (B + A/2)(U_n + U_{n+1})/2.
Vec4 step_particle_midpoint(const ParticleBlocks& blocks, const Vec4& U);

}  // namespace uaosc
