#pragma once
// Charged particle in an oscillating magnetic field: J algebra, guiding
// variables, system matrices and averaged-model quantities.

#include <vector>

#include "uaosc/linear_ua.hpp"
#include "uaosc/nonlinear_ua.hpp"
#include "uaosc/potential.hpp"

namespace uaosc {

struct GuidingState {
  Vec2 x = Vec2::Zero();
  Vec2 q = Vec2::Zero();
  Vec4 packed() const { return (Vec4() << x, q).finished(); }
  static GuidingState unpack(const Vec4& u) { return {u.head<2>(), u.tail<2>()}; }
};

struct PhysState {
  Vec2 x = Vec2::Zero();
  Vec2 v = Vec2::Zero();
};

/// J(a1, a2) = (a2, -a1)
inline Vec2 j_apply(const Vec2& a) { return Vec2(a[1], -a[0]); }
inline Mat2 j_matrix() { return (Mat2() << 0.0, 1.0, -1.0, 0.0).finished(); }

/// normalized: theta enters as B theta; physical: as (B/2) theta.
enum class ModelScaling { normalized, physical };

inline double coupling(double B_amp, ModelScaling scaling) {
  return scaling == ModelScaling::physical ? 0.5 * B_amp : B_amp;
}

/// q = v - c theta(t/eps) J x with c the coupling of the chosen scaling.
GuidingState to_guiding(const PhysState& s, double t, const PeriodicProfile& profile, double B_amp, double eps,
                        ModelScaling scaling = ModelScaling::physical);
PhysState from_guiding(const GuidingState& s, double t, const PeriodicProfile& profile, double B_amp, double eps,
                       ModelScaling scaling = ModelScaling::physical);

/// A = [[c theta J, I], [c^2 theta^2 J^2, c theta J]].
LinearOscSystem build_A(const PeriodicProfile& profile, double B_amp, double eps,
                        ModelScaling scaling = ModelScaling::normalized);

struct NonImaginarySpectrumError : Error {
  using Error::Error;
};

/// Distinct |Im lambda| over the eigenvalues of <A>, from the reduction to the
/// +-i eigenspaces of J.  Requires 2x2 blocks in span{I, J}.
std::vector<double> averaged_frequencies(const LinearOscSystem& sys);

struct Hamiltonians {
  double H;
  double H1;
  double H2;
};

/// H1 = |q|^2/2 + a2 |x|^2/2, H2 = a1 q.Jx, H = H1 + H2 + phi(x), where a1, a2
/// are the (coupling-scaled) averages of theta and theta^2.
Hamiltonians hamiltonians(const GuidingState& s, const PotentialField& field, double theta_avg, double theta2_avg);

/// g(x, q) = (0, sign * grad phi(x)) with its Jacobian.
NonlinearTerm potential_force(const PotentialField& field, double sign);

/// g = (0, 0, cos x1 sin x2 + x1 + x1^3, sin x1 cos x2 + x2 + x2^3).
NonlinearTerm trig_cubic_force();

}  // namespace uaosc
