#pragma once

#include <functional>

#include "uaosc/types.hpp"

namespace uaosc {

/// Scalar potential phi on R^2 with gradient and Hessian.
struct PotentialField {
  std::function<double(const Vec2&)> phi;
  std::function<Vec2(const Vec2&)> grad;
  std::function<Mat2(const Vec2&)> hess;

  static PotentialField zero();
  /// |x|^2 / 2
  static PotentialField quadratic();
  /// c . x
  static PotentialField linear(const Vec2& c);
  /// sin x1 sin x2 + |x|^2/2 + (x1^4 + x2^4)/4, whose gradient has the
  /// components cos x1 sin x2 + x1 + x1^3 and sin x1 cos x2 + x2 + x2^3.
  static PotentialField trig_quartic();
  /// "zero", "quadratic", "trig_quartic"
  static PotentialField from_id(const std::string& id);
};

}  // namespace uaosc
