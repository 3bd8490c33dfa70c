#include "uaosc/potential.hpp"

#include <cmath>

namespace uaosc {

PotentialField PotentialField::zero() {
  return {[](const Vec2&) { return 0.0; }, [](const Vec2&) { return Vec2::Zero().eval(); },
          [](const Vec2&) { return Mat2::Zero().eval(); }};
}

PotentialField PotentialField::quadratic() {
  return {[](const Vec2& x) { return 0.5 * x.squaredNorm(); }, [](const Vec2& x) { return Vec2(x); },
          [](const Vec2&) { return Mat2::Identity().eval(); }};
}

PotentialField PotentialField::linear(const Vec2& c) {
  return {[c](const Vec2& x) { return c.dot(x); }, [c](const Vec2&) { return Vec2(c); },
          [](const Vec2&) { return Mat2::Zero().eval(); }};
}

PotentialField PotentialField::trig_quartic() {
  PotentialField f;
  f.phi = [](const Vec2& x) {
    return std::sin(x[0]) * std::sin(x[1]) + 0.5 * x.squaredNorm() +
           0.25 * (std::pow(x[0], 4) + std::pow(x[1], 4));
  };
  f.grad = [](const Vec2& x) {
    return Vec2(std::cos(x[0]) * std::sin(x[1]) + x[0] + x[0] * x[0] * x[0],
                std::sin(x[0]) * std::cos(x[1]) + x[1] + x[1] * x[1] * x[1]);
  };
  f.hess = [](const Vec2& x) {
    const double s1 = std::sin(x[0]), c1 = std::cos(x[0]), s2 = std::sin(x[1]), c2 = std::cos(x[1]);
    Mat2 h;
    h << -s1 * s2 + 1.0 + 3.0 * x[0] * x[0], c1 * c2, c1 * c2, -s1 * s2 + 1.0 + 3.0 * x[1] * x[1];
    return h;
  };
  return f;
}

PotentialField PotentialField::from_id(const std::string& id) {
  if (id == "zero") return zero();
  if (id == "quadratic") return quadratic();
  if (id == "trig_quartic") return trig_quartic();
  throw InvalidArgument("unknown potential id: " + id);
}

}  // namespace uaosc
