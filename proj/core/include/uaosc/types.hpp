#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace uaosc {

using cplx = std::complex<double>;

using Vec2 = Eigen::Vector2d;
using Vec4 = Eigen::Vector4d;
using Mat2 = Eigen::Matrix2d;
using Mat4 = Eigen::Matrix4d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;
using MatXc = Eigen::MatrixXcd;

/// Base of all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SingularMatrixError : Error {
  using Error::Error;
};

struct InvalidArgument : Error {
  using Error::Error;
};

/// Raised by numerical procedures that fail to reach their tolerance.
struct ConvergenceError : Error {
  using Error::Error;
};

}  // namespace uaosc
