#pragma once
// Matrix-valued trigonometric polynomials M(t) = sum_K M_K exp(i K omega t) and
// mode-resolved nested integrals over one step.

#include <map>
#include <span>

#include "uaosc/types.hpp"

namespace uaosc {

struct OscMatrix {
  double omega = 1.0;
  int rows = 0;
  int cols = 0;
  std::map<int, MatXc> modes;

  static OscMatrix constant(double omega, const MatX& m);
  static OscMatrix identity(double omega, int d) { return constant(omega, MatX::Identity(d, d)); }

  /// Real part of sum_K M_K exp(i K omega t).
  MatX evaluate(double t) const;
  /// Imaginary residue of the same sum (diagnostic).
  double imag_norm(double t) const;
  OscMatrix& operator+=(const OscMatrix& o);
  OscMatrix scaled(cplx s) const;
};

enum class Ordering {
  /// s_1 > s_2 > ... > s_k (the first factor carries the latest time)
  forward,
  /// s_1 < s_2 < ... < s_k
  backward,
};

/// Coefficients C_K with
///   int_{t_n}^{t_n+dt} ... f_1(s_1) ... f_k(s_k) = sum_K C_K exp(i K omega t_n)
/// for every t_n.  Each tuple of modes reduces to a scalar nested integral of
/// pure exponentials computed by nested_integral.
OscMatrix nested_modes(std::span<const OscMatrix> seq, double dt, Ordering order = Ordering::forward);

}  // namespace uaosc
