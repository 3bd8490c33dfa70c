#pragma once
// Fourier-series profiles and the algebra of terms c * t^j * exp(i k w t).

#include <functional>
#include <map>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "uaosc/types.hpp"

namespace uaosc {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

/// P-periodic real function stored as a finite Fourier series
/// theta(s) = sum_k C_k exp(2 pi i k s / P).
class PeriodicProfile {
 public:
  PeriodicProfile(double period, std::map<int, cplx> coeffs);

  static PeriodicProfile constant(double c, double period = kTwoPi);
  /// offset + amp * cos(s)
  static PeriodicProfile cosine(double amp = 1.0, double offset = 0.0);
  /// Fourier coefficients |k| <= cutoff of a user function, sampled with a
  /// trapezoidal DFT.  The caller owns the truncation error.
  static PeriodicProfile from_function(const std::function<double(double)>& f, double period,
                                       int cutoff, int samples = 0);
  /// "cos", "1+cos", "2+0.5cos2", "zero", "one".
  static PeriodicProfile from_id(std::string_view id);

  double period() const { return period_; }
  int cutoff() const;
  const std::map<int, cplx>& coeffs() const { return coeffs_; }
  cplx coeff(int k) const;
  double mean() const { return coeff(0).real(); }

  double operator()(double s) const;
  PeriodicProfile scaled(double factor) const;
  /// theta^m as an exact (longer) Fourier series.
  PeriodicProfile power(int m) const;

 private:
  double period_;
  std::map<int, cplx> coeffs_;
};

/// <theta^m>, the constant mode of the m-fold self convolution.
double power_average(const PeriodicProfile& profile, int m);

struct OscTerm {
  cplx coeff;
  int degree;
  int mode;
};

/// Finite sum of c * t^j * exp(i k omega t).  Canonical: one term per (j,k),
/// terms below 1e-15 of the largest are dropped.
class OscPoly {
 public:
  explicit OscPoly(double omega = 1.0) : omega_(omega) {}

  static OscPoly constant(double omega, cplx c);
  static OscPoly term(double omega, cplx c, int degree, int mode);
  /// Frequency of mode 1 for fast time t/eps and period P.
  static double omega_for(double eps, double period = kTwoPi) { return kTwoPi / (period * eps); }

  double omega() const { return omega_; }
  std::vector<OscTerm> terms() const;
  std::size_t size() const { return terms_.size(); }
  bool empty() const { return terms_.empty(); }
  int max_degree() const;
  int max_abs_mode() const;
  cplx coeff(int degree, int mode) const;

  cplx operator()(double t) const;

  OscPoly& add_term(cplx c, int degree, int mode);
  OscPoly& operator+=(const OscPoly& o);
  OscPoly& operator-=(const OscPoly& o);
  OscPoly& operator*=(cplx s);
  friend OscPoly operator+(OscPoly a, const OscPoly& b) { return a += b; }
  friend OscPoly operator-(OscPoly a, const OscPoly& b) { return a -= b; }
  friend OscPoly operator*(OscPoly a, cplx s) { return a *= s; }
  friend OscPoly operator*(cplx s, OscPoly a) { return a *= s; }
  friend OscPoly operator*(const OscPoly& a, const OscPoly& b);

  OscPoly derivative() const;
  /// q(tau) = p(t0 + tau)
  OscPoly shifted(double t0) const;
  /// q(u) = p(h u); the frequency becomes omega * h.
  OscPoly rescaled(double h) const;

  void canonicalize();

 private:
  double omega_;
  std::map<std::pair<int, int>, cplx> terms_;  // (degree, mode) -> coefficient
};

/// Exact antiderivative (integration by parts for k != 0).
OscPoly antiderivative(const OscPoly& p);

/// int_a^b p(t) dt.
cplx definite_integral(const OscPoly& p, double a, double b);

/// int_{t_n}^{t_n+dt} p_1(s_1) int_{t_n}^{s_1} p_2(s_2) ... ds_k ... ds_1.
///
/// Evaluated on the unit interval.  Exponentials whose phase excursion is
/// small are expanded as polynomials, fast ones are integrated by parts, and
/// the intermediate band is split with the iterated-integral product rule
/// until one of the two exact branches applies.
cplx nested_integral(std::span<const OscPoly> seq, double t_n, double dt);

/// theta(t/eps)^m lifted into the algebra.
OscPoly profile_as_oscpoly(const PeriodicProfile& profile, int m, double eps);

}  // namespace uaosc
