#include "uaosc/reference.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta4.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>

namespace uaosc {

namespace odeint = boost::numeric::odeint;

namespace {

// Fixed-size states for the common dimensions keep odeint's stage algebra
// free of allocations and loops of unknown length.
template <class State>
class FixedStepper {
 public:
  FixedStepper(const OdeSpec& spec, ReferenceMethod method) : spec_(spec), method_(method) {}

  // n equal steps from t0 to t1; stage times are formed from the step index.
  void advance(State& x, double t0, double t1, long n) {
    const double h = (t1 - t0) / double(n);
    auto sys = [this](const State& u, State& du, double t) { spec_.rhs(t, u.data(), du.data()); };
    for (long j = 0; j < n; ++j) {
      const double t = t0 + double(j) * h;
      if (method_ == ReferenceMethod::rk8)
        rk8_.do_step(sys, x, t, h);
      else
        rk4_.do_step(sys, x, t, h);
    }
  }

 private:
  const OdeSpec& spec_;
  ReferenceMethod method_;
  odeint::runge_kutta_fehlberg78<State> rk8_;
  odeint::runge_kutta4<State> rk4_;
};

double max_substep(const OdeSpec& spec, int substeps) {
  const double scale = spec.fast_period > 0.0 ? std::min(spec.fast_period, 1.0) : 1.0;
  return scale / double(substeps);
}

void check_budget(const OdeSpec& spec, double total_steps, const ReferenceConfig& cfg) {
  if (spec.fast_period > 0.0 && spec.fast_period < cfg.min_fast_period * (1.0 - 1e-12))
    throw BudgetExceededError("reference refused: fast period below the supported range");
  if (total_steps > cfg.max_steps) throw BudgetExceededError("reference refused: step budget exceeded");
}

template <class State>
std::vector<VecX> run_pass_impl(const OdeSpec& spec, State x, const std::vector<double>& times, int substeps,
                                ReferenceMethod method, double& steps) {
  FixedStepper<State> stepper(spec, method);
  std::vector<VecX> out;
  out.reserve(times.size());
  const double hmax = max_substep(spec, substeps);
  double t = 0.0;
  for (double ts : times) {
    if (ts < t) throw InvalidArgument("reference sample times must be ascending and non-negative");
    if (ts > t) {
      const long n = std::max<long>(1, long(std::ceil((ts - t) / hmax - 1e-9)));
      stepper.advance(x, t, ts, n);
      steps += double(n);
    }
    t = ts;
    out.emplace_back(Eigen::Map<const VecX>(x.data(), Eigen::Index(x.size())));
  }
  return out;
}

template <std::size_t N>
std::vector<VecX> run_fixed(const OdeSpec& spec, const VecX& U0, const std::vector<double>& times, int substeps,
                            ReferenceMethod method, double& steps) {
  std::array<double, N> x{};
  std::copy(U0.data(), U0.data() + N, x.begin());
  return run_pass_impl(spec, x, times, substeps, method, steps);
}

std::vector<VecX> run_pass(const OdeSpec& spec, const VecX& U0, const std::vector<double>& times, int substeps,
                           ReferenceMethod method, double& steps) {
  switch (U0.size()) {
    case 1: return run_fixed<1>(spec, U0, times, substeps, method, steps);
    case 2: return run_fixed<2>(spec, U0, times, substeps, method, steps);
    case 4: return run_fixed<4>(spec, U0, times, substeps, method, steps);
    case 16: return run_fixed<16>(spec, U0, times, substeps, method, steps);
    default:
      return run_pass_impl(spec, std::vector<double>(U0.data(), U0.data() + U0.size()), times, substeps, method,
                           steps);
  }
}

double estimate_steps(const OdeSpec& spec, const std::vector<double>& times, int substeps) {
  const double hmax = max_substep(spec, substeps);
  return times.empty() ? 0.0 : std::ceil(times.back() / hmax) + double(times.size());
}

double gate_change(const std::vector<VecX>& fine, const std::vector<VecX>& coarse) {
  double worst = 0.0;
  for (std::size_t i = 0; i < fine.size(); ++i) {
    const double scale = std::max(fine[i].norm(), 1e-300);
    worst = std::max(worst, (fine[i] - coarse[i]).norm() / scale);
  }
  return worst;
}

std::string gate_message(double change, double tol) {
  std::ostringstream os;
  os << "reference self-convergence gate failed: relative change " << std::scientific << std::setprecision(3)
     << change << " > " << tol;
  return os.str();
}

}  // namespace

ReferenceResult reference_solve(const OdeSpec& spec, const VecX& U0, const std::vector<double>& times,
                                const ReferenceConfig& cfg) {
  if (spec.dim != U0.size()) throw InvalidArgument("reference: state dimension mismatch");
  if (cfg.substeps_per_fast_period < 2) throw InvalidArgument("reference: too few substeps");
  const int coarse_sub = cfg.substeps_per_fast_period / 2;
  const double planned = estimate_steps(spec, times, cfg.substeps_per_fast_period) +
                         (cfg.run_gate ? estimate_steps(spec, times, coarse_sub) : 0.0);
  check_budget(spec, planned, cfg);

  ReferenceResult res;
  res.times = times;
  res.states = run_pass(spec, U0, times, cfg.substeps_per_fast_period, cfg.method, res.steps);
  if (cfg.run_gate) {
    const auto coarse = run_pass(spec, U0, times, coarse_sub, cfg.method, res.steps);
    res.gate_change = gate_change(res.states, coarse);
    if (!(res.gate_change <= cfg.gate_tol))
      throw ReferenceGateError(gate_message(res.gate_change, cfg.gate_tol));
  }
  return res;
}

OdeSpec make_ode(const LinearOscSystem& sys, const NonlinearTerm* nl) {
  OdeSpec spec;
  spec.dim = sys.dim();
  if (spec.dim > 16) throw InvalidArgument("make_ode: dimension above 16 not supported");
  const double period = sys.profile().period();
  spec.fast_period = sys.epsilon() * period;
  const int d = sys.dim();

  // theta(s) = c0 + sum_k (a_k cos + b_k sin)(2 pi k s / P), straight from the
  // stored coefficients.
  struct Mode {
    int k;
    double a, b;
  };
  std::vector<Mode> modes;
  double c0 = 0.0;
  for (const auto& [k, c] : sys.profile().coeffs()) {
    if (k == 0) c0 = c.real();
    if (k > 0) modes.push_back({k, 2.0 * c.real(), -2.0 * c.imag()});
  }
  const int nm = int(sys.power_coeffs().size());
  std::vector<double> C(std::size_t(nm) * d * d);
  for (int m = 0; m < nm; ++m)
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) C[(std::size_t(m) * d + i) * d + j] = sys.power_coeffs()[m](i, j);
  const double inv_eps = 1.0 / sys.epsilon();
  NonlinearTerm g = nl ? *nl : NonlinearTerm{};

  spec.rhs = [=](double t, const double* U, double* dU) {
    const double s = t * inv_eps;
    double th = c0;
    for (const Mode& md : modes) {
      const double ph = kTwoPi * md.k * s / period;
      th += md.a * std::cos(ph) + md.b * std::sin(ph);
    }
    double A[256];
    for (int e = 0; e < d * d; ++e) A[e] = 0.0;
    double p = 1.0;
    for (int m = 0; m < nm; ++m) {
      const double* Cm = C.data() + std::size_t(m) * d * d;
      if (p != 0.0)
        for (int e = 0; e < d * d; ++e) A[e] += p * Cm[e];
      p *= th;
    }
    for (int i = 0; i < d; ++i) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) acc += A[i * d + j] * U[j];
      dU[i] = acc;
    }
    if (g.g) {
      double tmp[16];
      g.g(U, tmp);
      for (int i = 0; i < d; ++i) dU[i] += tmp[i];
    }
  };
  return spec;
}

ReferenceResult reference_solve_linear(const LinearOscSystem& sys, const VecX& U0, const std::vector<double>& times,
                                       const ReferenceConfig& cfg) {
  const int d = sys.dim();
  if (U0.size() != d) throw InvalidArgument("reference: state dimension mismatch");
  if (d > 16) throw InvalidArgument("reference: dimension above 16 not supported");
  const OdeSpec vec_spec = make_ode(sys);
  const double period = vec_spec.fast_period;

  // The one-period propagator is carried as Phi = I + D with D' = A (I + D):
  // for small periods D is small and its rounding stays relative to |D|.
  OdeSpec mat_spec;
  mat_spec.dim = d * d;
  mat_spec.fast_period = period;
  mat_spec.rhs = [d, f = vec_spec.rhs](double t, const double* D, double* dD) {
    double col[16];
    for (int j = 0; j < d; ++j) {
      for (int i = 0; i < d; ++i) col[i] = D[j * d + i] + (i == j ? 1.0 : 0.0);
      f(t, col, dD + j * d);
    }
  };

  auto propagate = [&](int substeps, double& steps) {
    const VecX zero = VecX::Zero(d * d);
    std::vector<double> one{period};
    const VecX Dflat = run_pass(mat_spec, zero, one, substeps, cfg.method, steps).front();
    const MatX D = Eigen::Map<const MatX>(Dflat.data(), d, d);
    std::vector<VecX> out;
    for (double ts : times) {
      const double whole = std::floor(ts / period);
      long N = long(whole);
      double rem = ts - whole * period;
      if (rem < 0.0) rem = 0.0;
      // (I + D)^N by squaring, every factor kept as I + X:
      // (I + X)(I + Y) = I + X + Y + X Y
      MatX P = MatX::Zero(d, d), base = D;
      for (long e = N; e > 0; e >>= 1) {
        if (e & 1) P = (P + base + base * P).eval();
        if (e > 1) base = (2.0 * base + base * base).eval();
      }
      VecX u = U0 + P * U0;
      if (rem > 0.0) {
        std::vector<double> r{rem};
        u = run_pass(vec_spec, u, r, substeps, cfg.method, steps).front();
      }
      out.push_back(u);
    }
    return out;
  };

  // Long horizons use the propagator; short ones integrate directly.
  if (times.empty() || times.back() < 8.0 * period || !(period > 0.0)) return reference_solve(vec_spec, U0, times, cfg);
  check_budget(vec_spec, 0.0, cfg);

  ReferenceResult res;
  res.times = times;
  res.states = propagate(cfg.substeps_per_fast_period, res.steps);
  if (cfg.run_gate) {
    const auto coarse = propagate(cfg.substeps_per_fast_period / 2, res.steps);
    res.gate_change = gate_change(res.states, coarse);
    if (!(res.gate_change <= cfg.gate_tol))
      throw ReferenceGateError(gate_message(res.gate_change, cfg.gate_tol));
  }
  return res;
}

// ---------------------------------------------------------------- quadrature

namespace {

using GK = boost::math::quadrature::gauss_kronrod<double, 31>;

struct Piece {
  cplx value;
  double error = 0.0, l1 = 0.0;
};

// Bisection over the non-adaptive 31-point rule.  Boost's own recursion
// compares an unscaled error with a scaled tolerance and refines short ranges
// to full depth, so the error is rescaled to [lo, hi] here.
template <class F>
Piece adaptive_gk(const F& f, double lo, double hi, double tol, int depth) {
  double err = 0.0, l1 = 0.0;
  const cplx v = GK::integrate(f, lo, hi, 0, 0.0, &err, &l1);
  Piece p{v, err * 0.5 * (hi - lo), l1};
  if (p.error <= tol * p.l1 || depth == 0) return p;
  const double mid = 0.5 * (lo + hi);
  const Piece left = adaptive_gk(f, lo, mid, tol, depth - 1);
  const Piece right = adaptive_gk(f, mid, hi, tol, depth - 1);
  return {left.value + right.value, left.error + right.error, left.l1 + right.l1};
}

cplx nested_quad(const std::vector<ScalarFn>& f, std::size_t i, double lo, double hi, double a, double b,
                 Ordering order, double tol) {
  if (hi <= lo) return {};
  auto integrand = [&](double s) -> cplx {
    cplx v = f[i](s);
    if (i + 1 < f.size()) {
      v *= order == Ordering::forward ? nested_quad(f, i + 1, a, s, a, b, order, tol)
                                      : nested_quad(f, i + 1, s, b, a, b, order, tol);
    }
    return v;
  };
  const Piece p = adaptive_gk(integrand, lo, hi, tol, 20);
  if (p.error > std::max(1e-10 * p.l1, 1e-300)) {
    std::ostringstream msg;
    msg << "quadrature oracle tolerance not met (error " << p.error << ", L1 " << p.l1 << ", depth " << i << ")";
    throw QuadratureToleranceError(msg.str());
  }
  return p.value;
}

}  // namespace

cplx quadrature_oracle(const std::vector<ScalarFn>& factors, double a, double b, Ordering order, double tol) {
  if (factors.empty() || factors.size() > 3) throw InvalidArgument("quadrature oracle supports nesting 1..3");
  if (b < a) throw InvalidArgument("quadrature oracle requires a <= b");
  return nested_quad(factors, 0, a, b, a, b, order, tol);
}

// ---------------------------------------------------------------- Landau

namespace {

struct Weideman {
  static constexpr int N = 64;
  double L;
  std::array<double, N> a{};  // polynomial coefficients, a[j] multiplies Z^j

  Weideman() {
    const int M = 2 * N, M2 = 2 * M;
    L = std::sqrt(N / std::sqrt(2.0));
    std::vector<double> f(M2, 0.0);
    for (int k = -M + 1; k <= M - 1; ++k) {
      const double th = k * std::numbers::pi / M;
      const double t = L * std::tan(th / 2.0);
      f[k + M] = std::exp(-t * t) * (L * L + t * t);  // f[0] stays 0
    }
    std::vector<double> shifted(M2);
    for (int i = 0; i < M2; ++i) shifted[i] = f[(i + M) % M2];
    for (int j = 1; j <= N; ++j) {
      double re = 0.0;
      for (int i = 0; i < M2; ++i) re += shifted[i] * std::cos(2.0 * std::numbers::pi * double(i) * j / M2);
      a[j - 1] = re / M2;
    }
  }

  cplx upper(cplx z) const {
    const cplx iz(-z.imag(), z.real());
    const cplx Z = (L + iz) / (L - iz);
    cplx p{};
    for (int j = N - 1; j >= 0; --j) p = p * Z + a[j];
    return 2.0 * p / ((L - iz) * (L - iz)) + (1.0 / std::sqrt(std::numbers::pi)) / (L - iz);
  }
};

const Weideman& weideman() {
  static const Weideman w;
  return w;
}

}  // namespace

cplx faddeeva(cplx z) {
  if (z.imag() >= 0.0) return weideman().upper(z);
  return 2.0 * std::exp(-z * z) - weideman().upper(-z);
}

cplx plasma_z(cplx zeta) { return cplx(0.0, std::sqrt(std::numbers::pi)) * faddeeva(zeta); }

cplx landau_dispersion(cplx omega, double k) {
  const cplx zeta = omega / (std::sqrt(2.0) * k);
  return 1.0 + (1.0 + zeta * plasma_z(zeta)) / (k * k);
}

LandauRoot landau_dispersion_rate(double k) {
  if (!(k >= 0.2 && k <= 0.6)) throw InvalidArgument("landau_dispersion_rate supports 0.2 <= k <= 0.6");
  // Bohm-Gross frequency with a small damping as the starting guess; secant
  // iteration in the complex plane.
  cplx w0(std::sqrt(1.0 + 3.0 * k * k), -0.05);
  cplx w1 = w0 + cplx(1e-3, -1e-3);
  cplx f0 = landau_dispersion(w0, k), f1 = landau_dispersion(w1, k);
  for (int it = 0; it < 200; ++it) {
    if (f1 == f0) break;
    cplx w2 = w1 - f1 * (w1 - w0) / (f1 - f0);
    w0 = w1;
    f0 = f1;
    w1 = w2;
    f1 = landau_dispersion(w1, k);
    if (std::abs(w1 - w0) < 1e-14 * std::abs(w1)) break;
  }
  const double res = std::abs(f1);
  if (!(res <= 1e-10) || !std::isfinite(res)) throw NoConvergenceError("dispersion root did not converge");
  return {w1.real(), w1.imag(), res};
}

}  // namespace uaosc
