#include "uaosc/particle_model.hpp"

#include <algorithm>
#include <cmath>

namespace uaosc {

GuidingState to_guiding(const PhysState& s, double t, const PeriodicProfile& profile, double B_amp, double eps,
                        ModelScaling scaling) {
  const double c = coupling(B_amp, scaling) * profile(t / eps);
  return {s.x, s.v - c * j_apply(s.x)};
}

PhysState from_guiding(const GuidingState& s, double t, const PeriodicProfile& profile, double B_amp, double eps,
                       ModelScaling scaling) {
  const double c = coupling(B_amp, scaling) * profile(t / eps);
  return {s.x, s.q + c * j_apply(s.x)};
}

LinearOscSystem build_A(const PeriodicProfile& profile, double B_amp, double eps, ModelScaling scaling) {
  const double c = coupling(B_amp, scaling);
  const Mat2 J = j_matrix();
  MatX C0 = MatX::Zero(4, 4), C1 = MatX::Zero(4, 4), C2 = MatX::Zero(4, 4);
  C0.block(0, 2, 2, 2) = Mat2::Identity();
  C1.block(0, 0, 2, 2) = c * J;
  C1.block(2, 2, 2, 2) = c * J;
  C2.block(2, 0, 2, 2) = c * c * (J * J);
  return LinearOscSystem(profile, eps, {C0, C1, C2});
}

std::vector<double> averaged_frequencies(const LinearOscSystem& sys) {
  if (sys.dim() != 4) throw InvalidArgument("averaged_frequencies expects a 4x4 system");
  const MatX Abar = sys.averaged();
  const double scale = std::max(1.0, Abar.cwiseAbs().maxCoeff());
  double p[2][2], r[2][2];
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const Mat2 b = Abar.block<2, 2>(2 * i, 2 * j);
      p[i][j] = 0.5 * (b(0, 0) + b(1, 1));
      r[i][j] = 0.5 * (b(0, 1) - b(1, 0));
      const Mat2 fit = p[i][j] * Mat2::Identity() + r[i][j] * j_matrix();
      if ((b - fit).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvalidArgument("averaged_frequencies: blocks do not commute with J");
    }
  std::vector<cplx> lambdas;
  for (int sigma : {1, -1}) {
    const cplx is(0.0, sigma);
    const cplx a = p[0][0] + is * r[0][0], b = p[0][1] + is * r[0][1];
    const cplx c = p[1][0] + is * r[1][0], d = p[1][1] + is * r[1][1];
    const cplx half_tr = 0.5 * (a + d);
    const cplx disc = std::sqrt(half_tr * half_tr - (a * d - b * c));
    lambdas.push_back(half_tr + disc);
    lambdas.push_back(half_tr - disc);
  }
  std::vector<double> freqs;
  for (const cplx& l : lambdas) {
    if (std::abs(l.real()) > 1e-9 * std::max(1.0, std::abs(l)))
      throw NonImaginarySpectrumError("averaged matrix has eigenvalues off the imaginary axis");
    freqs.push_back(std::abs(l.imag()));
  }
  std::sort(freqs.begin(), freqs.end());
  std::vector<double> out;
  for (double f : freqs)
    if (out.empty() || std::abs(f - out.back()) > 1e-9) out.push_back(f);
  return out;
}

Hamiltonians hamiltonians(const GuidingState& s, const PotentialField& field, double theta_avg, double theta2_avg) {
  const double H1 = 0.5 * s.q.squaredNorm() + 0.5 * theta2_avg * s.x.squaredNorm();
  const double H2 = theta_avg * s.q.dot(j_apply(s.x));
  return {H1 + H2 + field.phi(s.x), H1, H2};
}

NonlinearTerm potential_force(const PotentialField& field, double sign) {
  NonlinearTerm nl;
  nl.dim = 4;
  nl.g = [field, sign](const double* U, double* out) {
    const Vec2 gr = field.grad(Vec2(U[0], U[1]));
    out[0] = out[1] = 0.0;
    out[2] = sign * gr[0];
    out[3] = sign * gr[1];
  };
  nl.jacobian = [field, sign](const double* U, double* jac) {
    const Mat2 h = field.hess(Vec2(U[0], U[1]));
    for (int i = 0; i < 16; ++i) jac[i] = 0.0;
    jac[2 * 4 + 0] = sign * h(0, 0);
    jac[2 * 4 + 1] = sign * h(0, 1);
    jac[3 * 4 + 0] = sign * h(1, 0);
    jac[3 * 4 + 1] = sign * h(1, 1);
  };
  return nl;
}

NonlinearTerm trig_cubic_force() {
  NonlinearTerm nl;
  nl.dim = 4;
  nl.g = [](const double* U, double* out) {
    const double x1 = U[0], x2 = U[1];
    out[0] = out[1] = 0.0;
    out[2] = std::cos(x1) * std::sin(x2) + x1 + x1 * x1 * x1;
    out[3] = std::sin(x1) * std::cos(x2) + x2 + x2 * x2 * x2;
  };
  nl.jacobian = [](const double* U, double* jac) {
    const double x1 = U[0], x2 = U[1];
    const double s1 = std::sin(x1), c1 = std::cos(x1), s2 = std::sin(x2), c2 = std::cos(x2);
    for (int i = 0; i < 16; ++i) jac[i] = 0.0;
    jac[8] = -s1 * s2 + 1.0 + 3.0 * x1 * x1;
    jac[9] = c1 * c2;
    jac[12] = c1 * c2;
    jac[13] = -s1 * s2 + 1.0 + 3.0 * x2 * x2;
  };
  return nl;
}

}  // namespace uaosc
