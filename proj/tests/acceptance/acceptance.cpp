// Acceptance runner: one PASS/FAIL line per criterion.  Every tolerance and
// every experiment parameter is fixed here, independent of configs/.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uaosc/harness.hpp"
#include "uaosc/osc_quadrature.hpp"
#include "uaosc/reference.hpp"

using namespace uaosc;

namespace {

const Vec4 kU0(0.5, 0.25, -0.25, 0.5);
const std::vector<double> kEpsGrid{1, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
const std::vector<double> kDtGrid{1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256, 1.0 / 512, 1.0 / 1024};

struct Outcome {
  bool pass = true;
  std::string detail;

  void gate(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [miss]");
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

ConvergenceSpec grid_spec(ProblemKind problem, const std::string& profile) {
  ConvergenceSpec s;
  s.problem = problem;
  s.profile = profile;
  s.B = 1.0;
  s.eps = kEpsGrid;
  s.dt = kDtGrid;
  s.T = 1.0;
  s.U0 = problem == ProblemKind::scalar_linear ? VecX(VecX::Ones(1)) : VecX(kU0);
  return s;
}

void slope_gate(Outcome& o, const ConvergenceTable& t, double target, double tol) {
  o.gate(std::abs(t.uniform.slope - target) <= tol,
         t.scheme + " slope " + num(t.uniform.slope) + " (res " + num(t.uniform.residual) + ") in " + num(target) +
             "+-" + num(tol));
}

Outcome c1() {
  Outcome o;
  auto s = grid_spec(ProblemKind::particle_linear, "1+cos");
  s.scheme = "explicit1";
  slope_gate(o, run_convergence(s), 1.0, 0.2);
  return o;
}

Outcome c2() {
  Outcome o;
  const auto tables = run_convergence(grid_spec(ProblemKind::particle_linear, "cos"), {"midpoint_ua", "midpoint_naive"});
  slope_gate(o, tables[0], 2.0, 0.2);
  o.gate(tables[1].uniform.slope <= 1.3, "midpoint_naive slope " + num(tables[1].uniform.slope) + " <= 1.3");
  return o;
}

Outcome c3() {
  Outcome o;
  auto s = grid_spec(ProblemKind::scalar_linear, "2+0.5cos2");
  s.scheme = "explicit4";
  slope_gate(o, run_convergence(s), 4.0, 0.4);
  return o;
}

Outcome c4() {
  Outcome o;
  auto s = grid_spec(ProblemKind::particle_nonlinear, "cos");
  s.scheme = "nl_order2";
  slope_gate(o, run_convergence(s), 2.0, 0.2);
  return o;
}

Outcome c5() {
  Outcome o;
  const auto tables =
      run_convergence(grid_spec(ProblemKind::particle_sav, "cos"), {"sav_ua_choice1", "sav_ua_choice2"});
  for (const auto& t : tables) slope_gate(o, t, 2.0, 0.25);
  return o;
}

Outcome c6() {
  Outcome o;
  const auto field = PotentialField::trig_quartic();
  const auto cosine = PeriodicProfile::from_id("cos");
  for (auto mode : {BbarMode::taylor, BbarMode::extrapolation}) {
    const auto s = run_energy_sav_averaged(cosine, 1.0, field, kU0, 0.1, 100.0, mode);
    o.gate(s.max_rel_drift_Hbar <= 1e-11,
           std::string(mode == BbarMode::taylor ? "taylor" : "extrapolation") + " Hbar drift " +
               num(s.max_rel_drift_Hbar) + " <= 1e-11");
  }
  const auto lin = run_energy_linear_averaged(PeriodicProfile::from_id("1+cos"), 1.0, kU0, 0.1, 100.0);
  o.gate(lin.max_rel_drift_H1 <= 1e-12 && lin.max_rel_drift_H2 <= 1e-12,
         "H1 drift " + num(lin.max_rel_drift_H1) + ", H2 drift " + num(lin.max_rel_drift_H2) + " <= 1e-12");
  return o;
}

Outcome c7() {
  Outcome o;
  // theta = cos s + cos 2s, B = 1: <theta> = 0 and <theta^2> = 1 exactly in binary, so
  // <A> = [[0, I], [-I, 0]] is skew to the last bit (B = sqrt 2 with theta = cos is not)
  const PeriodicProfile prof(kTwoPi, {{-2, 0.5}, {-1, 0.5}, {1, 0.5}, {2, 0.5}});
  const Problem pb = make_problem(ProblemKind::particle_linear, prof, 1.0, 0.01);
  const MatX Abar = pb.sys.averaged();
  o.gate((Abar + Abar.transpose()).norm() == 0.0, "<A> skew (" + num((Abar + Abar.transpose()).norm()) + ")");
  const double dt = 0.1;
  const auto traj = run_scheme("averaged_midpoint", pb, kU0, dt, 1e4 * dt, true);
  double worst = 0.0;
  for (const VecX& U : traj) worst = std::max(worst, std::abs(U.norm() / kU0.norm() - 1.0));
  o.gate(traj.size() == 10001 && worst <= 1e-13, "max |U_n|/|U_0| - 1 = " + num(worst) + " over 1e4 steps <= 1e-13");
  return o;
}

Outcome c8() {
  Outcome o;
  const double dt = 0.01, T = 1.0;
  const std::vector<double> eps{1e-2, 1e-3, 1e-4};
  std::vector<double> gaps;
  const auto prof = PeriodicProfile::from_id("1+cos");
  for (double e : eps) {
    const Problem pb = make_problem(ProblemKind::particle_linear, prof, 1.0, e);
    const VecX ua = run_scheme("midpoint_ua", pb, kU0, dt, T).back();
    const VecX avg = run_scheme("averaged_midpoint", pb, kU0, dt, T).back();
    gaps.push_back((ua - avg).norm());
  }
  const SlopeFit f = fit_loglog(eps, gaps);
  o.gate(f.slope >= 0.9, "gaps " + num(gaps[0]) + ", " + num(gaps[1]) + ", " + num(gaps[2]) + ": slope " +
                             num(f.slope) + " (res " + num(f.residual) + ") >= 0.9");
  return o;
}

Outcome c9() {
  Outcome o;
  const auto r = run_spectrum(PeriodicProfile::from_id("1+cos"), 1.0, 0.1, kU0, 0.001, 100.0, false);
  for (double target : {0.2247, 2.2247}) {
    double best = 1e300;
    for (const auto& p : r.peaks) best = std::min(best, std::abs(p.omega - target));
    o.gate(best <= r.bin_width, "peak near " + num(target) + " off by " + num(best) + " <= bin " + num(r.bin_width));
  }
  o.gate(r.matched, "leading peaks matched");
  for (double B : {0.5, 1.0, 5.0}) {
    const auto s = run_spectrum(PeriodicProfile::from_id("cos"), B, 0.1, kU0, 0.001, 100.0, false);
    const bool ok = !s.peaks.empty() && std::abs(s.peaks[0].omega - 0.70711 * B) <= s.bin_width;
    o.gate(ok, "cos B=" + num(B) + " peak " + (s.peaks.empty() ? std::string("none") : num(s.peaks[0].omega)) +
                   " vs " + num(0.70711 * B));
  }
  return o;
}

Outcome c10() {
  Outcome o;
  const auto rows = run_confinement(PeriodicProfile::from_id("cos"), PotentialField::trig_quartic(), {0.5, 1.0, 5.0},
                                    {0.1, 0.001}, Vec4(0.1, 0.0, 1.0, 1.0), 0.1, 100.0);
  std::string ext;
  for (const auto& r : rows) ext += (ext.empty() ? "" : ", ") + ("B=" + num(r.B) + "/eps=" + num(r.eps) + ":" + num(r.max_extent));
  o.gate(confinement_monotone(rows), "max|x| strictly decreasing in B (" + ext + ")");
  return o;
}

LandauReport landau(bool two_d, double k, double B) {
  LandauSpec s;
  s.two_d = two_d;
  s.k = k;
  s.B = B;
  s.n1 = 64;
  s.particles_per_cell = 50;
  s.dt = 0.01;
  s.T = 30.0;
  s.eps = 1e-3;
  s.profile = "cos";
  return run_landau(s);
}

std::string rate_text(const LandauReport& r) { return r.fit_ok ? num(r.fit.rate) : "no fit (" + r.fit_error + ")"; }

Outcome c11() {
  Outcome o;
  for (double k : {0.5, 0.4}) {
    const auto r = landau(false, k, 0.0);
    o.gate(r.fit_ok && r.relative_gap <= 0.15,
           "1D k=" + num(k) + " rate " + rate_text(r) + " vs " + num(r.oracle_rate) + ", gap " + num(r.relative_gap) +
               " <= 0.15");
  }
  const auto r = landau(true, 0.5, 0.0);
  o.gate(r.fit_ok && std::abs(r.fit.rate + 0.15) <= 0.2 * 0.15, "2D k=0.5 rate " + rate_text(r) + " in -0.15+-20%");
  return o;
}

Outcome c12() {
  Outcome o;
  const auto base = landau(false, 0.3, 0.0);
  if (!base.fit_ok) {
    o.gate(false, "B=0 reference has no fit (" + base.fit_error + ")");
    return o;
  }
  for (double B : {0.01, 0.05, 0.1, 0.15}) {
    const auto r = landau(false, 0.3, B);
    const DampingClass want = B < 0.075 ? DampingClass::damping : DampingClass::disintegrated;
    const DampingClass got = classify_damping(r, base.fit.rate);
    o.gate(got == want, "B=" + num(B) + " rate " + rate_text(r) + " (B=0: " + num(base.fit.rate) + ") " +
                            to_string(got));
  }
  return o;
}

Outcome c13() {
  Outcome o;
  double worst = 0.0;
  for (const char* id : {"cos", "1+cos", "2+0.5cos2"}) {
    const auto prof = PeriodicProfile::from_id(id);
    for (double eps : {1.0, 0.1, 0.01})
      for (double t_n : {0.0, 0.37}) {
        const OscPoly th = profile_as_oscpoly(prof, 1, eps);
        const ScalarFn f = [&prof, eps](double t) { return cplx(prof(t / eps), 0.0); };
        for (int depth = 1; depth <= 3; ++depth) {
          const cplx exact = nested_integral(std::vector<OscPoly>(std::size_t(depth), th), t_n, 0.1);
          const cplx quad = quadrature_oracle(std::vector<ScalarFn>(std::size_t(depth), f), t_n, t_n + 0.1);
          worst = std::max(worst, std::abs(exact - quad) / std::abs(quad));
        }
      }
  }
  o.gate(worst <= 1e-8, "nested integrals k<=3 vs quadrature, worst rel " + num(worst) + " <= 1e-8");
  for (const char* id : {"cos", "1+cos"}) {
    const auto rows = run_lemma_check(PeriodicProfile::from_id(id), 0.1, {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6},
                                      {0.2, 0.1, 0.05, 0.025}, 1e-5);
    for (const auto& r : rows)
      o.gate(r.eps_fit.slope >= 0.85 && r.eps_fit.slope <= 1.15 && r.constant_spread <= 10.0,
             std::string(id) + " id" + std::to_string(r.id) + " eps slope " + num(r.eps_fit.slope) + ", spread " +
                 num(r.constant_spread) + ", dt exponent " + num(r.dt_fit.slope) + " (stated " +
                 std::to_string(r.dt_power) + ")");
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria runner"};
  std::vector<int> only;
  app.add_option("--only", only, "criterion numbers to run (default: all)")->check(CLI::Range(1, 13));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::function<Outcome()>> criteria{c1, c2, c3, c4, c5, c6, c7, c8, c9, c10, c11, c12, c13};
  if (only.empty())
    for (int i = 1; i <= 13; ++i) only.push_back(i);
  bool all = true;
  for (int n : only) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[std::size_t(n - 1)]();
    } catch (const std::exception& e) {
      o.gate(false, std::string("error: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %d: %s (%.1f s) %s\n", n, o.pass ? "PASS" : "FAIL", secs, o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
