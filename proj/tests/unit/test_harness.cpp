#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "uaosc/harness.hpp"

using namespace uaosc;

namespace {

// |E|^2 of a damped Langmuir wave: exp(2 g t) cos^2(w t)
void synthetic(double gamma, double omega, std::vector<double>& t, std::vector<double>& e) {
  t.clear();
  e.clear();
  for (int n = 0; n <= 3000; ++n) {
    const double s = 0.01 * n;
    t.push_back(s);
    e.push_back(std::exp(2.0 * gamma * s) * std::pow(std::cos(omega * s), 2) + 1e-300);
  }
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

}  // namespace

TEST_CASE("line fits") {
  const std::vector<double> x{1, 2, 3, 4};
  const auto f = fit_line(x, {3, 5, 7, 9});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.residual <= 1e-12);
  const auto g = fit_loglog({0.1, 0.01, 0.001}, {2e-2, 2e-4, 2e-6});
  CHECK(g.slope == doctest::Approx(2.0));
}

TEST_CASE("decay fit on synthetic energies") {
  std::vector<double> t, e;
  synthetic(-0.1533, 1.4156, t, e);
  const DecayFit f = fit_decay(t, e);
  CHECK(f.rate == doctest::Approx(-0.1533).epsilon(1e-3 / 0.1533));
  CHECK(f.peak_times.size() >= 4);
  for (std::size_t i = 1; i < f.peak_times.size(); ++i)
    CHECK(f.peak_times[i] - f.peak_times[i - 1] == doctest::Approx(M_PI / 1.4156).epsilon(0.01));

  synthetic(0.0, 1.4156, t, e);
  CHECK(std::abs(fit_decay_rate(t, e)) <= 1e-4);
  synthetic(0.05, 1.0, t, e);
  CHECK(fit_decay_rate(t, e) == doctest::Approx(0.05).epsilon(0.02));

  std::vector<double> flat(t.size(), 1.0);
  for (std::size_t i = 0; i < t.size(); ++i) flat[i] = std::exp(-t[i]);
  CHECK_THROWS_AS(fit_decay(t, flat), TooFewPeaksError);
  CHECK_THROWS_AS(fit_decay({0.0, 1.0}, {1.0}), InvalidArgument);
}

TEST_CASE("DFT peaks") {
  std::vector<double> s;
  const double dt = 0.05;
  for (int n = 0; n < 4096; ++n) s.push_back(std::cos(0.5 * n * dt) + 0.3 * std::sin(2.2 * n * dt));
  const auto peaks = dft_peaks(s, dt);
  REQUIRE(peaks.size() >= 2);
  const double bin = kTwoPi / (4096 * dt);
  CHECK(std::abs(peaks[0].omega - 0.5) <= bin);
  CHECK(std::abs(peaks[1].omega - 2.2) <= bin);
  CHECK(peaks[0].magnitude > peaks[1].magnitude);
  CHECK_THROWS_AS(dft_peaks({1, 2, 3}, 0.1), InvalidArgument);
}

TEST_CASE("damping classifier") {
  LandauReport r;
  r.fit_ok = true;
  r.fit.rate = -0.15;
  CHECK(classify_damping(r, -0.1533) == DampingClass::damping);
  r.fit.rate = -0.05;
  CHECK(classify_damping(r, -0.1533) == DampingClass::disintegrated);
  r.fit.rate = 0.02;
  CHECK(classify_damping(r, -0.1533) == DampingClass::disintegrated);
  r.fit_ok = false;
  r.fit.rate = -0.3;
  CHECK(classify_damping(r, -0.1533) == DampingClass::disintegrated);
  CHECK(to_string(DampingClass::damping) != to_string(DampingClass::disintegrated));
}

TEST_CASE("confinement monotonicity and its negative control") {
  std::vector<ConfinementRow> rows{{1.0, 0.1, 3.0}, {3.0, 0.1, 2.0}, {5.0, 0.1, 1.0}, {5.0, 0.01, 0.9},
                                   {1.0, 0.01, 2.5}};
  CHECK(confinement_monotone(rows));
  rows.push_back({3.0, 0.01, 2.6});
  CHECK_FALSE(confinement_monotone(rows));
  CHECK_FALSE(confinement_monotone({{1.0, 0.1, 2.0}, {2.0, 0.1, 2.0}}));
}

TEST_CASE("problem and scheme registry") {
  for (auto k : {ProblemKind::particle_linear, ProblemKind::scalar_linear, ProblemKind::particle_nonlinear,
                 ProblemKind::particle_sav})
    CHECK(problem_from_id(to_string(k)) == k);
  CHECK_THROWS(problem_from_id("bogus"));
  for (const char* s : {"explicit1", "explicit4", "midpoint_naive", "midpoint_ua", "averaged_midpoint",
                        "averaged_exp2", "nl_order2", "sav_ua_choice1", "sav_avg_extrapolation"})
    CHECK(scheme_known(s));
  CHECK_FALSE(scheme_known("rk4"));
  const Problem pb = make_problem(ProblemKind::particle_linear, PeriodicProfile::from_id("cos"), 1.0, 0.1);
  CHECK_THROWS_AS(run_scheme("explicit1", pb, Vec4(1, 0, 0, 1), 0.3, 1.0), InvalidArgument);
  const auto traj = run_scheme("explicit1", pb, Vec4(1, 0, 0, 1), 0.25, 1.0, true);
  CHECK(traj.size() == 5);
}

TEST_CASE("convergence driver and CSV") {
  ConvergenceSpec spec;
  spec.scheme = "explicit1";
  spec.profile = "1+cos";
  spec.eps = {0.1, 0.01};
  spec.dt = {0.1, 0.05, 0.025};
  spec.T = 0.5;
  spec.U0 = Vec4(0.5, 0.25, -0.25, 0.5);
  const auto table = run_convergence(spec);
  CHECK(table.rows.size() == 6);
  CHECK(table.max_err.size() == 3);
  CHECK(table.uniform.slope == doctest::Approx(1.0).epsilon(0.25));
  std::ostringstream os;
  write_convergence_csv(os, table);
  CHECK(first_line(os.str()) == "scheme,eps,dt,err,slope");
}

TEST_CASE("energy audits and the explicit negative control") {
  const auto prof = PeriodicProfile::from_id("1+cos");
  const Vec4 U0(0.5, 0.25, -0.25, 0.5);
  const auto mid = run_energy_linear_averaged(prof, 1.0, U0, 0.1, 50.0, "averaged_midpoint");
  CHECK(mid.max_rel_drift_H1 <= 1e-12);
  CHECK(mid.max_rel_drift_H2 <= 1e-12);
  const auto exp1 = run_energy_linear_averaged(prof, 1.0, U0, 0.1, 50.0, "averaged_exp1");
  CHECK(exp1.max_rel_drift_H1 >= 1e-2);
  std::ostringstream os;
  write_energy_csv(os, mid);
  CHECK(first_line(os.str()) == "t,Hbar,H1,H2");
  CHECK(mid.t.size() == 501);
}

TEST_CASE("spectrum report matches averaged frequencies") {
  const auto rep = run_spectrum(PeriodicProfile::from_id("1+cos"), 1.0, 0.01, Vec4(0.5, 0.25, -0.25, 0.5), 0.05,
                                400.0, false);
  CHECK(rep.matched);
  REQUIRE(rep.expected.size() == 2);
  CHECK(rep.peaks_full.empty());
}

TEST_CASE("PIC CSV headers") {
  PicRun run{{0.0, 0.1}, {1.0, 0.9}};
  std::ostringstream a, b;
  write_pic_energy_csv(a, run);
  CHECK(first_line(a.str()) == "t,elec_energy");
  ParticleEnsemble ens;
  ens.resize(2);
  write_snapshot_csv(b, ens);
  CHECK(first_line(b.str()) == "x1,x2,q1,q2");
}
