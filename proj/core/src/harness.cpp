#include "uaosc/harness.hpp"

#include <fftw3.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <iomanip>
#include <limits>
#include <memory>
#include <mutex>
#include <ostream>

namespace uaosc {

// ------------------------------------------------------------------ fitting

SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw InvalidArgument("fit_line needs at least two points");
  const double n = double(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw InvalidArgument("fit_line: degenerate abscissae");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (f.intercept + f.slope * x[i]);
    ss += r * r;
  }
  f.residual = std::sqrt(ss / n);
  return f;
}

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw InvalidArgument("fit_loglog: non-positive value");
    lx.push_back(std::log(x[i]));
    ly.push_back(std::log(y[i]));
  }
  return fit_line(lx, ly);
}

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& energy, const DecayFitOptions& opt) {
  if (t.size() != energy.size()) throw InvalidArgument("fit_decay: size mismatch");
  DecayFit out;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t[i] < opt.t_begin || t[i] > opt.t_end) continue;
    while (t[lo] < t[i] - opt.neighbourhood) ++lo;
    bool peak = energy[i] > 0.0;
    for (std::size_t j = lo; j < t.size() && t[j] <= t[i] + opt.neighbourhood && peak; ++j)
      if (energy[j] > energy[i]) peak = false;
    if (peak) {
      out.peak_times.push_back(t[i]);
      out.peak_values.push_back(std::log(energy[i]));
    }
  }
  if (int(out.peak_times.size()) < opt.min_peaks)
    throw TooFewPeaksError("fit_decay: " + std::to_string(out.peak_times.size()) + " peaks in window");
  const SlopeFit f = fit_line(out.peak_times, out.peak_values);
  out.rate = opt.factor * f.slope;
  out.residual = f.residual;
  return out;
}

double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& energy, const DecayFitOptions& opt) {
  return fit_decay(t, energy, opt).rate;
}

// ------------------------------------------------------------------ spectra

std::vector<SpectralPeak> dft_peaks(const std::vector<double>& samples, double dt, double factor) {
  const int n = int(samples.size());
  if (n < 8) throw InvalidArgument("dft_peaks: too few samples");
  std::vector<double> in(samples);
  std::vector<fftw_complex> out(n / 2 + 1);
  // planner calls are not thread safe
  static std::mutex planner;
  fftw_plan plan;
  {
    std::lock_guard lock(planner);
    plan = fftw_plan_dft_r2c_1d(n, in.data(), out.data(), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner);
    fftw_destroy_plan(plan);
  }
  std::vector<double> mag(n / 2 + 1);
  for (int j = 0; j <= n / 2; ++j) mag[j] = std::hypot(out[j][0], out[j][1]);
  std::vector<double> sorted(mag.begin() + 1, mag.end());
  std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
  const double median = sorted[sorted.size() / 2];
  std::vector<SpectralPeak> peaks;
  const double dw = kTwoPi / (n * dt);
  for (int j = 1; j < n / 2; ++j)
    if (mag[j] > mag[j - 1] && mag[j] >= mag[j + 1] && mag[j] > factor * median) peaks.push_back({j * dw, mag[j]});
  std::sort(peaks.begin(), peaks.end(), [](const auto& a, const auto& b) { return a.magnitude > b.magnitude; });
  return peaks;
}

// ------------------------------------------------------------------ problems

ProblemKind problem_from_id(const std::string& id) {
  if (id == "particle_linear") return ProblemKind::particle_linear;
  if (id == "scalar_linear") return ProblemKind::scalar_linear;
  if (id == "particle_nonlinear") return ProblemKind::particle_nonlinear;
  if (id == "particle_sav") return ProblemKind::particle_sav;
  throw InvalidArgument("unknown problem id: " + id);
}

std::string to_string(ProblemKind kind) {
  switch (kind) {
    case ProblemKind::particle_linear: return "particle_linear";
    case ProblemKind::scalar_linear: return "scalar_linear";
    case ProblemKind::particle_nonlinear: return "particle_nonlinear";
    case ProblemKind::particle_sav: return "particle_sav";
  }
  return "?";
}

Problem make_problem(ProblemKind kind, const PeriodicProfile& profile, double B, double eps,
                     const std::string& potential_id) {
  if (kind == ProblemKind::scalar_linear) {
    LinearOscSystem sys(profile.scaled(B), eps, {MatX::Zero(1, 1), MatX::Identity(1, 1)});
    return {kind, profile, B, eps, std::move(sys), NonlinearTerm::zero(1), PotentialField::zero()};
  }
  LinearOscSystem sys = build_A(profile, B, eps, ModelScaling::normalized);
  switch (kind) {
    case ProblemKind::particle_nonlinear:
      return {kind, profile, B, eps, std::move(sys), trig_cubic_force(), PotentialField::zero()};
    case ProblemKind::particle_sav: {
      PotentialField field = PotentialField::from_id(potential_id);
      NonlinearTerm nl = potential_force(field, -1.0);
      return {kind, profile, B, eps, std::move(sys), std::move(nl), std::move(field)};
    }
    default:
      return {kind, profile, B, eps, std::move(sys), NonlinearTerm::zero(4), PotentialField::zero()};
  }
}

namespace {

const std::vector<std::string>& scheme_names() {
  static const std::vector<std::string> names{
      "explicit1",     "explicit2",     "explicit3",     "explicit4",      "midpoint_naive",
      "midpoint_ua",   "particle_midpoint", "averaged_midpoint", "averaged_exp1", "averaged_exp2",
      "averaged_exp3", "averaged_exp4", "nl_order1",     "nl_order2",      "sav_ua_choice1",
      "sav_ua_choice2", "sav_avg_taylor", "sav_avg_extrapolation"};
  return names;
}

long step_count(double dt, double T) {
  if (!(dt > 0.0) || !(T > 0.0)) throw InvalidArgument("run_scheme: dt and T must be positive");
  const double r = T / dt;
  const long N = std::lround(r);
  if (N < 1 || std::abs(r - double(N)) > 1e-9 * r) throw InvalidArgument("run_scheme: dt must divide T");
  return N;
}

int trailing_order(const std::string& s) { return s.back() - '0'; }

}  // namespace

bool scheme_known(const std::string& scheme) {
  const auto& n = scheme_names();
  return std::find(n.begin(), n.end(), scheme) != n.end();
}

std::vector<VecX> run_scheme(const std::string& scheme, const Problem& pb, const VecX& U0, double dt, double T,
                             bool trajectory) {
  if (!scheme_known(scheme)) throw InvalidArgument("unknown scheme: " + scheme);
  const long N = step_count(dt, T);
  std::vector<VecX> out;
  if (trajectory) out.reserve(N + 1);
  if (trajectory) out.push_back(U0);
  auto record = [&](const VecX& U) {
    if (trajectory) out.push_back(U);
  };

  const bool sav = scheme.rfind("sav_", 0) == 0;
  const bool particle_blocks = sav || scheme == "particle_midpoint";
  if (particle_blocks && U0.size() != 4) throw InvalidArgument(scheme + " needs a 4-dimensional state");

  if (sav) {
    const double a1 = pb.B * pb.profile.mean();
    const double a2 = pb.B * pb.B * power_average(pb.profile, 2);
    SavState s = init_sav(U0.head<2>(), U0.tail<2>(), pb.field);
    std::unique_ptr<ParticleIntegrals> ints;
    if (scheme.rfind("sav_ua", 0) == 0)
      ints = std::make_unique<ParticleIntegrals>(pb.profile, coupling(pb.B, ModelScaling::normalized), pb.eps, dt);
    for (long n = 0; n < N; ++n) {
      const StepContext ctx{n * dt, dt, 2};
      if (scheme == "sav_ua_choice1") s = step_sav_ua(s, *ints, pb.field, ctx.t_n, BMode::choice1);
      else if (scheme == "sav_ua_choice2") s = step_sav_ua(s, *ints, pb.field, ctx.t_n, BMode::choice2);
      else if (scheme == "sav_avg_taylor") s = step_sav_averaged(s, pb.field, a1, a2, ctx, BbarMode::taylor);
      else s = step_sav_averaged(s, pb.field, a1, a2, ctx, BbarMode::extrapolation);
      record(s.packed());
    }
    if (!trajectory) out.push_back(s.packed());
    return out;
  }

  if (scheme == "particle_midpoint") {
    const ParticleIntegrals ints(pb.profile, coupling(pb.B, ModelScaling::normalized), pb.eps, dt);
    Vec4 U = U0;
    for (long n = 0; n < N; ++n) {
      U = step_particle_midpoint(ints.blocks(n * dt), U);
      record(U);
    }
    if (!trajectory) out.push_back(U);
    return out;
  }

  VecX U = U0;
  for (long n = 0; n < N; ++n) {
    StepContext ctx{n * dt, dt, 1};
    if (scheme.rfind("explicit", 0) == 0) {
      ctx.order = trailing_order(scheme);
      U = step_explicit(pb.sys, ctx, U);
    } else if (scheme == "midpoint_naive") {
      U = step_midpoint_naive(pb.sys, ctx, U);
    } else if (scheme == "midpoint_ua") {
      U = step_midpoint_ua(pb.sys, ctx, U);
    } else if (scheme == "averaged_midpoint") {
      U = step_averaged_midpoint(pb.sys, ctx, U);
    } else if (scheme.rfind("averaged_exp", 0) == 0) {
      ctx.order = trailing_order(scheme);
      U = step_averaged_exp_taylor(pb.sys, ctx, U);
    } else if (scheme == "nl_order1") {
      U = step_nl_order1(pb.sys, pb.nl, ctx, U);
    } else {
      ctx.order = 2;
      U = step_nl_order2(pb.sys, pb.nl, ctx, U);
    }
    record(U);
  }
  if (!trajectory) out.push_back(U);
  return out;
}

// ------------------------------------------------------------------ convergence

std::vector<ConvergenceTable> run_convergence(const ConvergenceSpec& spec, const std::vector<std::string>& schemes) {
  if (spec.eps.empty() || spec.dt.size() < 2) throw InvalidArgument("convergence: empty eps list or < 2 dt values");
  if (schemes.empty()) throw InvalidArgument("convergence: no scheme");
  for (const auto& sc : schemes)
    if (!scheme_known(sc)) throw InvalidArgument("unknown scheme: " + sc);
  const PeriodicProfile profile = PeriodicProfile::from_id(spec.profile);
  const std::size_t ne = spec.eps.size(), nd = spec.dt.size(), ns = schemes.size();
  // err[scheme][eps][dt]
  std::vector<std::vector<std::vector<double>>> err(ns, std::vector<std::vector<double>>(ne, std::vector<double>(nd)));
  std::vector<double> gate(ne, 0.0);
  std::vector<std::exception_ptr> failures(ne);

#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < ne; ++i) {
    try {
      const Problem pb = make_problem(spec.problem, profile, spec.B, spec.eps[i], spec.potential);
      const std::vector<double> times{spec.T};
      const bool linear =
          spec.problem == ProblemKind::particle_linear || spec.problem == ProblemKind::scalar_linear;
      const ReferenceResult ref = linear ? reference_solve_linear(pb.sys, spec.U0, times, spec.ref)
                                         : reference_solve(make_ode(pb.sys, &pb.nl), spec.U0, times, spec.ref);
      gate[i] = ref.gate_change;
      const VecX& exact = ref.states.back();
      for (std::size_t k = 0; k < ns; ++k)
        for (std::size_t j = 0; j < nd; ++j) {
          const VecX U = run_scheme(schemes[k], pb, spec.U0, spec.dt[j], spec.T).back();
          err[k][i][j] = (U - exact).norm();
        }
    } catch (...) {
      failures[i] = std::current_exception();
    }
  }
  for (const auto& f : failures)
    if (f) std::rethrow_exception(f);

  std::vector<ConvergenceTable> out;
  for (std::size_t k = 0; k < ns; ++k) {
    ConvergenceTable tab;
    tab.scheme = schemes[k];
    tab.max_err.assign(nd, 0.0);
    for (std::size_t i = 0; i < ne; ++i) {
      for (std::size_t j = 0; j < nd; ++j) {
        tab.rows.push_back({spec.eps[i], spec.dt[j], err[k][i][j]});
        tab.max_err[j] = std::max(tab.max_err[j], err[k][i][j]);
      }
      tab.per_eps.push_back(fit_loglog(spec.dt, err[k][i]));
      tab.worst_gate = std::max(tab.worst_gate, gate[i]);
    }
    tab.uniform = fit_loglog(spec.dt, tab.max_err);
    out.push_back(std::move(tab));
  }
  return out;
}

ConvergenceTable run_convergence(const ConvergenceSpec& spec) { return run_convergence(spec, {spec.scheme}).front(); }

void write_convergence_csv(std::ostream& os, const ConvergenceTable& table) {
  os << "scheme,eps,dt,err,slope\n" << std::setprecision(17);
  std::size_t nd = table.max_err.size();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    os << table.scheme << ',' << row.eps << ',' << row.dt << ',' << row.err << ',' << table.per_eps[r / nd].slope
       << '\n';
  }
  for (std::size_t j = 0; j < nd; ++j)
    os << table.scheme << ",max," << table.rows[j].dt << ',' << table.max_err[j] << ',' << table.uniform.slope
       << '\n';
}

// ------------------------------------------------------------------ energy

namespace {

double rel_drift(const std::vector<double>& v) {
  double m = 0.0;
  const double ref = std::abs(v.front());
  for (double x : v) m = std::max(m, std::abs(x - v.front()));
  return ref > 0.0 ? m / ref : m;
}

}  // namespace

EnergySeries run_energy_sav_averaged(const PeriodicProfile& profile, double B, const PotentialField& field,
                                     const Vec4& U0, double dt, double T, BbarMode mode) {
  const long N = step_count(dt, T);
  const double a1 = B * profile.mean();
  const double a2 = B * B * power_average(profile, 2);
  SavState s = init_sav(U0.head<2>(), U0.tail<2>(), field);
  EnergySeries es;
  auto push = [&](double t) {
    const Hamiltonians h = hamiltonians({s.x, s.q}, PotentialField::zero(), a1, a2);
    es.t.push_back(t);
    es.Hbar.push_back(hamiltonian_bar(s, a1, a2));
    es.H1.push_back(h.H1);
    es.H2.push_back(h.H2);
  };
  push(0.0);
  for (long n = 0; n < N; ++n) {
    s = step_sav_averaged(s, field, a1, a2, {n * dt, dt, 2}, mode);
    if (!std::isfinite(s.log_r)) throw Error("SAV state became non-finite");
    push((n + 1) * dt);
  }
  es.max_rel_drift_Hbar = rel_drift(es.Hbar);
  es.max_rel_drift_H1 = rel_drift(es.H1);
  es.max_rel_drift_H2 = rel_drift(es.H2);
  return es;
}

EnergySeries run_energy_linear_averaged(const PeriodicProfile& profile, double B, const Vec4& U0, double dt, double T,
                                        const std::string& scheme) {
  const Problem pb = make_problem(ProblemKind::particle_linear, profile, B, 1.0);
  const double a1 = B * profile.mean();
  const double a2 = B * B * power_average(profile, 2);
  const auto traj = run_scheme(scheme, pb, U0, dt, T, true);
  EnergySeries es;
  for (std::size_t n = 0; n < traj.size(); ++n) {
    const GuidingState g = GuidingState::unpack(traj[n]);
    const Hamiltonians h = hamiltonians(g, PotentialField::zero(), a1, a2);
    es.t.push_back(n * dt);
    es.Hbar.push_back(h.H);
    es.H1.push_back(h.H1);
    es.H2.push_back(h.H2);
  }
  es.max_rel_drift_Hbar = rel_drift(es.Hbar);
  es.max_rel_drift_H1 = rel_drift(es.H1);
  es.max_rel_drift_H2 = rel_drift(es.H2);
  return es;
}

void write_energy_csv(std::ostream& os, const EnergySeries& s) {
  os << "t,Hbar,H1,H2\n" << std::setprecision(17);
  for (std::size_t i = 0; i < s.t.size(); ++i)
    os << s.t[i] << ',' << s.Hbar[i] << ',' << s.H1[i] << ',' << s.H2[i] << '\n';
}

// ------------------------------------------------------------------ spectrum

SpectrumReport run_spectrum(const PeriodicProfile& profile, double B, double eps, const Vec4& U0, double dt, double T,
                            bool with_full) {
  const Problem pb = make_problem(ProblemKind::particle_linear, profile, B, eps);
  SpectrumReport rep;
  rep.expected = averaged_frequencies(pb.sys);
  auto x1_series = [&](const std::string& scheme) {
    const auto traj = run_scheme(scheme, pb, U0, dt, T, true);
    std::vector<double> x1;
    x1.reserve(traj.size() - 1);
    for (std::size_t n = 0; n + 1 < traj.size(); ++n) x1.push_back(traj[n][0]);
    return x1;
  };
  const std::vector<double> xa = x1_series("averaged_midpoint");
  rep.bin_width = kTwoPi / (double(xa.size()) * dt);
  rep.peaks = dft_peaks(xa, dt);
  if (with_full) rep.peaks_full = dft_peaks(x1_series("explicit1"), dt);

  rep.matched = rep.peaks.size() >= rep.expected.size();
  std::vector<bool> used(rep.expected.size(), false);
  for (std::size_t p = 0; rep.matched && p < rep.expected.size(); ++p) {
    bool hit = false;
    for (std::size_t e = 0; e < rep.expected.size() && !hit; ++e)
      if (!used[e] && std::abs(rep.peaks[p].omega - rep.expected[e]) <= rep.bin_width) used[e] = hit = true;
    rep.matched = hit;
  }
  return rep;
}

// ------------------------------------------------------------------ confinement

std::vector<ConfinementRow> run_confinement(const PeriodicProfile& profile, const PotentialField& field,
                                            const std::vector<double>& B_values, const std::vector<double>& eps_values,
                                            const Vec4& U0, double dt, double T) {
  std::vector<ConfinementRow> rows;
  for (double eps : eps_values)
    for (double B : B_values) {
      Problem pb = make_problem(ProblemKind::particle_linear, profile, B, eps);
      pb.field = field;
      double extent = 0.0;
      for (const VecX& U : run_scheme("sav_ua_choice2", pb, U0, dt, T, true))
        extent = std::max(extent, U.head<2>().norm());
      rows.push_back({B, eps, extent});
    }
  return rows;
}

bool confinement_monotone(const std::vector<ConfinementRow>& rows) {
  std::vector<double> eps;
  for (const auto& r : rows)
    if (std::find(eps.begin(), eps.end(), r.eps) == eps.end()) eps.push_back(r.eps);
  for (double e : eps) {
    std::vector<ConfinementRow> sub;
    for (const auto& r : rows)
      if (r.eps == e) sub.push_back(r);
    std::sort(sub.begin(), sub.end(), [](const auto& a, const auto& b) { return a.B < b.B; });
    for (std::size_t i = 1; i < sub.size(); ++i)
      if (!(sub[i].max_extent < sub[i - 1].max_extent)) return false;
  }
  return true;
}

// ------------------------------------------------------------------ Landau

void LandauSpec::apply_full_scale() {
  n1 = 128;
  n2 = two_d ? 128 : 4;
  particles_per_cell = 100;
}

PicConfig landau_config(const LandauSpec& spec) {
  PicConfig cfg;
  const int n2 = spec.n2 > 0 ? spec.n2 : (spec.two_d ? spec.n1 : 4);
  const double k2 = spec.two_d ? spec.k : kTwoPi;
  cfg.grid = Grid2D::make(spec.n1, n2, spec.k, k2);
  cfg.ic = {spec.xi, spec.two_d ? spec.xi : 0.0, spec.k, k2};
  if (spec.particles_per_cell < 1) throw InvalidArgument("need at least one particle per cell");
  cfg.n_particles = std::size_t(spec.particles_per_cell) * cfg.grid.nodes();
  cfg.spline_order = spec.spline_order;
  cfg.dt = spec.dt;
  cfg.T = spec.T;
  cfg.mag = {PeriodicProfile::from_id(spec.profile), spec.B, spec.eps};
  cfg.pusher = spec.pusher;
  cfg.seed = spec.seed;
  return cfg;
}

LandauReport run_landau(const LandauSpec& spec) {
  LandauReport rep;
  rep.run = run_pic(landau_config(spec));
  rep.oracle_rate = landau_dispersion_rate(spec.k).gamma;
  try {
    rep.fit = fit_decay(rep.run.t, rep.run.energy, spec.fit);
    rep.fit_ok = true;
    rep.relative_gap = std::abs(rep.fit.rate - rep.oracle_rate) / std::abs(rep.oracle_rate);
  } catch (const TooFewPeaksError& e) {
    rep.fit_error = e.what();
    rep.relative_gap = std::numeric_limits<double>::infinity();
  }
  return rep;
}

std::string to_string(DampingClass c) { return c == DampingClass::damping ? "damping" : "disintegrated"; }

DampingClass classify_damping(const LandauReport& run, double reference_rate) {
  if (!run.fit_ok) return DampingClass::disintegrated;
  return run.fit.rate <= 0.5 * reference_rate ? DampingClass::damping : DampingClass::disintegrated;
}

// ------------------------------------------------------------------ lemma

namespace {

// Residuals of the five identities at one t_n.
std::array<double, 5> lemma_residuals(const PeriodicProfile& profile, double eps, double t_n, double dt) {
  const OscPoly th = profile_as_oscpoly(profile, 1, eps);
  const OscPoly one = OscPoly::constant(th.omega(), 1.0);
  const double avg = profile.mean();
  const double t1 = t_n + dt;
  const OscPoly since_tn = OscPoly::term(th.omega(), 1.0, 1, 0) - OscPoly::constant(th.omega(), t_n);
  const OscPoly until_t1 = OscPoly::constant(th.omega(), t1) - OscPoly::term(th.omega(), 1.0, 1, 0);
  const std::array<OscPoly, 2> inner_theta{one, th};
  const std::array<OscPoly, 2> outer_theta{th, one};
  const double half = 0.5 * dt * dt * avg;
  return {
      std::abs(definite_integral(th, t_n, t1).real() - dt * avg),
      std::abs(nested_integral(inner_theta, t_n, dt).real() - half),
      // int_{t_n}^{t1} int_t^{t1} theta = int theta(s) (s - t_n) ds as an ordered pair
      std::abs(nested_integral(outer_theta, t_n, dt).real() - half),
      std::abs(definite_integral(th * since_tn, t_n, t1).real() - half),
      std::abs(definite_integral(th * until_t1, t_n, t1).real() - half),
  };
}

std::array<double, 5> lemma_envelope(const PeriodicProfile& profile, double eps, double dt, int samples) {
  std::array<double, 5> env{};
  for (int n = 0; n < samples; ++n) {
    const auto r = lemma_residuals(profile, eps, n * dt, dt);
    for (int i = 0; i < 5; ++i) env[i] = std::max(env[i], r[i]);
  }
  return env;
}

}  // namespace

std::vector<LemmaIdentity> run_lemma_check(const PeriodicProfile& profile, double dt, const std::vector<double>& eps,
                                           const std::vector<double>& dts, double dt_eps, int samples) {
  if (eps.size() < 2 || dts.size() < 2) throw InvalidArgument("lemma check needs at least two eps and two dt values");
  if (samples < 1) throw InvalidArgument("lemma check needs at least one sample");
  constexpr std::array<int, 5> powers{1, 2, 2, 1, 1};
  std::vector<LemmaIdentity> out(5);
  for (int i = 0; i < 5; ++i) {
    out[i].id = i + 1;
    out[i].dt_power = powers[i];
    out[i].eps = eps;
    out[i].dts = dts;
  }
  for (double e : eps) {
    const auto env = lemma_envelope(profile, e, dt, samples);
    for (int i = 0; i < 5; ++i) {
      out[i].envelope.push_back(env[i]);
      out[i].constant.push_back(env[i] / (std::pow(dt, powers[i]) * e));
    }
  }
  for (double h : dts) {
    const auto env = lemma_envelope(profile, dt_eps, h, samples);
    for (int i = 0; i < 5; ++i) out[i].dt_envelope.push_back(env[i]);
  }
  for (auto& li : out) {
    li.eps_fit = fit_loglog(li.eps, li.envelope);
    li.dt_fit = fit_loglog(li.dts, li.dt_envelope);
    const auto [lo, hi] = std::minmax_element(li.constant.begin(), li.constant.end());
    li.constant_spread = *hi / *lo;
  }
  return out;
}

}  // namespace uaosc
