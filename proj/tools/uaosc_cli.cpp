// Command-line driver for the numerical experiments.  Each subcommand reads a
// JSON config, writes CSV into --out and exits 0 iff its configured gates pass.

#include <omp.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "uaosc/harness.hpp"
#include "uaosc/osc_quadrature.hpp"
#include "uaosc/reference.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace uaosc;

namespace {

struct Common {
  std::string config;
  std::string out = ".";
  long seed = -1;
  int threads = 0;
  bool paper_scale = false;
};

json load_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config " + path);
  return json::parse(in, nullptr, true, true);
}

std::ofstream open_out(const Common& c, const std::string& name) {
  fs::create_directories(c.out);
  const fs::path p = fs::path(c.out) / name;
  std::ofstream os(p);
  if (!os) throw InvalidArgument("cannot write " + p.string());
  std::cout << "wrote " << p.string() << "\n";
  return os;
}

template <class T>
T get(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

std::vector<double> get_list(const json& j, const char* key, std::vector<double> fallback) {
  if (!j.contains(key)) return fallback;
  if (j.at(key).is_number()) return {j.at(key).get<double>()};
  return j.at(key).get<std::vector<double>>();
}

Vec4 get_vec4(const json& j, const char* key, const Vec4& fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = j.at(key).get<std::vector<double>>();
  if (v.size() != 4) throw InvalidArgument(std::string(key) + " must have 4 entries");
  return Vec4(v[0], v[1], v[2], v[3]);
}

VecX get_vecx(const json& j, const char* key, const VecX& fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = j.at(key).get<std::vector<double>>();
  return Eigen::Map<const VecX>(v.data(), Eigen::Index(v.size()));
}

void report(bool& ok, bool pass, const std::string& what) {
  std::cout << (pass ? "PASS " : "FAIL ") << what << "\n";
  ok = ok && pass;
}

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// ------------------------------------------------------------------ converge

int cmd_converge(const Common& c) {
  const json j = load_config(c.config);
  ConvergenceSpec spec;
  spec.problem = problem_from_id(get<std::string>(j, "problem", "particle_linear"));
  spec.profile = get<std::string>(j, "profile", "1+cos");
  spec.potential = get<std::string>(j, "potential", "trig_quartic");
  spec.B = get<double>(j, "B", 1.0);
  spec.eps = get_list(j, "eps", {1, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6});
  spec.dt = get_list(j, "dt", {1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256, 1.0 / 512, 1.0 / 1024});
  spec.T = get<double>(j, "T", 1.0);
  const int dim = spec.problem == ProblemKind::scalar_linear ? 1 : 4;
  spec.U0 = get_vecx(j, "U0", dim == 1 ? VecX::Ones(1) : VecX(Vec4(0.5, 0.25, -0.25, 0.5)));
  spec.ref.substeps_per_fast_period = get<int>(j, "substeps", 200);
  std::vector<std::string> schemes;
  if (j.contains("schemes"))
    schemes = j.at("schemes").get<std::vector<std::string>>();
  else
    schemes = {get<std::string>(j, "scheme", "explicit1")};

  const auto tables = run_convergence(spec, schemes);
  bool ok = true;
  const json gates = j.value("gates", json::object());
  for (const ConvergenceTable& t : tables) {
    std::ofstream os = open_out(c, "converge_" + t.scheme + ".csv");
    write_convergence_csv(os, t);
    std::cout << t.scheme << ": uniform slope " << fmt(t.uniform.slope) << " (residual " << fmt(t.uniform.residual)
              << "), reference gate " << fmt(t.worst_gate) << "\n";
    if (gates.contains(t.scheme)) {
      const json& g = gates.at(t.scheme);
      if (g.contains("slope")) {
        const double target = g.at("slope").get<double>(), tol = g.value("tol", 0.2);
        report(ok, std::abs(t.uniform.slope - target) <= tol,
               t.scheme + " uniform slope " + fmt(t.uniform.slope) + " vs " + fmt(target) + " +- " + fmt(tol));
      }
      if (g.contains("max_slope")) {
        const double cap = g.at("max_slope").get<double>();
        report(ok, t.uniform.slope <= cap, t.scheme + " uniform slope " + fmt(t.uniform.slope) + " <= " + fmt(cap));
      }
    }
  }
  return ok ? 0 : 1;
}

// ------------------------------------------------------------------ energy

int cmd_energy(const Common& c) {
  const json j = load_config(c.config);
  const std::string model = get<std::string>(j, "model", "sav_averaged");
  const PeriodicProfile profile = PeriodicProfile::from_id(get<std::string>(j, "profile", "cos"));
  const double B = get<double>(j, "B", 1.0);
  const double dt = get<double>(j, "dt", 0.1), T = get<double>(j, "T", 100.0);
  const Vec4 U0 = get_vec4(j, "U0", Vec4(0.5, 0.25, -0.25, 0.5));
  EnergySeries s;
  if (model == "sav_averaged") {
    const std::string closure = get<std::string>(j, "closure", "taylor");
    const BbarMode mode = closure == "extrapolation" ? BbarMode::extrapolation : BbarMode::taylor;
    s = run_energy_sav_averaged(profile, B, PotentialField::from_id(get<std::string>(j, "potential", "trig_quartic")),
                                U0, dt, T, mode);
  } else if (model == "linear_averaged") {
    s = run_energy_linear_averaged(profile, B, U0, dt, T, get<std::string>(j, "scheme", "averaged_midpoint"));
  } else {
    throw InvalidArgument("unknown energy model: " + model);
  }
  std::ofstream os = open_out(c, "energy_" + model + ".csv");
  write_energy_csv(os, s);
  std::cout << "max relative drift: Hbar " << fmt(s.max_rel_drift_Hbar) << ", H1 " << fmt(s.max_rel_drift_H1)
            << ", H2 " << fmt(s.max_rel_drift_H2) << "\n";
  bool ok = true;
  const json g = j.value("gates", json::object());
  if (g.contains("max_drift_Hbar"))
    report(ok, s.max_rel_drift_Hbar <= g.at("max_drift_Hbar").get<double>(), "Hbar drift");
  if (g.contains("max_drift_H12")) {
    const double cap = g.at("max_drift_H12").get<double>();
    report(ok, s.max_rel_drift_H1 <= cap && s.max_rel_drift_H2 <= cap, "H1/H2 drift");
  }
  if (g.contains("min_drift_Hbar"))
    report(ok, s.max_rel_drift_Hbar >= g.at("min_drift_Hbar").get<double>(), "Hbar drift above floor");
  return ok ? 0 : 1;
}

// ------------------------------------------------------------------ spectrum

int cmd_spectrum(const Common& c) {
  const json j = load_config(c.config);
  const PeriodicProfile profile = PeriodicProfile::from_id(get<std::string>(j, "profile", "1+cos"));
  const std::vector<double> Bs = get_list(j, "B", {1.0});
  const double eps = get<double>(j, "eps", 0.1), dt = get<double>(j, "dt", 0.001), T = get<double>(j, "T", 100.0);
  const Vec4 U0 = get_vec4(j, "U0", Vec4(0.5, 0.25, -0.25, 0.5));
  const bool full = get<bool>(j, "full", false);
  bool ok = true;
  std::ofstream os = open_out(c, "spectrum.csv");
  os << "B,trajectory,omega,magnitude,expected\n";
  for (double B : Bs) {
    const SpectrumReport r = run_spectrum(profile, B, eps, U0, dt, T, full);
    std::string expected;
    for (double f : r.expected) expected += (expected.empty() ? "" : ";") + fmt(f);
    for (const auto& p : r.peaks) os << B << ",averaged," << p.omega << ',' << p.magnitude << ',' << expected << '\n';
    for (const auto& p : r.peaks_full) os << B << ",full," << p.omega << ',' << p.magnitude << ',' << expected << '\n';
    std::cout << "B=" << B << " expected " << expected << ", leading peaks";
    for (std::size_t i = 0; i < std::min<std::size_t>(3, r.peaks.size()); ++i) std::cout << ' ' << fmt(r.peaks[i].omega);
    std::cout << "\n";
    if (j.value("gates", json::object()).value("matched", false)) report(ok, r.matched, "B=" + fmt(B) + " peaks matched");
  }
  return ok ? 0 : 1;
}

// ------------------------------------------------------------------ confine

int cmd_confine(const Common& c) {
  const json j = load_config(c.config);
  const PeriodicProfile profile = PeriodicProfile::from_id(get<std::string>(j, "profile", "cos"));
  const PotentialField field = PotentialField::from_id(get<std::string>(j, "potential", "trig_quartic"));
  const auto rows = run_confinement(profile, field, get_list(j, "B", {0.5, 1.0, 5.0}), get_list(j, "eps", {0.1, 0.001}),
                                    get_vec4(j, "U0", Vec4(0.1, 0.0, 1.0, 1.0)), get<double>(j, "dt", 0.1),
                                    get<double>(j, "T", 100.0));
  std::ofstream os = open_out(c, "confine.csv");
  os << "B,eps,max_extent\n";
  for (const auto& r : rows) {
    os << r.B << ',' << r.eps << ',' << r.max_extent << '\n';
    std::cout << "B=" << r.B << " eps=" << r.eps << " max|x|=" << fmt(r.max_extent) << "\n";
  }
  bool ok = true;
  if (j.value("gates", json::object()).value("monotone", false))
    report(ok, confinement_monotone(rows), "max|x| strictly decreasing in B");
  return ok ? 0 : 1;
}

// ------------------------------------------------------------------ landau

int cmd_landau(const Common& c) {
  const json j = load_config(c.config);
  LandauSpec base;
  base.two_d = get<bool>(j, "two_d", false);
  base.k = get<double>(j, "k", 0.5);
  base.xi = get<double>(j, "xi", 0.05);
  base.n1 = get<int>(j, "n1", 64);
  base.n2 = get<int>(j, "n2", 0);
  base.particles_per_cell = get<int>(j, "particles_per_cell", 50);
  base.eps = get<double>(j, "eps", 1e-3);
  base.profile = get<std::string>(j, "profile", "cos");
  base.pusher = pusher_from_id(get<std::string>(j, "pusher", "order2"));
  base.spline_order = get<int>(j, "spline_order", 2);
  base.dt = get<double>(j, "dt", 0.01);
  base.T = get<double>(j, "T", 30.0);
  base.seed = std::uint64_t(get<long>(j, "seed", 1));
  if (c.seed >= 0) base.seed = std::uint64_t(c.seed);
  if (j.contains("fit")) {
    const json& f = j.at("fit");
    base.fit.t_begin = f.value("t_begin", base.fit.t_begin);
    base.fit.t_end = f.value("t_end", base.fit.t_end);
    base.fit.neighbourhood = f.value("neighbourhood", base.fit.neighbourhood);
  }
  if (c.paper_scale) base.apply_full_scale();

  const std::vector<double> Bs = get_list(j, "B", {0.0});
  const json g = j.value("gates", json::object());
  const bool classify = g.contains("damping") || g.contains("disintegrated");
  std::vector<double> runs = Bs;
  if (classify && std::find(runs.begin(), runs.end(), 0.0) == runs.end()) runs.insert(runs.begin(), 0.0);

  bool ok = true;
  double reference_rate = std::numeric_limits<double>::quiet_NaN();
  std::vector<LandauReport> reports;
  std::ofstream summary = open_out(c, "landau_summary.csv");
  summary << "B,k,rate,residual,peaks,oracle,relative_gap\n";
  for (double B : runs) {
    LandauSpec spec = base;
    spec.B = B;
    const LandauReport r = run_landau(spec);
    std::ofstream os = open_out(c, "landau_B" + fmt(B) + ".csv");
    write_pic_energy_csv(os, r.run);
    summary << B << ',' << spec.k << ',' << (r.fit_ok ? r.fit.rate : std::nan("")) << ','
            << (r.fit_ok ? r.fit.residual : std::nan("")) << ',' << r.fit.peak_times.size() << ',' << r.oracle_rate
            << ',' << r.relative_gap << '\n';
    std::cout << "B=" << B << " fitted rate " << (r.fit_ok ? fmt(r.fit.rate) : "n/a (" + r.fit_error + ")")
              << ", oracle " << fmt(r.oracle_rate) << ", gap " << fmt(r.relative_gap) << "\n";
    if (B == 0.0 && r.fit_ok) reference_rate = r.fit.rate;
    reports.push_back(r);
    if (g.contains("max_gap") && B == 0.0)
      report(ok, r.relative_gap <= g.at("max_gap").get<double>(), "B=0 rate within " + fmt(g.at("max_gap").get<double>()) + " of oracle");
    if (g.contains("rate")) {
      const double target = g.at("rate").get<double>(), tol = g.value("rate_tol", 0.2);
      report(ok, r.fit_ok && std::abs(r.fit.rate - target) <= tol * std::abs(target),
             "rate " + fmt(r.fit.rate) + " within " + fmt(tol) + " of " + fmt(target));
    }
  }
  if (classify) {
    auto check = [&](const char* key, DampingClass want) {
      if (!g.contains(key)) return;
      for (double B : g.at(key).get<std::vector<double>>()) {
        const auto it = std::find(runs.begin(), runs.end(), B);
        if (it == runs.end()) throw InvalidArgument("gate names a B that was not run");
        const DampingClass got = classify_damping(reports[std::size_t(it - runs.begin())], reference_rate);
        report(ok, got == want, "B=" + fmt(B) + " classified " + to_string(got) + ", expected " + to_string(want));
      }
    };
    check("damping", DampingClass::damping);
    check("disintegrated", DampingClass::disintegrated);
  }
  return ok ? 0 : 1;
}

// ------------------------------------------------------------------ oracle

int cmd_oracle(const Common& c) {
  const json j = load_config(c.config);
  bool ok = true;
  std::ofstream os = open_out(c, "oracle.csv");
  os << "check,param,value,reference,error\n";
  for (double k : get_list(j, "dispersion_k", {0.5, 0.4, 0.3})) {
    const LandauRoot r = landau_dispersion_rate(k);
    os << "dispersion," << k << ',' << r.gamma << ',' << r.omega_r << ',' << r.residual << '\n';
    std::cout << "k=" << k << " omega_r " << fmt(r.omega_r) << " gamma " << fmt(r.gamma) << " residual " << fmt(r.residual)
              << "\n";
    report(ok, r.residual <= 1e-10, "dispersion residual at k=" + fmt(k));
  }
  const PeriodicProfile profile = PeriodicProfile::from_id(get<std::string>(j, "profile", "1+cos"));
  const double dt = get<double>(j, "dt", 0.1), t_n = get<double>(j, "t_n", 0.3);
  for (double eps : get_list(j, "quadrature_eps", {1.0, 1e-1, 1e-2})) {
    const OscPoly th = profile_as_oscpoly(profile, 1, eps);
    const ScalarFn f = [&profile, eps](double t) { return cplx(profile(t / eps), 0.0); };
    for (int depth = 1; depth <= 3; ++depth) {
      const std::vector<OscPoly> seq(std::size_t(depth), th);
      const cplx exact = nested_integral(seq, t_n, dt);
      const cplx quad = quadrature_oracle(std::vector<ScalarFn>(std::size_t(depth), f), t_n, t_n + dt);
      const double err = std::abs(exact - quad) / std::max(std::abs(quad), 1e-300);
      os << "nested_depth" << depth << ',' << eps << ',' << exact.real() << ',' << quad.real() << ',' << err << '\n';
      report(ok, err <= 1e-8, "depth " + std::to_string(depth) + " eps=" + fmt(eps) + " rel " + fmt(err));
    }
  }
  if (j.contains("lemma")) {
    const json& L = j.at("lemma");
    const double min_slope = get<double>(L, "min_slope", 0.85), max_slope = get<double>(L, "max_slope", 1.15);
    const double max_spread = get<double>(L, "max_spread", 10.0);
    std::ofstream ls = open_out(c, "lemma.csv");
    ls << "profile,identity,stated_dt_power,eps,envelope,constant,eps_slope,dt_slope\n";
    for (const auto& id : L.value("profiles", std::vector<std::string>{"cos", "1+cos"})) {
      const auto rows = run_lemma_check(PeriodicProfile::from_id(id), get<double>(L, "dt", 0.1),
                                        get_list(L, "eps", {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}),
                                        get_list(L, "dts", {0.2, 0.1, 0.05, 0.025}), get<double>(L, "dt_eps", 1e-5));
      for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.eps.size(); ++i)
          ls << id << ",id" << r.id << ',' << r.dt_power << ',' << r.eps[i] << ',' << r.envelope[i] << ','
             << r.constant[i] << ',' << r.eps_fit.slope << ',' << r.dt_fit.slope << '\n';
        std::cout << id << " id" << r.id << ": eps slope " << fmt(r.eps_fit.slope) << ", constant spread "
                  << fmt(r.constant_spread) << ", dt exponent " << fmt(r.dt_fit.slope) << " (stated " << r.dt_power
                  << ")\n";
        report(ok,
               r.eps_fit.slope >= min_slope && r.eps_fit.slope <= max_slope && r.constant_spread <= max_spread,
               id + " id" + std::to_string(r.id) + " residual linear in eps with a stable constant");
      }
    }
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uniformly accurate oscillatory integrators: experiment driver"};
  Common common;
  app.add_option("--config", common.config, "JSON config file");
  app.add_option("--out", common.out, "output directory");
  app.add_option("--seed", common.seed, "override the PIC seed");
  app.add_option("--threads", common.threads, "OpenMP threads (0 = runtime default)");
  app.add_flag("--paper-scale", common.paper_scale, "full-resolution PIC settings");
  app.require_subcommand(1);
  auto* converge = app.add_subcommand("converge", "error tables and slope fits");
  auto* energy = app.add_subcommand("energy", "energy audit of the averaged schemes");
  auto* spectrum = app.add_subcommand("spectrum", "DFT peaks of x1 against averaged frequencies");
  auto* confine = app.add_subcommand("confine", "max |x| of SAV runs across B and eps");
  auto* landau = app.add_subcommand("landau", "PIC Landau damping runs");
  auto* oracle = app.add_subcommand("oracle", "dispersion roots and quadrature checks");
  for (auto* sub : {converge, energy, spectrum, confine, landau, oracle}) sub->fallthrough();
  CLI11_PARSE(app, argc, argv);

  if (common.threads > 0) omp_set_num_threads(common.threads);
  try {
    if (*converge) return cmd_converge(common);
    if (*energy) return cmd_energy(common);
    if (*spectrum) return cmd_spectrum(common);
    if (*confine) return cmd_confine(common);
    if (*landau) return cmd_landau(common);
    if (*oracle) return cmd_oracle(common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
