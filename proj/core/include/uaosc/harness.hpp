#pragma once
// Experiment drivers: convergence sweeps, energy audits, spectra,
// confinement extents and the fitting utilities they report through.

#include <iosfwd>
#include <string>
#include <vector>

#include "uaosc/linear_ua.hpp"
#include "uaosc/nonlinear_ua.hpp"
#include "uaosc/particle_model.hpp"
#include "uaosc/pic_vlasov.hpp"
#include "uaosc/reference.hpp"
#include "uaosc/sav_schemes.hpp"

namespace uaosc {

// ------------------------------------------------------------------ fitting

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  /// RMS of the residuals of the fitted line
  double residual = 0.0;
};

/// Least squares of y against x.
SlopeFit fit_line(const std::vector<double>& x, const std::vector<double>& y);
/// Least squares of log y against log x.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct TooFewPeaksError : Error {
  using Error::Error;
};

struct DecayFitOptions {
  double t_begin = 5.0;
  double t_end = 30.0;
  /// A sample is a peak if no sample within +-neighbourhood exceeds it.
  double neighbourhood = 1.0;
  /// Energy ~ exp(2 gamma t): the fitted log slope is multiplied by this.
  double factor = 0.5;
  int min_peaks = 4;
};

struct DecayFit {
  double rate = 0.0;
  double residual = 0.0;
  std::vector<double> peak_times;
  std::vector<double> peak_values;
};

DecayFit fit_decay(const std::vector<double>& t, const std::vector<double>& energy, const DecayFitOptions& opt = {});
double fit_decay_rate(const std::vector<double>& t, const std::vector<double>& energy,
                      const DecayFitOptions& opt = {});

// ------------------------------------------------------------------ spectra

struct SpectralPeak {
  double omega;
  double magnitude;
};

/// Local maxima of |DFT| above `factor` times the median magnitude, by
/// decreasing magnitude.  Frequencies are angular: 2 pi j / (N dt).
std::vector<SpectralPeak> dft_peaks(const std::vector<double>& samples, double dt, double factor = 10.0);

// ------------------------------------------------------------------ problems

enum class ProblemKind {
  /// 4x4 charged-particle matrix, theta scaled by B
  particle_linear,
  /// U' = theta(t/eps) U
  scalar_linear,
  /// particle matrix plus g = (0, cos x1 sin x2 + x1 + x1^3, sin x1 cos x2 + x2 + x2^3)
  particle_nonlinear,
  /// particle matrix plus g = (0, -grad phi); SAV schemes act on it
  particle_sav,
};

ProblemKind problem_from_id(const std::string& id);
std::string to_string(ProblemKind kind);

struct Problem {
  ProblemKind kind;
  PeriodicProfile profile;
  double B;
  double eps;
  LinearOscSystem sys;
  NonlinearTerm nl;
  PotentialField field;
};

Problem make_problem(ProblemKind kind, const PeriodicProfile& profile, double B, double eps,
                     const std::string& potential_id = "trig_quartic");

/// Schemes: explicit1..explicit4, midpoint_naive, midpoint_ua, particle_midpoint,
/// averaged_midpoint, averaged_exp1..averaged_exp4, nl_order1, nl_order2,
/// sav_ua_choice1, sav_ua_choice2, sav_avg_taylor, sav_avg_extrapolation.
bool scheme_known(const std::string& scheme);

/// Integrates to T with N = T/dt steps (dt must divide T) and returns the state
/// at each step when `trajectory` is set, else only the endpoint.
std::vector<VecX> run_scheme(const std::string& scheme, const Problem& pb, const VecX& U0, double dt, double T,
                             bool trajectory = false);

// ------------------------------------------------------------------ experiments

struct ConvergenceSpec {
  ProblemKind problem = ProblemKind::particle_linear;
  std::string scheme = "explicit1";
  std::string profile = "1+cos";
  std::string potential = "trig_quartic";
  double B = 1.0;
  std::vector<double> eps;
  std::vector<double> dt;
  double T = 1.0;
  VecX U0;
  ReferenceConfig ref;
};

struct ConvergenceRow {
  double eps;
  double dt;
  double err;
};

struct ConvergenceTable {
  std::string scheme;
  std::vector<ConvergenceRow> rows;
  std::vector<SlopeFit> per_eps;   ///< aligned with spec.eps
  std::vector<double> max_err;     ///< aligned with spec.dt
  SlopeFit uniform;                ///< fit of max_err against dt
  double worst_gate = 0.0;
};

ConvergenceTable run_convergence(const ConvergenceSpec& spec);
/// Several schemes against one reference per eps; spec.scheme is ignored.
std::vector<ConvergenceTable> run_convergence(const ConvergenceSpec& spec, const std::vector<std::string>& schemes);
/// Columns scheme,eps,dt,err,slope; slope is the per-eps fit, uniform rows use eps = max.
void write_convergence_csv(std::ostream& os, const ConvergenceTable& table);

struct EnergySeries {
  std::vector<double> t, Hbar, H1, H2;
  double max_rel_drift_Hbar = 0.0;
  double max_rel_drift_H1 = 0.0;
  double max_rel_drift_H2 = 0.0;
};

/// SAV averaged scheme on the nonlinear averaged model: Hbar along the run.
EnergySeries run_energy_sav_averaged(const PeriodicProfile& profile, double B, const PotentialField& field,
                                     const Vec4& U0, double dt, double T, BbarMode mode);
/// Linear averaged model under `scheme` (averaged_midpoint or averaged_exp*):
/// H1, H2 along the run.
EnergySeries run_energy_linear_averaged(const PeriodicProfile& profile, double B, const Vec4& U0, double dt, double T,
                                        const std::string& scheme = "averaged_midpoint");
void write_energy_csv(std::ostream& os, const EnergySeries& s);

struct SpectrumReport {
  std::vector<double> expected;           ///< averaged_frequencies
  std::vector<SpectralPeak> peaks;        ///< of x1 along the averaged trajectory
  std::vector<SpectralPeak> peaks_full;   ///< of x1 along the oscillatory trajectory
  double bin_width = 0.0;
  /// the leading expected.size() peaks each lie within one bin of a distinct
  /// expected frequency
  bool matched = false;
};

SpectrumReport run_spectrum(const PeriodicProfile& profile, double B, double eps, const Vec4& U0, double dt, double T,
                            bool with_full = true);

struct ConfinementRow {
  double B;
  double eps;
  double max_extent;
};

/// SAV UA midpoint (choice2) runs; max |x| over each run.
std::vector<ConfinementRow> run_confinement(const PeriodicProfile& profile, const PotentialField& field,
                                            const std::vector<double>& B_values, const std::vector<double>& eps_values,
                                            const Vec4& U0, double dt, double T);
/// Strictly decreasing max extent in B for every eps.
bool confinement_monotone(const std::vector<ConfinementRow>& rows);

struct LandauSpec {
  bool two_d = false;
  double k = 0.5;
  double xi = 0.05;
  int n1 = 64;
  /// cells along x2; 0 selects 4 (1D-like, k2 = 2 pi) or n1 (2D)
  int n2 = 0;
  int particles_per_cell = 50;
  double B = 0.0;
  double eps = 1e-3;
  std::string profile = "cos";
  PusherMode pusher = PusherMode::order2;
  int spline_order = 2;
  double dt = 0.01;
  double T = 30.0;
  std::uint64_t seed = 1;
  DecayFitOptions fit;

  /// N1 = 128 (and N2 = 128 in 2D), 100 particles per cell.
  void apply_full_scale();
};

PicConfig landau_config(const LandauSpec& spec);

struct LandauReport {
  PicRun run;
  bool fit_ok = false;
  std::string fit_error;
  DecayFit fit;
  /// least-damped root of the dispersion relation at k
  double oracle_rate = 0.0;
  /// |fit - oracle| / |oracle|
  double relative_gap = 0.0;
};

LandauReport run_landau(const LandauSpec& spec);

enum class DampingClass { damping, disintegrated };
std::string to_string(DampingClass c);

/// damping iff the fitted rate is at most half the B = 0 rate (both negative
/// for a damped reference); a run without a fit is disintegrated.
DampingClass classify_damping(const LandauReport& run, double reference_rate);

// ------------------------------------------------------------------ lemma

/// Residual of one step-integral expansion: the integral minus its averaged
/// leading term, with the stated order in (dt, eps).
struct LemmaIdentity {
  int id = 0;
  /// stated residual ~ dt^dt_power * eps
  int dt_power = 0;
  std::vector<double> eps;
  /// max over t_n = n dt of |residual| at each eps
  std::vector<double> envelope;
  /// envelope / (dt^dt_power * eps)
  std::vector<double> constant;
  SlopeFit eps_fit;
  /// max(constant) / min(constant)
  double constant_spread = 0.0;
  std::vector<double> dts;
  std::vector<double> dt_envelope;
  /// measured dt exponent at fixed eps
  SlopeFit dt_fit;
};

/// The five expansions of int theta, its two double integrals and its two
/// first moments over [t_n, t_n + dt], evaluated in the OscPoly algebra.
std::vector<LemmaIdentity> run_lemma_check(const PeriodicProfile& profile, double dt, const std::vector<double>& eps,
                                           const std::vector<double>& dts, double dt_eps, int samples = 200);

}  // namespace uaosc
