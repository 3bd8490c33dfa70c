#pragma once
// Particle-in-cell solver for Vlasov-Poisson with an oscillating uniform
// magnetic field: sampling, B-spline deposition, spectral Poisson solve,
// interpolation and the coupled time loop.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "uaosc/linear_ua.hpp"
#include "uaosc/osc_quadrature.hpp"
#include "uaosc/types.hpp"

namespace uaosc {

struct Grid2D {
  int n1 = 0, n2 = 0;
  double L1 = 0.0, L2 = 0.0;

  /// Domain [0, 2 pi / k1] x [0, 2 pi / k2].
  static Grid2D make(int n1, int n2, double k1, double k2);

  double dx1() const { return L1 / n1; }
  double dx2() const { return L2 / n2; }
  std::size_t nodes() const { return std::size_t(n1) * std::size_t(n2); }
  /// Row-major node index, i2 fastest.
  std::size_t index(int i1, int i2) const { return std::size_t(i1) * std::size_t(n2) + std::size_t(i2); }
  /// Throws InvalidArgument unless n1, n2 >= 4 are powers of two and L1, L2 > 0.
  void validate() const;
};

/// f_in = (1 + xi1 cos k1 x1)(1 + xi2 cos k2 x2) exp(-|v|^2/2) / (2 pi)
struct InitCondition {
  double xi1 = 0.05, xi2 = 0.0;
  double k1 = 0.5, k2 = 0.5;
  void validate() const;
};

/// Structure-of-arrays particle storage; q is the guiding momentum.
struct ParticleEnsemble {
  std::vector<double> x1, x2, q1, q2;
  double weight = 0.0;
  std::size_t size() const { return x1.size(); }
  void resize(std::size_t n);
};

struct FieldState {
  Grid2D grid;
  std::vector<double> rho, phi, E1, E2;
  /// dE1/dx1, dE1/dx2 (= dE2/dx1), dE2/dx2; filled on request.
  std::vector<double> dE11, dE12, dE22;
};

/// theta profile and amplitude used to turn sampled velocities into q at t=0.
struct MagneticSetup {
  PeriodicProfile profile = PeriodicProfile::cosine();
  double B = 0.0;
  double eps = 1.0;
};

enum class SamplingMode {
  /// (x1, v1, x2, v2) from a regular lattice and radical inverses in bases
  /// 2, 3, 5, each shifted mod 1 by a seeded offset
  halton,
  /// one uniform per stratum, strata independently permuted per coordinate
  stratified,
};

/// Positions by inverting x + xi sin(kx)/k = u L; velocities by the normal
/// quantile of u.  Reproducible from the seed.
ParticleEnsemble sample_initial(const InitCondition& ic, const Grid2D& grid, std::size_t n_particles,
                                std::uint64_t seed, const MagneticSetup& mag = {},
                                SamplingMode mode = SamplingMode::halton);

/// Centred cardinal B-spline of degree m on nodes j * dx: the m + 1 weights
/// of nodes base .. base + m.  base may lie outside [0, n).
struct SplineWeights {
  int base = 0;
  std::array<double, 4> w{};
};
SplineWeights bspline_weights(double xp, double dx, int m);

/// rho at the nodes, sum rho dx1 dx2 = N_p * weight.
std::vector<double> deposit_density(const ParticleEnsemble& ens, const Grid2D& grid, int m);

/// Spectral solver of -lap phi = rho - mean(rho) on the periodic grid.  Owns
/// FFTW plans and work buffers; a single instance is not reentrant.
class PoissonSolver {
 public:
  explicit PoissonSolver(const Grid2D& grid);
  ~PoissonSolver();
  PoissonSolver(const PoissonSolver&) = delete;
  PoissonSolver& operator=(const PoissonSolver&) = delete;

  const Grid2D& grid() const { return grid_; }

  /// phi, E = -grad phi (Nyquist modes of E removed) and, if requested, the
  /// gradient of E.
  FieldState solve(const std::vector<double>& rho, bool with_gradient = false);
  void solve_into(const std::vector<double>& rho, FieldState& out, bool with_gradient);

  /// Spectral divergence of a node vector field.
  std::vector<double> divergence(const std::vector<double>& E1, const std::vector<double>& E2);
  /// rho - mean(rho) with its Nyquist modes removed.
  std::vector<double> neutral_band(const std::vector<double>& rho);
  /// sum over non-Nyquist modes of |rho_hat|^2 / |kappa|^2, scaled to match
  /// electric_energy.
  double spectral_energy(const std::vector<double>& rho);

 private:
  struct Impl;
  Grid2D grid_;
  std::unique_ptr<Impl> impl_;
};

FieldState solve_poisson(const std::vector<double>& rho, const Grid2D& grid);

/// sum |E|^2 dx1 dx2 over the nodes.
double electric_energy(const FieldState& fields);

/// Node field interpolated to each position with the deposition weights.
std::vector<Vec2> interpolate_field(const FieldState& fields, const std::vector<Vec2>& positions, int m);

/// Interpolated E and, when the field carries it, grad E at every particle.
struct ParticleField {
  std::vector<double> E1, E2, d11, d12, d22;
};
void interpolate_field(const FieldState& fields, const ParticleEnsemble& ens, int m, ParticleField& out);

enum class PusherMode {
  /// first-order explicit UA step with g = (0, E)
  order1,
  /// second-order explicit UA step with g = (0, E) and its Jacobian
  order2,
  /// SAV-UA midpoint with b = -E, Taylor closure
  sav_ua,
};

PusherMode pusher_from_id(const std::string& id);
std::string to_string(PusherMode mode);

/// What is held fixed when a particle is wrapped back into the cell.
enum class WrapPolicy {
  /// q unchanged; the lab velocity jumps by c theta J (x' - x)
  keep_q,
  /// v = q + c theta J x unchanged; q absorbs the shift
  keep_v,
};

struct PicConfig {
  Grid2D grid;
  InitCondition ic;
  std::size_t n_particles = 0;
  int spline_order = 2;
  double dt = 0.01;
  double T = 30.0;
  MagneticSetup mag;
  PusherMode pusher = PusherMode::order2;
  std::uint64_t seed = 1;
  SamplingMode sampling = SamplingMode::halton;
  WrapPolicy wrap = WrapPolicy::keep_q;
  void validate() const;
};

/// Step matrices shared by every particle in one step.
struct PushMatrices {
  Mat4 P1;          ///< order1: I + int A; order2: I + H1 + H2
  Mat4 K1;          ///< order2: int A (s - t_n) + dt I
  Mat4 K2;          ///< order2: int int A
  Mat4 cayley_lhs_inv;  ///< sav_ua: (I - M/2)^{-1}
  Mat4 cayley_rhs;      ///< sav_ua: I + M/2
  double centered_moment = 0.0;
};

/// Time loop owner.  Fields at time t are consistent with the particles.
class PicSimulation {
 public:
  explicit PicSimulation(const PicConfig& cfg);
  ~PicSimulation();

  double time() const { return t_; }
  long steps_taken() const { return n_; }
  const ParticleEnsemble& particles() const { return ens_; }
  const FieldState& fields() const { return fields_; }
  double energy() const { return electric_energy(fields_); }
  /// sum weight * q
  Vec2 momentum() const;

  /// Push with the frozen start-of-step field, wrap, re-deposit, re-solve.
  void step();

  /// Replace the ensemble and rebuild the fields (for controlled tests).
  void reset_particles(ParticleEnsemble ens);
  /// Overwrite the field used by the next push (for controlled tests).
  FieldState& mutable_fields() { return fields_; }

 private:
  void refresh_fields();
  PushMatrices matrices(double t_n) const;

  PicConfig cfg_;
  LinearOscSystem sys_;
  std::unique_ptr<ParticleIntegrals> ints_;
  std::unique_ptr<PoissonSolver> poisson_;
  ParticleEnsemble ens_;
  FieldState fields_;
  ParticleField pf_;
  double t_ = 0.0;
  long n_ = 0;
};

/// One step of the loop for callers that own the pieces.
void pic_step(PicSimulation& sim);

struct PicRun {
  std::vector<double> t, energy;
};

/// Energy at every step from t = 0 to T.
PicRun run_pic(const PicConfig& cfg);
/// Columns t,elec_energy.
void write_pic_energy_csv(std::ostream& os, const PicRun& run);
/// Columns x1,x2,q1,q2.
void write_snapshot_csv(std::ostream& os, const ParticleEnsemble& ens);

}  // namespace uaosc
