#include "uaosc/pic_vlasov.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/roots.hpp>

#include "uaosc/nonlinear_ua.hpp"
#include "uaosc/particle_model.hpp"
#include "uaosc/sav_schemes.hpp"

namespace uaosc {

namespace {

bool power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

int wrap_index(int i, int n) {
  const int r = i % n;
  return r < 0 ? r + n : r;
}

double wrap_position(double x, double L) {
  x -= L * std::floor(x / L);
  if (x >= L) x -= L;
  if (x < 0.0) x = 0.0;
  return x;
}

// FFTW planning is not thread safe.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

constexpr std::size_t kMaxChunks = 64;
constexpr std::size_t kMinChunk = 4096;

}  // namespace

// ------------------------------------------------------------------ geometry

Grid2D Grid2D::make(int n1, int n2, double k1, double k2) {
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw InvalidArgument("wavenumbers must be positive");
  Grid2D g{n1, n2, kTwoPi / k1, kTwoPi / k2};
  g.validate();
  return g;
}

void Grid2D::validate() const {
  if (n1 < 4 || n2 < 4 || !power_of_two(n1) || !power_of_two(n2))
    throw InvalidArgument("grid sizes must be powers of two, at least 4");
  if (!(L1 > 0.0) || !(L2 > 0.0)) throw InvalidArgument("domain lengths must be positive");
}

void InitCondition::validate() const {
  if (!(std::abs(xi1) < 1.0) || !(std::abs(xi2) < 1.0))
    throw InvalidArgument("perturbation amplitudes must satisfy |xi| < 1");
  if (!(k1 > 0.0) || !(k2 > 0.0)) throw InvalidArgument("wavenumbers must be positive");
}

void ParticleEnsemble::resize(std::size_t n) {
  x1.resize(n);
  x2.resize(n);
  q1.resize(n);
  q2.resize(n);
}

// ------------------------------------------------------------------ sampling

namespace {

std::vector<double> stratified(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> u(n);
  for (std::size_t i = 0; i < n; ++i) {
    double r = unif(rng);
    if (r == 0.0) r = 0.5;
    u[i] = (double(i) + r) / double(n);
  }
  std::shuffle(u.begin(), u.end(), rng);
  return u;
}

double radical_inverse(std::uint64_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, r = 0.0;
  while (i > 0) {
    r += f * double(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

// Hammersley-type point set, each coordinate rotated by a seeded shift mod 1.
std::array<std::vector<double>, 4> quiet_set(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::array<double, 4> shift;
  for (double& s : shift) s = unif(rng);
  static constexpr unsigned bases[3] = {2, 3, 5};
  std::array<std::vector<double>, 4> u;
  for (auto& v : u) v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    u[0][i] = (double(i) + 0.5) / double(n);
    for (int d = 0; d < 3; ++d) u[d + 1][i] = radical_inverse(i, bases[d]);
    for (int d = 0; d < 4; ++d) {
      double w = u[d][i] + shift[d];
      w -= std::floor(w);
      if (w <= 0.0 || w >= 1.0) w = 0.5 / double(n);
      u[d][i] = w;
    }
  }
  return u;
}

// Solves x + xi sin(kx)/k = target on [0, L].
double invert_cdf(double target, double xi, double k, double L) {
  if (xi == 0.0) return target;
  auto f = [&](double x) {
    return std::make_pair(x + xi * std::sin(k * x) / k - target, 1.0 + xi * std::cos(k * x));
  };
  std::uintmax_t iters = 200;
  const double x = boost::math::tools::newton_raphson_iterate(f, target, 0.0, L, 50, iters);
  const double res = std::abs(f(x).first);
  if (res > 1e-12 * std::max(1.0, L)) throw ConvergenceError("position sampling root-find did not converge");
  return x;
}

}  // namespace

ParticleEnsemble sample_initial(const InitCondition& ic, const Grid2D& grid, std::size_t n_particles,
                                std::uint64_t seed, const MagneticSetup& mag, SamplingMode mode) {
  ic.validate();
  grid.validate();
  if (n_particles < 1) throw InvalidArgument("need at least one particle");
  std::mt19937_64 rng(seed);
  std::array<std::vector<double>, 4> set;
  if (mode == SamplingMode::halton) {
    set = quiet_set(n_particles, rng);
  } else {
    for (auto& v : set) v = stratified(n_particles, rng);
  }
  const std::vector<double>& u1 = set[0];
  const std::vector<double>& w1 = set[1];
  const std::vector<double>& u2 = set[2];
  const std::vector<double>& w2 = set[3];

  ParticleEnsemble ens;
  ens.resize(n_particles);
  ens.weight = grid.L1 * grid.L2 / double(n_particles);
  const boost::math::normal_distribution<double> gauss;
  const double c = coupling(mag.B, ModelScaling::physical) * mag.profile(0.0);
  for (std::size_t p = 0; p < n_particles; ++p) {
    const double x1 = invert_cdf(u1[p] * grid.L1, ic.xi1, ic.k1, grid.L1);
    const double x2 = invert_cdf(u2[p] * grid.L2, ic.xi2, ic.k2, grid.L2);
    const double v1 = boost::math::quantile(gauss, w1[p]);
    const double v2 = boost::math::quantile(gauss, w2[p]);
    ens.x1[p] = wrap_position(x1, grid.L1);
    ens.x2[p] = wrap_position(x2, grid.L2);
    // q = v - c J x with J x = (x2, -x1)
    ens.q1[p] = v1 - c * ens.x2[p];
    ens.q2[p] = v2 + c * ens.x1[p];
  }
  return ens;
}

// ------------------------------------------------------------------ splines

SplineWeights bspline_weights(double xp, double dx, int m) {
  const double x = xp / dx;
  SplineWeights s;
  switch (m) {
    case 0:
      s.base = int(std::floor(x + 0.5));
      s.w = {1.0, 0.0, 0.0, 0.0};
      break;
    case 1: {
      const double fl = std::floor(x);
      const double f = x - fl;
      s.base = int(fl);
      s.w = {1.0 - f, f, 0.0, 0.0};
      break;
    }
    case 2: {
      const double r = std::floor(x + 0.5);
      const double d = x - r;
      s.base = int(r) - 1;
      const double a = 0.5 - d, b = 0.5 + d;
      s.w = {0.5 * a * a, 0.75 - d * d, 0.5 * b * b, 0.0};
      break;
    }
    case 3: {
      const double fl = std::floor(x);
      const double f = x - fl;
      const double g = 1.0 - f;
      s.base = int(fl) - 1;
      const double w0 = g * g * g / 6.0, w3 = f * f * f / 6.0;
      const double w1 = (4.0 - 6.0 * f * f + 3.0 * f * f * f) / 6.0;
      s.w = {w0, w1, 1.0 - w0 - w1 - w3, w3};
      break;
    }
    default:
      throw InvalidArgument("spline order must be 0..3");
  }
  return s;
}

// ------------------------------------------------------------------ deposition

std::vector<double> deposit_density(const ParticleEnsemble& ens, const Grid2D& grid, int m) {
  grid.validate();
  if (m < 0 || m > 3) throw InvalidArgument("spline order must be 0..3");
  const std::size_t np = ens.size();
  const std::size_t nodes = grid.nodes();
  const std::size_t chunks = std::clamp<std::size_t>(np / kMinChunk, 1, kMaxChunks);
  const std::size_t per = (np + chunks - 1) / chunks;
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(nodes, 0.0));
  const double dx1 = grid.dx1(), dx2 = grid.dx2();
  const double scale = ens.weight / (dx1 * dx2);
  const int n1 = grid.n1, n2 = grid.n2;

#pragma omp parallel for schedule(static)
  for (std::size_t c = 0; c < chunks; ++c) {
    std::vector<double>& rho = partial[c];
    const std::size_t end = std::min(np, (c + 1) * per);
    for (std::size_t p = c * per; p < end; ++p) {
      const SplineWeights a = bspline_weights(ens.x1[p], dx1, m);
      const SplineWeights b = bspline_weights(ens.x2[p], dx2, m);
      for (int i = 0; i <= m; ++i) {
        const std::size_t row = std::size_t(wrap_index(a.base + i, n1)) * std::size_t(n2);
        const double wa = scale * a.w[i];
        for (int j = 0; j <= m; ++j) rho[row + std::size_t(wrap_index(b.base + j, n2))] += wa * b.w[j];
      }
    }
  }
  std::vector<double> rho(nodes, 0.0);
  for (const auto& part : partial)
    for (std::size_t k = 0; k < nodes; ++k) rho[k] += part[k];
  return rho;
}

// ------------------------------------------------------------------ Poisson

struct PoissonSolver::Impl {
  int n1, n2, nh;
  double* real = nullptr;
  fftw_complex* spec = nullptr;
  fftw_complex* work = nullptr;
  fftw_plan fwd = nullptr, bwd = nullptr;
  std::vector<double> k1, k2;
  std::vector<char> nyq1, nyq2;

  explicit Impl(const Grid2D& g) : n1(g.n1), n2(g.n2), nh(g.n2 / 2 + 1) {
    std::lock_guard<std::mutex> lock(planner_mutex());
    real = fftw_alloc_real(std::size_t(n1) * n2);
    spec = fftw_alloc_complex(std::size_t(n1) * nh);
    work = fftw_alloc_complex(std::size_t(n1) * nh);
    fwd = fftw_plan_dft_r2c_2d(n1, n2, real, spec, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_c2r_2d(n1, n2, work, real, FFTW_ESTIMATE);
    k1.resize(n1);
    nyq1.resize(n1);
    for (int i = 0; i < n1; ++i) {
      k1[i] = kTwoPi / g.L1 * (i <= n1 / 2 ? i : i - n1);
      nyq1[i] = (i == n1 / 2);
    }
    k2.resize(nh);
    nyq2.resize(nh);
    for (int i = 0; i < nh; ++i) {
      k2[i] = kTwoPi / g.L2 * i;
      nyq2[i] = (i == n2 / 2);
    }
  }
  ~Impl() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(real);
    fftw_free(spec);
    fftw_free(work);
  }

  void forward(const std::vector<double>& f) {
    std::copy(f.begin(), f.end(), real);
    fftw_execute(fwd);
  }
  // work -> out, normalized
  void backward(std::vector<double>& out) {
    fftw_execute(bwd);
    const double s = 1.0 / (double(n1) * n2);
    out.resize(std::size_t(n1) * n2);
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = real[k] * s;
  }
  bool nyquist(int i, int j) const { return nyq1[i] || nyq2[j]; }
  std::size_t at(int i, int j) const { return std::size_t(i) * nh + j; }
  // work = factor(kappa) * spec
  template <class F>
  void fill(F&& factor) {
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < nh; ++j) {
        const cplx v(spec[at(i, j)][0], spec[at(i, j)][1]);
        const cplx r = factor(i, j) * v;
        work[at(i, j)][0] = r.real();
        work[at(i, j)][1] = r.imag();
      }
  }
};

PoissonSolver::PoissonSolver(const Grid2D& grid) : grid_(grid) {
  grid.validate();
  impl_ = std::make_unique<Impl>(grid);
}

PoissonSolver::~PoissonSolver() = default;

void PoissonSolver::solve_into(const std::vector<double>& rho, FieldState& out, bool with_gradient) {
  if (rho.size() != grid_.nodes()) throw InvalidArgument("rho does not match the grid");
  Impl& m = *impl_;
  m.forward(rho);
  out.grid = grid_;
  out.rho = rho;
  auto inv_lap = [&](int i, int j) {
    const double kk = m.k1[i] * m.k1[i] + m.k2[j] * m.k2[j];
    return kk == 0.0 ? 0.0 : 1.0 / kk;
  };
  m.fill([&](int i, int j) { return cplx(inv_lap(i, j), 0.0); });
  m.backward(out.phi);
  // E = -grad phi: E_hat = -i kappa phi_hat
  m.fill([&](int i, int j) { return m.nyquist(i, j) ? cplx(0.0) : cplx(0.0, -m.k1[i] * inv_lap(i, j)); });
  m.backward(out.E1);
  m.fill([&](int i, int j) { return m.nyquist(i, j) ? cplx(0.0) : cplx(0.0, -m.k2[j] * inv_lap(i, j)); });
  m.backward(out.E2);
  if (with_gradient) {
    // d_b E_a = kappa_a kappa_b phi_hat
    m.fill([&](int i, int j) { return m.nyquist(i, j) ? cplx(0.0) : cplx(m.k1[i] * m.k1[i] * inv_lap(i, j), 0.0); });
    m.backward(out.dE11);
    m.fill([&](int i, int j) { return m.nyquist(i, j) ? cplx(0.0) : cplx(m.k1[i] * m.k2[j] * inv_lap(i, j), 0.0); });
    m.backward(out.dE12);
    m.fill([&](int i, int j) { return m.nyquist(i, j) ? cplx(0.0) : cplx(m.k2[j] * m.k2[j] * inv_lap(i, j), 0.0); });
    m.backward(out.dE22);
  } else {
    out.dE11.clear();
    out.dE12.clear();
    out.dE22.clear();
  }
}

FieldState PoissonSolver::solve(const std::vector<double>& rho, bool with_gradient) {
  FieldState out;
  solve_into(rho, out, with_gradient);
  return out;
}

std::vector<double> PoissonSolver::divergence(const std::vector<double>& E1, const std::vector<double>& E2) {
  Impl& m = *impl_;
  const std::size_t n = std::size_t(m.n1) * m.nh;
  std::vector<cplx> acc(n);
  m.forward(E1);
  for (int i = 0; i < m.n1; ++i)
    for (int j = 0; j < m.nh; ++j)
      acc[m.at(i, j)] = cplx(0.0, m.k1[i]) * cplx(m.spec[m.at(i, j)][0], m.spec[m.at(i, j)][1]);
  m.forward(E2);
  for (int i = 0; i < m.n1; ++i)
    for (int j = 0; j < m.nh; ++j) {
      cplx v = acc[m.at(i, j)] + cplx(0.0, m.k2[j]) * cplx(m.spec[m.at(i, j)][0], m.spec[m.at(i, j)][1]);
      if (m.nyquist(i, j)) v = 0.0;
      m.work[m.at(i, j)][0] = v.real();
      m.work[m.at(i, j)][1] = v.imag();
    }
  std::vector<double> out;
  m.backward(out);
  return out;
}

std::vector<double> PoissonSolver::neutral_band(const std::vector<double>& rho) {
  Impl& m = *impl_;
  m.forward(rho);
  m.fill([&](int i, int j) { return (m.nyquist(i, j) || (i == 0 && j == 0)) ? cplx(0.0) : cplx(1.0); });
  std::vector<double> out;
  m.backward(out);
  return out;
}

double PoissonSolver::spectral_energy(const std::vector<double>& rho) {
  Impl& m = *impl_;
  m.forward(rho);
  double sum = 0.0;
  for (int i = 0; i < m.n1; ++i)
    for (int j = 0; j < m.nh; ++j) {
      if (m.nyquist(i, j) || (i == 0 && j == 0)) continue;
      const double kk = m.k1[i] * m.k1[i] + m.k2[j] * m.k2[j];
      const double a = m.spec[m.at(i, j)][0], b = m.spec[m.at(i, j)][1];
      // half spectrum: interior columns stand for their conjugate partner
      const double mult = (j == 0 || 2 * j == m.n2) ? 1.0 : 2.0;
      sum += mult * (a * a + b * b) / kk;
    }
  const double n = double(m.n1) * m.n2;
  return sum / n * grid_.dx1() * grid_.dx2();
}

FieldState solve_poisson(const std::vector<double>& rho, const Grid2D& grid) {
  PoissonSolver solver(grid);
  return solver.solve(rho);
}

double electric_energy(const FieldState& f) {
  double s = 0.0;
  for (std::size_t k = 0; k < f.E1.size(); ++k) s += f.E1[k] * f.E1[k] + f.E2[k] * f.E2[k];
  return s * f.grid.dx1() * f.grid.dx2();
}

// ------------------------------------------------------------------ interpolation

namespace {

struct Stencil {
  int m;
  std::array<std::size_t, 4> row;
  std::array<std::size_t, 4> col;
  SplineWeights a, b;
};

inline Stencil stencil(const Grid2D& g, double x1, double x2, int m) {
  Stencil s;
  s.m = m;
  s.a = bspline_weights(x1, g.dx1(), m);
  s.b = bspline_weights(x2, g.dx2(), m);
  for (int i = 0; i <= m; ++i) {
    s.row[i] = std::size_t(wrap_index(s.a.base + i, g.n1)) * std::size_t(g.n2);
    s.col[i] = std::size_t(wrap_index(s.b.base + i, g.n2));
  }
  return s;
}

inline double gather(const Stencil& s, const std::vector<double>& f) {
  double acc = 0.0;
  for (int i = 0; i <= s.m; ++i) {
    double r = 0.0;
    for (int j = 0; j <= s.m; ++j) r += s.b.w[j] * f[s.row[i] + s.col[j]];
    acc += s.a.w[i] * r;
  }
  return acc;
}

}  // namespace

std::vector<Vec2> interpolate_field(const FieldState& fields, const std::vector<Vec2>& positions, int m) {
  if (m < 0 || m > 3) throw InvalidArgument("spline order must be 0..3");
  std::vector<Vec2> out(positions.size());
  for (std::size_t p = 0; p < positions.size(); ++p) {
    const Stencil s = stencil(fields.grid, wrap_position(positions[p][0], fields.grid.L1),
                              wrap_position(positions[p][1], fields.grid.L2), m);
    out[p] = Vec2(gather(s, fields.E1), gather(s, fields.E2));
  }
  return out;
}

void interpolate_field(const FieldState& fields, const ParticleEnsemble& ens, int m, ParticleField& out) {
  if (m < 0 || m > 3) throw InvalidArgument("spline order must be 0..3");
  const std::size_t np = ens.size();
  const bool grad = !fields.dE11.empty();
  out.E1.resize(np);
  out.E2.resize(np);
  if (grad) {
    out.d11.resize(np);
    out.d12.resize(np);
    out.d22.resize(np);
  }
#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < np; ++p) {
    const Stencil s = stencil(fields.grid, ens.x1[p], ens.x2[p], m);
    out.E1[p] = gather(s, fields.E1);
    out.E2[p] = gather(s, fields.E2);
    if (grad) {
      out.d11[p] = gather(s, fields.dE11);
      out.d12[p] = gather(s, fields.dE12);
      out.d22[p] = gather(s, fields.dE22);
    }
  }
}

// ------------------------------------------------------------------ time loop

PusherMode pusher_from_id(const std::string& id) {
  if (id == "order1") return PusherMode::order1;
  if (id == "order2") return PusherMode::order2;
  if (id == "sav_ua") return PusherMode::sav_ua;
  throw InvalidArgument("unknown pusher: " + id);
}

std::string to_string(PusherMode mode) {
  switch (mode) {
    case PusherMode::order1: return "order1";
    case PusherMode::order2: return "order2";
    case PusherMode::sav_ua: return "sav_ua";
  }
  return "?";
}

void PicConfig::validate() const {
  grid.validate();
  ic.validate();
  if (n_particles < 1) throw InvalidArgument("need at least one particle");
  if (spline_order < 0 || spline_order > 3) throw InvalidArgument("spline order must be 0..3");
  if (!(dt > 0.0) || !(T >= 0.0)) throw InvalidArgument("need dt > 0 and T >= 0");
  if (!(mag.eps > 0.0)) throw InvalidArgument("eps must be positive");
}

PicSimulation::PicSimulation(const PicConfig& cfg)
    : cfg_((cfg.validate(), cfg)),
      sys_(build_A(cfg.mag.profile, cfg.mag.B, cfg.mag.eps, ModelScaling::physical)) {
  if (cfg_.pusher == PusherMode::sav_ua)
    ints_ = std::make_unique<ParticleIntegrals>(cfg_.mag.profile, coupling(cfg_.mag.B, ModelScaling::physical),
                                                cfg_.mag.eps, cfg_.dt);
  poisson_ = std::make_unique<PoissonSolver>(cfg_.grid);
  ens_ = sample_initial(cfg_.ic, cfg_.grid, cfg_.n_particles, cfg_.seed, cfg_.mag, cfg_.sampling);
  refresh_fields();
}

PicSimulation::~PicSimulation() = default;

void PicSimulation::refresh_fields() {
  const std::vector<double> rho = deposit_density(ens_, cfg_.grid, cfg_.spline_order);
  poisson_->solve_into(rho, fields_, cfg_.pusher != PusherMode::order1);
}

void PicSimulation::reset_particles(ParticleEnsemble ens) {
  ens_ = std::move(ens);
  refresh_fields();
}

Vec2 PicSimulation::momentum() const {
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t p = 0; p < ens_.size(); ++p) {
    s1 += ens_.q1[p];
    s2 += ens_.q2[p];
  }
  return ens_.weight * Vec2(s1, s2);
}

PushMatrices PicSimulation::matrices(double t_n) const {
  PushMatrices pm;
  const StepContext ctx{t_n, cfg_.dt, 2};
  const Mat4 I = Mat4::Identity();
  switch (cfg_.pusher) {
    case PusherMode::order1:
      pm.P1 = I + Mat4(sys_.forward_power(1, cfg_.dt).evaluate(t_n));
      break;
    case PusherMode::order2: {
      const Order2Matrices o = order2_matrices(sys_, ctx);
      pm.P1 = I + Mat4(o.H1) + Mat4(o.H2);
      pm.K1 = Mat4(o.K1) + cfg_.dt * I;
      pm.K2 = Mat4(o.K2);
      break;
    }
    case PusherMode::sav_ua: {
      const ParticleBlocks blk = ints_->blocks(t_n);
      const Mat4 M = blk.B + 0.5 * blk.A;
      const Mat4 lhs = I - 0.5 * M;
      const Eigen::FullPivLU<Mat4> lu(lhs);
      if (!lu.isInvertible()) throw SingularMatrixError("SAV pusher: singular step matrix");
      pm.cayley_lhs_inv = lu.inverse();
      pm.cayley_rhs = I + 0.5 * M;
      pm.centered_moment = ints_->centered_moment(t_n);
      break;
    }
  }
  return pm;
}

void PicSimulation::step() {
  const double t_n = double(n_) * cfg_.dt;
  const double dt = cfg_.dt;
  const PushMatrices pm = matrices(t_n);
  interpolate_field(fields_, ens_, cfg_.spline_order, pf_);
  const std::size_t np = ens_.size();
  const double L1 = cfg_.grid.L1, L2 = cfg_.grid.L2;
  const PusherMode mode = cfg_.pusher;
  const ParticleIntegrals* ints = ints_.get();
  const double c_wrap = cfg_.wrap == WrapPolicy::keep_v
                            ? coupling(cfg_.mag.B, ModelScaling::physical) * cfg_.mag.profile((t_n + dt) / cfg_.mag.eps)
                            : 0.0;

#pragma omp parallel for schedule(static)
  for (std::size_t p = 0; p < np; ++p) {
    const Vec4 U(ens_.x1[p], ens_.x2[p], ens_.q1[p], ens_.q2[p]);
    const Vec2 E(pf_.E1[p], pf_.E2[p]);
    Vec4 U1;
    if (mode == PusherMode::order1) {
      U1 = pm.P1 * U;
      U1.tail<2>() += dt * E;
    } else {
      Mat2 dE;
      dE << pf_.d11[p], pf_.d12[p], pf_.d12[p], pf_.d22[p];
      if (mode == PusherMode::order2) {
        const Vec4 g(0.0, 0.0, E[0], E[1]);
        const Vec4 h = pm.K2 * U + (0.5 * dt * dt) * g;
        U1 = pm.P1 * U + pm.K1 * g;
        U1.tail<2>() += dE * h.head<2>();
      } else {
        const Vec2 x = U.head<2>(), q = U.tail<2>();
        const Vec2 b = -E;
        const Vec2 bm = b_mean_taylor(x, q, b, -dE, *ints, t_n);
        Vec4 f = Vec4::Zero();
        f.tail<2>() = -dt * bm - pm.centered_moment * j_apply(b);
        U1 = pm.cayley_lhs_inv * (pm.cayley_rhs * U + f);
      }
    }
    const double x1 = wrap_position(U1[0], L1), x2 = wrap_position(U1[1], L2);
    // J d = (d2, -d1)
    ens_.q1[p] = U1[2] - c_wrap * (x2 - U1[1]);
    ens_.q2[p] = U1[3] + c_wrap * (x1 - U1[0]);
    ens_.x1[p] = x1;
    ens_.x2[p] = x2;
  }
  ++n_;
  t_ = double(n_) * dt;
  refresh_fields();
}

void pic_step(PicSimulation& sim) { sim.step(); }

PicRun run_pic(const PicConfig& cfg) {
  PicSimulation sim(cfg);
  const long steps = std::lround(cfg.T / cfg.dt);
  if (std::abs(double(steps) * cfg.dt - cfg.T) > 1e-9 * std::max(1.0, cfg.T))
    throw InvalidArgument("dt must divide T");
  PicRun run;
  run.t.reserve(std::size_t(steps) + 1);
  run.energy.reserve(std::size_t(steps) + 1);
  run.t.push_back(0.0);
  run.energy.push_back(sim.energy());
  for (long n = 0; n < steps; ++n) {
    sim.step();
    run.t.push_back(sim.time());
    run.energy.push_back(sim.energy());
  }
  return run;
}

void write_pic_energy_csv(std::ostream& os, const PicRun& run) {
  os << "t,elec_energy\n" << std::setprecision(17);
  for (std::size_t i = 0; i < run.t.size(); ++i) os << run.t[i] << ',' << run.energy[i] << '\n';
}

void write_snapshot_csv(std::ostream& os, const ParticleEnsemble& ens) {
  os << "x1,x2,q1,q2\n" << std::setprecision(17);
  for (std::size_t p = 0; p < ens.size(); ++p)
    os << ens.x1[p] << ',' << ens.x2[p] << ',' << ens.q1[p] << ',' << ens.q2[p] << '\n';
}

}  // namespace uaosc
