#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "uaosc/pic_vlasov.hpp"

using namespace uaosc;

namespace {

Grid2D test_grid() { return Grid2D::make(32, 16, 0.5, 1.0); }

FieldState zero_fields(const Grid2D& g) {
  FieldState f;
  f.grid = g;
  for (auto* v : {&f.rho, &f.phi, &f.E1, &f.E2, &f.dE11, &f.dE12, &f.dE22}) v->assign(g.nodes(), 0.0);
  return f;
}

double node_x1(const Grid2D& g, int i) { return i * g.dx1(); }
double node_x2(const Grid2D& g, int j) { return j * g.dx2(); }

PicConfig small_config(PusherMode pusher, double B) {
  PicConfig cfg;
  cfg.grid = Grid2D::make(16, 4, 0.5, 2.0 * M_PI);
  cfg.ic.xi1 = 0.05;
  cfg.ic.k1 = 0.5;
  cfg.ic.k2 = 2.0 * M_PI;
  cfg.n_particles = 4000;
  cfg.dt = 0.05;
  cfg.T = 1.0;
  cfg.mag.B = B;
  cfg.mag.eps = 0.01;
  cfg.pusher = pusher;
  return cfg;
}

}  // namespace

TEST_CASE("grid validation") {
  CHECK_NOTHROW(test_grid().validate());
  CHECK_THROWS_AS(Grid2D::make(12, 16, 0.5, 0.5).validate(), InvalidArgument);
  CHECK_THROWS_AS(Grid2D::make(2, 16, 0.5, 0.5).validate(), InvalidArgument);
  const Grid2D g = test_grid();
  CHECK(g.L1 == doctest::Approx(4.0 * M_PI));
  CHECK(g.L2 == doctest::Approx(2.0 * M_PI));
}

TEST_CASE("B-spline weights") {
  const auto a = bspline_weights(0.25, 1.0, 1);
  CHECK(a.base == 0);
  CHECK(a.w[0] == doctest::Approx(0.75));
  CHECK(a.w[1] == doctest::Approx(0.25));
  CHECK(bspline_weights(0.6, 1.0, 0).base == 1);
  CHECK(bspline_weights(0.4, 1.0, 0).base == 0);
  const auto c = bspline_weights(2.0, 1.0, 2);
  CHECK(c.base == 1);
  CHECK(c.w[0] == doctest::Approx(0.125));
  CHECK(c.w[1] == doctest::Approx(0.75));
  CHECK(c.w[2] == doctest::Approx(0.125));
  const auto d = bspline_weights(3.0, 1.0, 3);
  CHECK(d.w[0] == doctest::Approx(1.0 / 6.0));
  CHECK(d.w[1] == doctest::Approx(4.0 / 6.0));
  CHECK(d.w[2] == doctest::Approx(1.0 / 6.0));
  CHECK(std::abs(d.w[3]) <= 1e-15);
  CHECK_THROWS_AS(bspline_weights(0.0, 1.0, 4), InvalidArgument);

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 40.0);
  for (int m = 0; m <= 3; ++m)
    for (int i = 0; i < 200; ++i) {
      const double x = u(rng);
      const auto s = bspline_weights(x, 0.7, m);
      double sum = 0.0, first = 0.0;
      for (int j = 0; j <= m; ++j) {
        CHECK(s.w[j] >= -1e-15);
        sum += s.w[j];
        first += s.w[j] * (s.base + j) * 0.7;
      }
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
      // m >= 1 splines reproduce linear functions
      if (m >= 1) CHECK(first == doctest::Approx(x).epsilon(1e-12));
    }
}

TEST_CASE("deposition of a lattice is constant and conserves charge") {
  const Grid2D g = test_grid();
  ParticleEnsemble ens;
  const int per = 2;
  ens.resize(std::size_t(g.n1 * per) * std::size_t(g.n2 * per));
  std::size_t p = 0;
  for (int i = 0; i < g.n1 * per; ++i)
    for (int j = 0; j < g.n2 * per; ++j, ++p) {
      ens.x1[p] = (i + 0.5) * g.dx1() / per;
      ens.x2[p] = (j + 0.5) * g.dx2() / per;
      ens.q1[p] = ens.q2[p] = 0.0;
    }
  ens.weight = g.L1 * g.L2 / double(ens.size());
  for (int m = 1; m <= 3; ++m) {
    const auto rho = deposit_density(ens, g, m);
    for (double r : rho) CHECK(r == doctest::Approx(1.0).epsilon(1e-12));
  }

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (std::size_t q = 0; q < ens.size(); ++q) {
    ens.x1[q] = u(rng) * g.L1;
    ens.x2[q] = u(rng) * g.L2;
  }
  for (int m = 0; m <= 3; ++m) {
    const auto rho = deposit_density(ens, g, m);
    double total = 0.0;
    for (double r : rho) total += r * g.dx1() * g.dx2();
    CHECK(total == doctest::Approx(double(ens.size()) * ens.weight).epsilon(1e-12));
  }
}

TEST_CASE("Poisson single mode") {
  const Grid2D g = test_grid();
  std::vector<double> rho(g.nodes());
  const double k1 = 0.5, k2 = 1.0, a = 0.3, b = 0.2;
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j)
      rho[g.index(i, j)] = 1.0 + a * std::cos(k1 * node_x1(g, i)) + b * std::sin(2.0 * k2 * node_x2(g, j));
  PoissonSolver solver(g);
  const FieldState f = solver.solve(rho, true);
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) {
      const double x1 = node_x1(g, i), x2 = node_x2(g, j);
      const std::size_t n = g.index(i, j);
      const double kk = 4.0 * k2 * k2;
      CHECK(f.phi[n] == doctest::Approx(a * std::cos(k1 * x1) / (k1 * k1) + b * std::sin(2 * k2 * x2) / kk).epsilon(1e-12));
      CHECK(std::abs(f.E1[n] - a * std::sin(k1 * x1) / k1) <= 1e-12);
      CHECK(std::abs(f.E2[n] + b * 2 * k2 * std::cos(2 * k2 * x2) / kk) <= 1e-12);
      CHECK(std::abs(f.dE11[n] - a * std::cos(k1 * x1)) <= 1e-12);
      CHECK(std::abs(f.dE12[n]) <= 1e-12);
      CHECK(std::abs(f.dE22[n] - b * std::sin(2 * k2 * x2)) <= 1e-12);
    }
  const FieldState g2 = solve_poisson(rho, g);
  for (std::size_t n = 0; n < g.nodes(); ++n) CHECK(g2.E1[n] == doctest::Approx(f.E1[n]).epsilon(1e-14));
}

TEST_CASE("Poisson energy identity and Gauss law on random data") {
  const Grid2D g = test_grid();
  std::mt19937_64 rng(7);
  std::normal_distribution<double> n;
  std::vector<double> rho(g.nodes());
  for (double& r : rho) r = 1.0 + 0.1 * n(rng);
  PoissonSolver solver(g);
  const FieldState f = solver.solve(rho);
  CHECK(electric_energy(f) == doctest::Approx(solver.spectral_energy(rho)).epsilon(1e-10));
  const auto div = solver.divergence(f.E1, f.E2);
  const auto band = solver.neutral_band(rho);
  double worst = 0.0, scale = 0.0;
  for (std::size_t i = 0; i < div.size(); ++i) {
    worst = std::max(worst, std::abs(div[i] - band[i]));
    scale = std::max(scale, std::abs(band[i]));
  }
  CHECK(worst <= 1e-12 * scale);
}

TEST_CASE("electric energy examples") {
  const Grid2D g = test_grid();
  FieldState f = zero_fields(g);
  CHECK(electric_energy(f) == 0.0);
  for (int i = 0; i < g.n1; ++i)
    for (int j = 0; j < g.n2; ++j) f.E1[g.index(i, j)] = std::sin(0.5 * node_x1(g, i));
  CHECK(electric_energy(f) == doctest::Approx(g.L1 * g.L2 / 2.0).epsilon(1e-12));
}

TEST_CASE("interpolation of a constant field and adjointness with deposition") {
  const Grid2D g = test_grid();
  FieldState f = zero_fields(g);
  std::fill(f.E1.begin(), f.E1.end(), 0.3);
  std::fill(f.E2.begin(), f.E2.end(), -1.1);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-5.0, 20.0);
  std::vector<Vec2> pos(50);
  for (auto& x : pos) x = Vec2(u(rng), u(rng));
  for (int m = 0; m <= 3; ++m)
    for (const Vec2& e : interpolate_field(f, pos, m)) CHECK((e - Vec2(0.3, -1.1)).norm() <= 1e-14);

  std::normal_distribution<double> n;
  for (double& e : f.E1) e = n(rng);
  for (int m = 0; m <= 3; ++m)
    for (int p = 0; p < 10; ++p) {
      ParticleEnsemble one;
      one.resize(1);
      one.x1[0] = std::abs(pos[p][0]);
      one.x2[0] = std::abs(pos[p][1]);
      one.weight = 0.37;
      one.x1[0] = std::fmod(one.x1[0], g.L1);
      one.x2[0] = std::fmod(one.x2[0], g.L2);
      const auto rho = deposit_density(one, g, m);
      double pairing = 0.0;
      for (std::size_t k = 0; k < rho.size(); ++k) pairing += rho[k] * f.E1[k] * g.dx1() * g.dx2();
      const Vec2 e = interpolate_field(f, {Vec2(one.x1[0], one.x2[0])}, m)[0];
      CHECK(pairing == doctest::Approx(one.weight * e[0]).epsilon(1e-12));
    }
}

TEST_CASE("sampling moments and first-mode amplitude") {
  InitCondition ic;
  ic.xi1 = 0.05;
  ic.k1 = 0.5;
  ic.k2 = 0.5;
  const Grid2D g = Grid2D::make(32, 32, 0.5, 0.5);
  const std::size_t np = 100000;
  for (auto mode : {SamplingMode::halton, SamplingMode::stratified}) {
    const auto ens = sample_initial(ic, g, np, 3, {}, mode);
    REQUIRE(ens.size() == np);
    CHECK(ens.weight == doctest::Approx(g.L1 * g.L2 / double(np)));
    double m1 = 0, m2 = 0, s1 = 0, s2 = 0, amp = 0;
    for (std::size_t p = 0; p < np; ++p) {
      CHECK_UNARY(ens.x1[p] >= 0.0);
      CHECK_UNARY(ens.x1[p] < g.L1);
      m1 += ens.q1[p];
      m2 += ens.q2[p];
      s1 += ens.q1[p] * ens.q1[p];
      s2 += ens.q2[p] * ens.q2[p];
      amp += std::cos(ic.k1 * ens.x1[p]);
    }
    m1 /= np;
    m2 /= np;
    CHECK(std::abs(m1) <= 0.01);
    CHECK(std::abs(m2) <= 0.01);
    CHECK(s1 / np == doctest::Approx(1.0).epsilon(0.02));
    CHECK(s2 / np == doctest::Approx(1.0).epsilon(0.02));
    CHECK(2.0 * amp / np == doctest::Approx(0.05).epsilon(0.1));

    // cell counts follow the perturbed density
    std::vector<int> counts(g.n1, 0);
    for (std::size_t p = 0; p < np; ++p) ++counts[std::min(g.n1 - 1, int(ens.x1[p] / g.dx1()))];
    for (int i = 0; i < g.n1; ++i) {
      const double a = i * g.dx1(), b = a + g.dx1();
      const double expect = np * ((b - a) + ic.xi1 * (std::sin(ic.k1 * b) - std::sin(ic.k1 * a)) / ic.k1) / g.L1;
      CHECK(std::abs(counts[i] - expect) <= 0.03 * expect);
    }
  }
}

TEST_CASE("sampling is reproducible and seed dependent") {
  InitCondition ic;
  const Grid2D g = Grid2D::make(16, 16, 0.5, 0.5);
  const auto a = sample_initial(ic, g, 1000, 9);
  const auto b = sample_initial(ic, g, 1000, 9);
  const auto c = sample_initial(ic, g, 1000, 10);
  CHECK(a.x1 == b.x1);
  CHECK(a.q2 == b.q2);
  CHECK(a.x1 != c.x1);
}

TEST_CASE("sampled q is the guiding momentum of the sampled velocity") {
  InitCondition ic;
  const Grid2D g = Grid2D::make(16, 16, 0.5, 0.5);
  MagneticSetup mag;
  mag.B = 4.0;
  mag.eps = 0.1;
  const auto plain = sample_initial(ic, g, 500, 11);
  const auto mag_ens = sample_initial(ic, g, 500, 11, mag);
  // physical coupling B/2 times theta(0) = 1
  for (std::size_t p = 0; p < 500; ++p) {
    CHECK(mag_ens.q1[p] == doctest::Approx(plain.q1[p] - 2.0 * plain.x2[p]).epsilon(1e-14));
    CHECK(mag_ens.q2[p] == doctest::Approx(plain.q2[p] + 2.0 * plain.x1[p]).epsilon(1e-14));
  }
}

TEST_CASE("free streaming without field") {
  for (auto pusher : {PusherMode::order1, PusherMode::order2, PusherMode::sav_ua}) {
    PicConfig cfg = small_config(pusher, 0.0);
    PicSimulation sim(cfg);
    ParticleEnsemble ens;
    ens.resize(3);
    ens.weight = 1.0;
    const double x1[] = {1.0, 5.0, 12.0}, x2[] = {0.1, 0.5, 0.9}, q1[] = {0.5, -2.0, 3.0}, q2[] = {0.0, 1.0, -0.3};
    for (int p = 0; p < 3; ++p) {
      ens.x1[p] = x1[p];
      ens.x2[p] = x2[p];
      ens.q1[p] = q1[p];
      ens.q2[p] = q2[p];
    }
    sim.reset_particles(ens);
    sim.mutable_fields() = zero_fields(cfg.grid);
    sim.step();
    const auto& out = sim.particles();
    for (int p = 0; p < 3; ++p) {
      const double e1 = std::fmod(x1[p] + cfg.dt * q1[p] + cfg.grid.L1, cfg.grid.L1);
      const double e2 = std::fmod(x2[p] + cfg.dt * q2[p] + cfg.grid.L2, cfg.grid.L2);
      CHECK(out.x1[p] == doctest::Approx(e1).epsilon(1e-13));
      CHECK(out.x2[p] == doctest::Approx(e2).epsilon(1e-13));
      CHECK(out.q1[p] == doctest::Approx(q1[p]).epsilon(1e-14));
      CHECK(out.q2[p] == doctest::Approx(q2[p]).epsilon(1e-14));
    }
    CHECK(sim.steps_taken() == 1);
    CHECK(sim.time() == doctest::Approx(cfg.dt));
  }
}

TEST_CASE("total momentum is conserved without magnetic field") {
  PicConfig cfg = small_config(PusherMode::order1, 0.0);
  PicSimulation sim(cfg);
  const Vec2 p0 = sim.momentum();
  double scale = 0.0;
  for (std::size_t p = 0; p < sim.particles().size(); ++p) scale += std::abs(sim.particles().q1[p]);
  for (int k = 0; k < 10; ++k) sim.step();
  CHECK((sim.momentum() - p0).norm() <= 1e-11 * scale);
}

TEST_CASE("runs are deterministic") {
  for (auto pusher : {PusherMode::order1, PusherMode::order2, PusherMode::sav_ua}) {
    const PicConfig cfg = small_config(pusher, 1.0);
    const PicRun a = run_pic(cfg);
    const PicRun b = run_pic(cfg);
    REQUIRE(a.energy.size() == 21);
    CHECK(a.energy == b.energy);
    CHECK(a.t.back() == doctest::Approx(1.0));
    for (double e : a.energy) CHECK(std::isfinite(e));
  }
}

TEST_CASE("initial electric energy follows the perturbation") {
  // E1 = xi sin(k x1) / k gives energy L1 L2 xi^2 / (2 k^2)
  PicConfig cfg = small_config(PusherMode::order2, 0.0);
  cfg.n_particles = 200000;
  PicSimulation sim(cfg);
  const double expect = cfg.grid.L1 * cfg.grid.L2 * 0.05 * 0.05 / (2.0 * 0.25);
  CHECK(sim.energy() == doctest::Approx(expect).epsilon(0.05));
}

TEST_CASE("configuration validation") {
  PicConfig cfg = small_config(PusherMode::order2, 0.0);
  cfg.ic.xi1 = 1.5;
  CHECK_THROWS_AS(PicSimulation{cfg}, InvalidArgument);
  cfg = small_config(PusherMode::order2, 0.0);
  cfg.n_particles = 0;
  CHECK_THROWS_AS(PicSimulation{cfg}, InvalidArgument);
  CHECK(pusher_from_id(to_string(PusherMode::sav_ua)) == PusherMode::sav_ua);
  CHECK_THROWS(pusher_from_id("rk4"));
}
