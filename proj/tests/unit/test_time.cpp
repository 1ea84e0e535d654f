#include <doctest.h>

#include <cmath>

#include "chiralfv/analytic.hpp"
#include "chiralfv/experiments.hpp"
#include "chiralfv/homogeneous_solver.hpp"
#include "chiralfv/kinetic_solver.hpp"
#include "chiralfv/observables.hpp"
#include "chiralfv/time_integration.hpp"

using namespace chiralfv;

namespace {

double heun_decay(double dt, int steps) {
  std::vector<double> s{1.0};
  RkWorkspace w;
  const RhsFunction rhs = [](std::span<const double> f, std::span<double> out) { out[0] = -f[0]; };
  for (int i = 0; i < steps; ++i) ssp_rk2_step(s, rhs, dt, w);
  return s[0];
}

}  // namespace

TEST_CASE("ssp_rk2_step") {
  std::vector<double> s{0.3, 0.4};
  RkWorkspace w;
  ssp_rk2_step(s, [](std::span<const double>, std::span<double> out) { std::fill(out.begin(), out.end(), 0.0); }, 0.1, w);
  CHECK(s == std::vector<double>{0.3, 0.4});

  CHECK(heun_decay(0.1, 1) == doctest::Approx(0.905).epsilon(1e-15));
  const double e1 = std::abs(heun_decay(0.1, 10) - std::exp(-1.0));
  const double e2 = std::abs(heun_decay(0.05, 20) - std::exp(-1.0));
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("negative stages are reported") {
  std::vector<double> s{1.0};
  RkWorkspace w;
  const RhsFunction rhs = [](std::span<const double>, std::span<double> out) { out[0] = -100.0; };
  CHECK_THROWS_WITH_AS(ssp_rk2_step(s, rhs, 0.1, w), doctest::Contains("stage"), std::runtime_error);
  std::vector<double> tiny{-1e-16, 2.0};
  check_stage(tiny, 1);
  CHECK(tiny[0] == 0.0);
}

TEST_CASE("split step with v0 = 0 is one angular Heun step") {
  const Grid3D g(6, 5, 24);
  ModelParams p;
  p.v0 = 0.0;
  p.alpha = 0.9;
  p.rho = 0.2;
  QuasirandomICSpec ic;
  ic.k_modes = 3;
  ic.epsilon = 0.05;
  const Field3D f = quasirandom_ic_3d(ic, g);
  StepperConfig cfg;
  const double dt = 0.01;
  const Field3D a = split_step(f, dt, p, cfg);

  KineticOperator op(g, p, cfg.theta);
  std::vector<double> b = f.values;
  RkWorkspace w;
  ssp_rk2_step(b, [&](std::span<const double> x, std::span<double> out) { op.evaluate_angular(x, out); }, dt, w);
  for (std::size_t c = 0; c < b.size(); ++c) CHECK(a.values[c] == doctest::Approx(b[c]).epsilon(1e-14).scale(1.0));
}

TEST_CASE("homogeneous split stepping matches the 1D stepper") {
  const Grid1D g1(32);
  QuasirandomICSpec ic;
  ic.epsilon = 0.03;
  const Field1D prof = quasirandom_ic_1d(ic, g1);
  const Grid3D g(5, 4, 32);
  Field3D f3 = homogeneous_field(g, prof);
  ModelParams p;
  p.alpha = 1.0;
  StepperConfig cfg;
  Stepper3D s3(g, p, cfg);
  HomogeneousOperator op(g1, p, cfg.theta, {PotentialMethod::fourier_mode});
  std::vector<double> f1 = prof.values;
  RkWorkspace w;
  const double dt = 0.004;
  for (int n = 0; n < 50; ++n) {
    s3.split_step(f3.values, dt);
    ssp_rk2_step(f1, [&](std::span<const double> x, std::span<double> out) { op.evaluate(x, out); }, dt, w);
  }
  double err = 0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.m(); ++j)
      for (int k = 0; k < g.l(); ++k) err = std::max(err, std::abs(f3.at(i, j, k) - f1[static_cast<std::size_t>(k)]));
  CHECK(err < 1e-12);
}

TEST_CASE("uniform state stays uniform") {
  Field1D f(Grid1D(64), uniform_density());
  ModelParams p;
  p.alpha = 0.4;
  StepperConfig cfg;
  cfg.t_end = 5.0;
  cfg.dt = 0.01;
  run(f, 0.0, p, cfg, {});
  for (double v : f.values) CHECK(v == doctest::Approx(uniform_density()).epsilon(1e-13));
  CHECK(std::abs(total_mass(f) - 1.0) <= 1e-12);
}

TEST_CASE("1D run converges to the von Mises state") {
  ModelParams p;
  QuasirandomICSpec ic;
  Field1D f = quasirandom_ic_1d(ic, Grid1D(256));
  StepperConfig cfg;
  cfg.t_end = 200.0;
  cfg.dt = 5e-3;
  run(f, 0.0, p, cfg, {});
  const VonMises vm = von_mises(0.0, p);
  CHECK(std::abs(polar_order(f).magnitude - vm.r_mag) < 1e-3);
  const auto e = error_norms_exact(reconstruct(f), [&](double phi) { return vm(phi); }, true);
  CHECK(e.linf < 1e-3);
}

TEST_CASE("3D run relaxes to a spatially homogeneous plane wave") {
  ModelParams p;
  p.alpha = 1.0;
  p.rho = 0.15;
  // the product-sine IC has an exactly uniform spatial mean, so start from a
  // perturbed homogeneous state instead
  const Grid3D g(10, 10, 32);
  Field3D f = perturb_spatial(homogeneous_field(g, quasirandom_ic_1d({}, Grid1D(32))), {3, 1e-3, 5});
  const double d0 = max_spatial_deviation(f);
  StepperConfig cfg;
  cfg.t_end = 60.0;
  cfg.dt = 0.02;
  run(f, 0.0, p, cfg, {});
  CHECK(max_spatial_deviation(f) < 1e-3 * d0);
  CHECK(polar_order(f).magnitude > 0.5);
}

TEST_CASE("observer cadence does not change the trajectory") {
  ModelParams p;
  p.alpha = 0.5;
  QuasirandomICSpec ic;
  const Field1D f0 = quasirandom_ic_1d(ic, Grid1D(64));
  StepperConfig cfg;
  cfg.t_end = 3.0;
  cfg.dt = 0.01;
  Field1D a = f0, b = f0;
  std::vector<double> times;
  RunHooks hooks;
  hooks.observe_every = 0.25;
  hooks.observe = [&](double t, std::span<const double>, double) { times.push_back(t); };
  int cps = 0;
  hooks.checkpoint_every = 1.0;
  hooks.checkpoint = [&](double, std::span<const double>) { ++cps; };
  const RunResult ra = run(a, 0.0, p, cfg, hooks);
  const RunResult rb = run(b, 0.0, p, cfg, {});
  CHECK(a.values == b.values);
  CHECK(ra.steps == rb.steps);
  CHECK(ra.time == doctest::Approx(3.0));
  REQUIRE(times.size() == 13);
  CHECK(times.front() == 0.0);
  for (std::size_t i = 1; i < times.size(); ++i) CHECK(times[i] > times[i - 1]);
  CHECK(cps >= 3);

  RunHooks stop;
  stop.stop = [](double t, std::span<const double>) { return t > 1.0; };
  Field1D c = f0;
  const RunResult rc = run(c, 0.0, p, cfg, stop);
  CHECK(rc.stopped_early);
  CHECK(rc.time < 1.1);
}

TEST_CASE("stepper config validation") {
  StepperConfig c;
  c.cfl_safety = 1.5;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("cfl_safety"), std::invalid_argument);
  c = {};
  c.theta = 3;
  CHECK_THROWS_WITH_AS(c.validate(), doctest::Contains("theta"), std::invalid_argument);
}
