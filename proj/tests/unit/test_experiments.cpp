#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "chiralfv/analytic.hpp"
#include "chiralfv/experiments.hpp"
#include "chiralfv/observables.hpp"

using namespace chiralfv;

TEST_CASE("quasirandom 1D IC") {
  QuasirandomICSpec zero;
  zero.epsilon = 0.0;
  for (double v : quasirandom_ic_1d(zero, Grid1D(32)).values) CHECK(v == doctest::Approx(uniform_density()).epsilon(1e-15));

  QuasirandomICSpec spec;
  const Field1D a = quasirandom_ic_1d(spec, Grid1D(256));
  const Field1D b = quasirandom_ic_1d(spec, Grid1D(256));
  CHECK(a.values == b.values);
  CHECK(std::abs(total_mass(a) - 1.0) < 1e-12);
  CHECK(*std::min_element(a.values.begin(), a.values.end()) >= 0.0);
  CHECK(polar_order(a).magnitude > 0.0);
  spec.seed = 2;
  CHECK(quasirandom_ic_1d(spec, Grid1D(256)).values != a.values);

  QuasirandomICSpec huge;
  huge.epsilon = 10.0;
  huge.max_redraws = 5;
  CHECK_THROWS_WITH(quasirandom_ic_1d(huge, Grid1D(64)), doctest::Contains("smaller epsilon"));
}

TEST_CASE("quasirandom 1D IC uses exact cell averages") {
  // a coarse and a fine grid from the same seed agree after fine-to-coarse averaging
  QuasirandomICSpec spec;
  spec.epsilon = 0.005;
  const Field1D c = quasirandom_ic_1d(spec, Grid1D(30));
  const Field1D f = quasirandom_ic_1d(spec, Grid1D(90));
  // cell k of the coarse grid covers fine cells 3k-1, 3k, 3k+1
  for (int k = 0; k < 30; ++k) {
    const double avg = (f[wrap(3 * k - 1, 90)] + f[3 * k] + f[3 * k + 1]) / 3;
    CHECK(avg == doctest::Approx(c[k]).epsilon(1e-13));
  }
}

TEST_CASE("quasirandom 3D IC") {
  QuasirandomICSpec zero;
  zero.epsilon = 0.0;
  for (double v : quasirandom_ic_3d(zero, Grid3D(4, 4, 8)).values) CHECK(v == doctest::Approx(uniform_density()));

  QuasirandomICSpec spec;
  spec.k_modes = 5;
  const Grid3D g(40, 40, 64);
  const Field3D f = quasirandom_ic_3d(spec, g);
  CHECK(std::abs(total_mass(f) - 1.0) < 1e-12);
  CHECK(*std::min_element(f.values.begin(), f.values.end()) >= 0.0);
  CHECK(max_spatial_deviation(f) > 0.0);
  // the x and y sine factors average out over the periodic grid
  for (int k = 0; k < g.l(); k += 7) {
    double s = 0;
    for (int i = 0; i < g.n(); ++i)
      for (int j = 0; j < g.m(); ++j) s += f.at(i, j, k);
    CHECK(s / g.spatial_size() == doctest::Approx(uniform_density()).epsilon(1e-13));
  }
}

TEST_CASE("perturb_spatial") {
  const Grid3D g(8, 8, 16);
  const Field1D prof = cell_averages(Grid1D(16), [](double x) { return (1 + 0.5 * std::cos(x)) / two_pi; });
  const Field3D hom = homogeneous_field(g, prof);
  QuasirandomICSpec zero;
  zero.epsilon = 0.0;
  CHECK(perturb_spatial(hom, zero).values == hom.values);
  QuasirandomICSpec spec{3, 1e-3, 4};
  const Field3D p = perturb_spatial(hom, spec);
  CHECK(std::abs(total_mass(p) - total_mass(hom)) < 1e-12);
  CHECK(max_spatial_deviation(p) >= 0.5e-3);
  CHECK(*std::min_element(p.values.begin(), p.values.end()) >= 0.0);

  const Field1D pa = perturb_angular(prof, spec);
  CHECK(std::abs(total_mass(pa) - total_mass(prof)) < 1e-12);
}

TEST_CASE("exact norms") {
  const Grid1D g(40);
  const Field1D f = cell_averages(g, [](double x) { return 1 + 0.3 * std::sin(x); });
  const auto r = reconstruct(f);
  // the reconstruction itself as the exact solution
  const auto self = [&](double phi) { return evaluate_at(r, phi); };
  const auto e0 = error_norms_exact(r, self, false);
  CHECK(e0.l1 < 1e-14);
  CHECK(e0.l2 < 1e-14);
  CHECK(e0.linf < 1e-14);
  const auto ec = error_norms_exact(r, [&](double phi) { return evaluate_at(r, phi) - 0.25; }, false);
  CHECK(ec.linf == doctest::Approx(0.25));
  CHECK(ec.l1 == doctest::Approx(0.25 * two_pi));

  // projected von Mises state converges at second order
  ModelParams p;
  const VonMises vm = von_mises(0.0, p);
  std::vector<double> h, e1, e2, ei;
  for (int l : {32, 64, 128, 256, 512, 1024}) {
    const Field1D v = cell_averages(Grid1D(l), [&](double x) { return vm(x); });
    const auto e = error_norms_exact(reconstruct(v), [&](double x) { return vm(x); }, true);
    h.push_back(v.grid.d_phi_cell());
    e1.push_back(e.l1);
    e2.push_back(e.l2);
    ei.push_back(e.linf);
  }
  for (const auto* e : {&e1, &e2, &ei}) {
    const double order = fitted_order(h, *e);
    CHECK(order >= 1.8);
    CHECK(order <= 2.2);
  }
}

TEST_CASE("alignment removes a rotation") {
  ModelParams p;
  const VonMises vm = von_mises(0.0, p);
  const Field1D shifted = cell_averages(Grid1D(256), [&](double x) { return vm(x - 0.7); });
  const auto r = reconstruct(shifted);
  const auto raw = error_norms_exact(r, [&](double x) { return vm(x); }, false);
  const auto aligned = error_norms_exact(r, [&](double x) { return vm(x); }, true);
  CHECK(aligned.linf < 1e-2 * raw.linf);
}

TEST_CASE("reference norms") {
  const Grid3D g(6, 6, 12);
  QuasirandomICSpec spec{2, 0.05, 3};
  const Field3D f = quasirandom_ic_3d(spec, g);
  const auto r = reconstruct(f);
  const auto e = error_norms_reference(r, r);
  CHECK(e.l1 == 0.0);
  CHECK(e.linf == 0.0);

  // 1D self-convergence: restriction of a fine field by cell averaging
  auto fn = [](double x) { return 1 + 0.4 * std::cos(x) + 0.2 * std::sin(3 * x); };
  const Field1D fine = cell_averages(Grid1D(729), fn);
  std::vector<double> h, err;
  for (int l : {27, 81, 243}) {
    const int ratio = 729 / l;
    Field1D coarse{Grid1D(l)};
    for (int k = 0; k < l; ++k) {
      double s = 0;
      for (int q = -ratio / 2; q <= ratio / 2; ++q) s += fine[wrap(k * ratio + q, 729)];
      coarse[k] = s / ratio;
    }
    h.push_back(coarse.grid.d_phi_cell());
    err.push_back(error_norms_reference(reconstruct(coarse), reconstruct(fine)).l1);
  }
  const double order = fitted_order(h, err);
  CHECK(order > 1.8);
  CHECK(order < 2.2);

  // 40 vs 60 cells compare on the 120-cell lcm grid
  const Field3D a(Grid3D(40, 1, 1), 1.0), b(Grid3D(60, 1, 1), 1.0);
  CHECK_NOTHROW(error_norms_reference(reconstruct(a), reconstruct(b), 4, 120));
  CHECK_THROWS_WITH(error_norms_reference(reconstruct(a), reconstruct(b), 4, 119), doctest::Contains("120"));
  const Field1D a1(Grid1D(40), 2.0), b1(Grid1D(60), 2.5);
  const auto d = error_norms_reference(reconstruct(a1), reconstruct(b1));
  CHECK(d.linf == doctest::Approx(0.5));
  CHECK(d.l1 == doctest::Approx(0.5 * two_pi));
}

TEST_CASE("fits") {
  CHECK(linear_fit_slope({0, 1, 2, 3}, {1, 3, 5, 7}) == doctest::Approx(2.0));
  CHECK(fitted_order({0.1, 0.05, 0.025}, {0.3 * 0.01, 0.3 * 0.0025, 0.3 * 0.000625}) == doctest::Approx(2.0));
  CHECK_THROWS(linear_fit_slope({1}, {1}));
}

TEST_CASE("continuation settles on the homogeneous state") {
  ModelParams p;
  p.alpha = 1.0;
  p.d_phi = 0.2;
  p.rho = 0.15;
  QuasirandomICSpec ic;
  ic.k_modes = 3;
  const Field3D init = quasirandom_ic_3d(ic, Grid3D(10, 10, 32));
  ContinuationConfig cfg;
  cfg.dt = 0.02;
  std::size_t calls = 0;
  cfg.on_point = [&](std::size_t, std::span<const double> s, double) {
    ++calls;
    CHECK(s.size() == init.values.size());
  };
  const auto recs = continuation_sweep(init, {SweepPoint{p, SweepDirection::forward}}, cfg);
  REQUIRE(recs.size() == 1);
  CHECK(calls == 1);
  CHECK(recs[0].converged);
  CHECK(recs[0].p_final <= 1e-3);
  CHECK(recs[0].monitor_final <= 1e-6);
  CHECK(std::abs(recs[0].mass_final - 1.0) < 1e-12);
}

TEST_CASE("1D continuation records both legs") {
  ModelParams a, b;
  a.alpha = b.alpha = 0.5;
  a.d_phi = 0.3;
  b.d_phi = 0.32;
  ContinuationConfig cfg;
  cfg.equilibrate_time = 20;
  cfg.fit_window = 10;
  cfg.slope_tol_forward = cfg.slope_tol_backward = 1e-4;
  const auto recs = continuation_sweep(quasirandom_ic_1d({}, Grid1D(64)),
                                       {{a, SweepDirection::forward}, {b, SweepDirection::forward}, {a, SweepDirection::backward}},
                                       cfg);
  REQUIRE(recs.size() == 3);
  CHECK(recs[2].direction == SweepDirection::backward);
  CHECK(recs[0].r_final > recs[1].r_final);
  for (const auto& r : recs) {
    CHECK(r.monitor_times.size() == r.monitor_series.size());
    CHECK(r.monitor_final == doctest::Approx(r.r_final));
  }
}
