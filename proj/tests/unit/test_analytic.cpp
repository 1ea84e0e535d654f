#include <doctest.h>

#include <cmath>
#include <numbers>

#include "chiralfv/analytic.hpp"

using namespace chiralfv;

namespace {

// I1/I0 from the standard library's modified Bessel functions.
double std_ratio(double k) { return std::cyl_bessel_i(1.0, k) / std::cyl_bessel_i(0.0, k); }

// Self-consistent R by plain fixed-point iteration on the std ratio.
double oracle_von_mises_r(double sigma, double d) {
  double r = 0.5;
  for (int i = 0; i < 20000; ++i) r = std_ratio(sigma * r / d);
  return r;
}

}  // namespace

TEST_CASE("uniform density") {
  CHECK(composite_gauss([](double) { return uniform_density(); }, 0, two_pi, 8) == doctest::Approx(1.0));
}

TEST_CASE("bessel ratio") {
  CHECK(bessel_ratio(0.0) == 0.0);
  CHECK(std::abs(bessel_ratio(100.0) - (1 - 1 / 200.0)) < 1e-3);
  double prev = 0;
  for (double k = 0.1; k < 60; k += 0.7) {
    const double r = bessel_ratio(k);
    CHECK(r > prev);
    CHECK(r == doctest::Approx(std_ratio(k)).epsilon(1e-10));
    prev = r;
  }
  for (double k : {0.5, 3.0, 40.0})
    CHECK(bessel_i0_scaled(k) == doctest::Approx(std::cyl_bessel_i(0.0, k) * std::exp(-k)).epsilon(1e-10));
}

TEST_CASE("von Mises") {
  ModelParams p;
  p.d_phi = 0.5;
  CHECK(von_mises(0.0, p).r_mag == 0.0);
  p.d_phi = 0.7;
  CHECK(von_mises(0.0, p).r_mag == 0.0);

  p.d_phi = 0.1;
  const VonMises vm = von_mises(0.3, p);
  CHECK(vm.r_mag == doctest::Approx(oracle_von_mises_r(1.0, 0.1)).epsilon(1e-10));
  CHECK(std::abs(vm.r_mag - 0.947) < 2e-3);
  CHECK(composite_gauss([&](double x) { return vm(x); }, 0, two_pi, 64) == doctest::Approx(1.0).epsilon(1e-10));
  // peak at the mean direction
  CHECK(vm(0.3) > vm(0.2));
  CHECK(vm(0.3) > vm(0.4));
}

TEST_CASE("traveling wave profile") {
  ModelParams p;
  const VonMises vm = von_mises(0.0, p);
  const TravelingWaveProfile g0(vm.r_mag, 0.0, p);
  for (double w = 0; w < two_pi; w += 0.37) CHECK(g0(w) == doctest::Approx(vm(w)).epsilon(1e-9));

  p.alpha = 1.0;
  const auto sol = solve_sce(p);
  REQUIRE(sol.profile);
  const TravelingWaveProfile& g = *sol.profile;
  CHECK(g(0.0) == doctest::Approx(g(two_pi)).epsilon(1e-12));
  CHECK(g.integrate([](double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-10));
  const double c = g.integrate([](double w) { return std::cos(w); });
  const double s = g.integrate([](double w) { return std::sin(w); });
  const double mu = std::atan2(s, c);
  const double m3 = g.integrate([&](double w) {
    double d = std::remainder(w - mu, two_pi);
    return d * d * d;
  });
  CHECK(std::abs(m3) > 1e-3);
}

TEST_CASE("self-consistent traveling waves") {
  ModelParams p;
  const auto s0 = solve_sce(p);
  CHECK(std::abs(s0.v_wave) < 1e-12);
  CHECK(s0.r_mag == doctest::Approx(von_mises(0.0, p).r_mag).epsilon(1e-9));

  p.alpha = 1.0;
  const auto s1 = solve_sce(p);
  CHECK(!s1.disordered);
  CHECK(s1.r_mag > 0.0);
  CHECK(s1.r_mag < 1.0);
  CHECK(s1.v_wave < 0.0);
  CHECK(s1.residual <= 1e-10);
  const auto res = sce_residual(s1.r_mag, s1.v_wave, p);
  CHECK(std::abs(res.cos_part) < 1e-10);
  CHECK(std::abs(res.sin_part) < 1e-10);

  for (double a : {0.5, 1.0, 1.5}) {
    ModelParams q;
    q.alpha = a;
    q.d_phi = transition_d_phi(q) - 1e-5;
    const auto near = solve_sce(q, hydrodynamic_r_near_transition(q, critical_wave_speed(q)), critical_wave_speed(q));
    CHECK(!near.disordered);
    CHECK(near.r_mag < 0.02);
    CHECK(std::abs(near.v_wave - critical_wave_speed(q)) < 1e-3);
    q.d_phi = transition_d_phi(q) + 0.01;
    CHECK(solve_sce(q).disordered);
  }
}

TEST_CASE("hydrodynamic approximation") {
  ModelParams p;
  p.alpha = 0.5;
  p.d_phi = transition_d_phi(p);
  CHECK(hydrodynamic_r_near_transition(p, 0.0) == doctest::Approx(0.0).scale(1.0));
  ModelParams q;
  q.d_phi = 0.45;
  CHECK(hydrodynamic_r_near_transition(q, 0.0) == doctest::Approx(std::sqrt(0.18)).epsilon(1e-12));
  for (double delta : {0.005, 0.01, 0.02}) {
    p.d_phi = transition_d_phi(p) - delta;
    const auto s = solve_sce(p);
    const double hr = hydrodynamic_r_near_transition(p, s.v_wave);
    CHECK(std::abs(hr - s.r_mag) <= 0.15 * s.r_mag);
  }
}

TEST_CASE("r decay threshold") {
  ModelParams p;
  CHECK(r_decay_threshold(p) == doctest::Approx(1.0));
  p.alpha = std::numbers::pi / 2;
  CHECK(r_decay_threshold(p) == doctest::Approx(0.5));
  p.alpha = 1.0;
  CHECK(r_decay_threshold(p) == doctest::Approx(std::cos(1.0) + 0.5 * std::sin(1.0)));
  CHECK(r_decay_threshold(p) == doctest::Approx(0.961).epsilon(1e-3));
}
