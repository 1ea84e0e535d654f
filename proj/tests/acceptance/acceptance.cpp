// Acceptance checks. `acceptance <id>` runs one criterion, `acceptance all`
// runs every one. Each prints a single PASS/FAIL line; the exit status is
// nonzero if any check failed.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "chiralfv/analytic.hpp"
#include "chiralfv/experiments.hpp"
#include "chiralfv/homogeneous_solver.hpp"
#include "chiralfv/kinetic_solver.hpp"
#include "chiralfv/observables.hpp"
#include "chiralfv/time_integration.hpp"

using namespace chiralfv;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

bool within(double v, double lo, double hi) { return v >= lo && v <= hi; }

// Fitted orders of a 1D stationary/traveling refinement study.
Outcome convergence_1d(const ModelParams& p, const AngularProfile& exact) {
  StepperConfig cfg;
  cfg.dt = 1e-4;
  cfg.t_end = 100.0;
  const std::vector<int> sizes{32, 64, 128, 256, 512};
  // dt must sit below the stable bound on every grid
  for (int l : sizes) {
    Stepper1D s(Grid1D(l), p, cfg);
    const Field1D f = cell_averages(Grid1D(l), exact);
    if (!(cfg.dt < s.stable_dt(f.values))) return {false, "dt above the stable bound at L=" + std::to_string(l)};
  }
  const RefinementStudy st = refinement_study_1d(p, sizes, cfg, QuasirandomICSpec{}, exact);
  std::ostringstream os;
  for (const auto& r : st.rows) os << "L=" << r.l << " L1=" << fmt(r.err.l1, 3) << " ";
  os << "orders L1=" << fmt(st.order_l1, 4) << " L2=" << fmt(st.order_l2, 4) << " Linf=" << fmt(st.order_linf, 4);
  const bool ok = within(st.order_l1, 1.8, 2.2) && within(st.order_l2, 1.8, 2.2) && within(st.order_linf, 1.8, 2.2);
  return {ok, os.str()};
}

Outcome c1() {
  ModelParams p;
  p.alpha = 0.0;
  p.d_phi = 0.1;
  return convergence_1d(p, exact_profile(p));
}

Outcome c2() {
  ModelParams p;
  p.alpha = 1.0;
  p.d_phi = 0.1;
  const auto sol = solve_sce(p);
  if (sol.disordered || !sol.profile) return {false, "SCE reported a disordered state"};
  const TravelingWaveProfile prof = *sol.profile;
  Outcome o = convergence_1d(p, [prof](double w) { return prof(w); });
  o.detail = "SCE R=" + fmt(sol.r_mag, 10) + " v=" + fmt(sol.v_wave, 10) + "; " + o.detail;
  return o;
}

// Long 1D run; R from the final state, v from the phase drift of the last
// 100 time units.
struct LongRun {
  double r = 0.0;
  double v = 0.0;
};

LongRun long_run_1d(const ModelParams& p, int l, double t_end) {
  Field1D f = quasirandom_ic_1d({}, Grid1D(l));
  StepperConfig cfg;
  cfg.dt = 5e-3;
  cfg.t_end = t_end;
  std::vector<double> ts, th;
  double last = 0.0;
  RunHooks hooks;
  hooks.observe_every = 0.5;
  hooks.observe = [&](double t, std::span<const double> s, double) {
    if (t < t_end - 100.0) return;
    const double phase = polar_order(Field1D(f.grid, std::vector<double>(s.begin(), s.end()))).phase;
    if (th.empty()) th.push_back(phase);
    else th.push_back(th.back() + std::remainder(phase - last, two_pi));
    last = phase;
    ts.push_back(t);
  };
  run(f, 0.0, p, cfg, hooks);
  return {polar_order(f).magnitude, linear_fit_slope(ts, th)};
}

Outcome c3() {
  bool ok = true;
  std::ostringstream os;
  int ordered = 0;
  for (double a : {0.5, 1.0, 1.5})
    for (double d : {0.1, 0.2, 0.3, 0.4}) {
      ModelParams p;
      p.alpha = a;
      p.d_phi = d;
      const LongRun fvm = long_run_1d(p, 256, 2000.0);
      if (d < transition_d_phi(p)) {
        ++ordered;
        const auto sce = solve_sce(p);
        const double dr = std::abs(fvm.r - sce.r_mag), dv = std::abs(fvm.v - sce.v_wave);
        const bool good = !sce.disordered && dr <= 1e-2 && dv <= 2e-2;
        ok &= good;
        os << "(a=" << a << ",D=" << d << " dR=" << fmt(dr, 2) << " dv=" << fmt(dv, 2) << (good ? "" : " !") << ") ";
      } else {
        // disordered side: both methods give R = 0
        const bool good = fvm.r < 1e-3 && solve_sce(p).disordered;
        ok &= good;
        os << "(a=" << a << ",D=" << d << " disordered R=" << fmt(fvm.r, 2) << (good ? "" : " !") << ") ";
      }
    }
  return {ok, std::to_string(ordered) + " ordered points compared; " + os.str()};
}

Outcome c4() {
  bool ok = true;
  std::ostringstream os;
  for (double a : {0.5, 1.0}) {
    ModelParams base;
    base.alpha = a;
    const double dc = transition_d_phi(base);
    // d_phi on multiples of 0.0025 around the line
    const double lo = std::floor((dc - 0.02) / 0.0025) * 0.0025;
    std::vector<SweepPoint> path;
    for (int i = 0; i <= 16; ++i) {
      ModelParams p = base;
      p.d_phi = lo + 0.0025 * i;
      path.push_back({p, SweepDirection::forward});
    }
    ContinuationConfig cfg;
    cfg.equilibrate_time = 100.0;
    cfg.fit_window = 50.0;
    cfg.slope_tol_forward = 1e-6;
    cfg.max_steps = 2000000;
    const auto recs = continuation_sweep(quasirandom_ic_1d({}, Grid1D(128)), path, cfg);
    // R has vanished once it falls below 1e-2
    double last_ordered = -1.0, first_vanished = -1.0;
    for (const auto& r : recs) {
      if (r.r_final >= 1e-2) last_ordered = r.params.d_phi;
      else if (first_vanished < 0.0) first_vanished = r.params.d_phi;
    }
    const bool bracketed = last_ordered > 0.0 && first_vanished > 0.0 && first_vanished > last_ordered;
    const double mid = 0.5 * (last_ordered + first_vanished);
    const bool good = bracketed && std::abs(first_vanished - last_ordered) <= 0.0025 + 1e-12 &&
                      std::abs(mid - dc) <= 0.01;
    bool converged = true;
    for (const auto& r : recs) converged &= r.converged;
    ok &= good;
    os << "alpha=" << a << " line=" << fmt(dc, 6) << " bracket=[" << fmt(last_ordered, 6) << ", "
       << fmt(first_vanished, 6) << "]" << (converged ? "" : " (some points hit the step cap)") << "; ";
  }
  return {ok, os.str()};
}

Outcome c5() {
  bool ok = true;
  std::ostringstream os;
  for (double a : {0.5, 1.0, 1.5}) {
    ModelParams p;
    p.alpha = a;
    p.d_phi = transition_d_phi(p) - 1e-5;
    const double vc = critical_wave_speed(p);
    const auto s = solve_sce(p, hydrodynamic_r_near_transition(p, vc), vc);
    const double err = std::abs(s.v_wave - vc);
    ok &= !s.disordered && err < 1e-3;
    os << "alpha=" << a << " R=" << fmt(s.r_mag, 3) << " |v - v_c|=" << fmt(err, 3) << "; ";
  }
  return {ok, os.str()};
}

Outcome c6() {
  bool ok = true;
  std::ostringstream os;
  {
    ModelParams p;
    p.alpha = 1.0;
    Field1D f = quasirandom_ic_1d({}, Grid1D(256));
    StepperConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_end = 1000.0;  // 1e6 steps of 1e-3
    double worst_mass = 0.0, min_f = std::numeric_limits<double>::infinity();
    RunHooks hooks;
    hooks.stop = [&](double, std::span<const double> s) {
      double m = 0.0;
      for (double v : s) {
        m += v;
        min_f = std::min(min_f, v);
      }
      worst_mass = std::max(worst_mass, std::abs(m * f.grid.d_phi_cell() - 1.0));
      return false;
    };
    const RunResult r = run(f, 0.0, p, cfg, hooks);
    // the last step may be a truncated sliver
    const bool good = r.steps >= 1000000 && r.steps <= 1000001 && worst_mass <= 1e-10 && min_f >= 0.0;
    ok &= good;
    os << "1D steps=" << r.steps << " max|mass-1|=" << fmt(worst_mass, 3) << " min f=" << fmt(min_f, 3) << "; ";
  }
  {
    ModelParams p;
    p.alpha = 1.0;
    p.rho = 0.05;
    QuasirandomICSpec ic;
    ic.k_modes = 5;
    const Grid3D g(20, 20, 64);
    Field3D f = quasirandom_ic_3d(ic, g);
    StepperConfig cfg;
    cfg.dt = 0.01;
    cfg.t_end = 100.0;  // 1e4 steps
    cfg.use_splitting = true;
    double worst_mass = 0.0, min_f = std::numeric_limits<double>::infinity();
    RunHooks hooks;
    hooks.stop = [&](double, std::span<const double> s) {
      double m = 0.0;
      for (double v : s) {
        m += v;
        min_f = std::min(min_f, v);
      }
      worst_mass = std::max(worst_mass, std::abs(m * g.cell_volume() - 1.0));
      return false;
    };
    const RunResult r = run(f, 0.0, p, cfg, hooks);
    const bool good = r.steps >= 10000 && r.steps <= 10001 && worst_mass <= 1e-10 && min_f >= 0.0;
    ok &= good;
    os << "3D split steps=" << r.steps << " max|mass-1|=" << fmt(worst_mass, 3) << " min f=" << fmt(min_f, 3);
  }
  return {ok, os.str()};
}

Outcome c7() {
  ModelParams p;
  p.alpha = 1.0;
  p.rho = 0.2;
  const Field1D prof = quasirandom_ic_1d({}, Grid1D(64));
  const Grid3D g(8, 8, 64);
  Field3D f3 = homogeneous_field(g, prof);
  Field1D f1 = prof;
  StepperConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_end = 1.0;  // 1e3 steps
  cfg.use_splitting = true;
  const RunResult r3 = run(f3, 0.0, p, cfg, {});
  const RunResult r1 = run(f1, 0.0, p, cfg, {});
  double err = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.m(); ++j)
      for (int k = 0; k < g.l(); ++k) err = std::max(err, std::abs(f3.at(i, j, k) - f1[k]));
  const bool ok = r3.steps == 1000 && r1.steps == 1000 && err <= 1e-10;
  return {ok, "steps 3D=" + std::to_string(r3.steps) + " 1D=" + std::to_string(r1.steps) + " Linf=" + fmt(err, 3)};
}

Outcome c8() {
  ModelParams p;
  p.alpha = 1.0;
  p.d_phi = r_decay_threshold(p) + 0.05;
  bool ok = true;
  double worst_rise = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    QuasirandomICSpec ic;
    ic.seed = seed;
    Field1D f = quasirandom_ic_1d(ic, Grid1D(128));
    StepperConfig cfg;
    cfg.dt = 5e-3;
    cfg.t_end = 20.0;
    double prev = std::numeric_limits<double>::infinity();
    RunHooks hooks;
    hooks.observe_every = 0.1;
    hooks.observe = [&](double, std::span<const double> s, double) {
      const double r = polar_order(Field1D(f.grid, std::vector<double>(s.begin(), s.end()))).magnitude;
      if (std::isfinite(prev)) worst_rise = std::max(worst_rise, r - prev);
      prev = r;
    };
    run(f, 0.0, p, cfg, hooks);
  }
  ok = worst_rise <= 1e-10;
  return {ok, "D=" + fmt(p.d_phi, 6) + " largest increase of R between samples=" + fmt(worst_rise, 3)};
}

Outcome c9() {
  ModelParams p;
  p.alpha = 0.0;
  p.d_phi = 0.1;
  bool ok = true;
  std::ostringstream os;
  for (int l : {32, 64, 128, 256, 512}) {
    Field1D f = quasirandom_ic_1d({}, Grid1D(l));
    StepperConfig cfg;
    cfg.dt = 1e-4;
    cfg.t_end = 100.0;
    double prev = std::numeric_limits<double>::infinity(), worst = -std::numeric_limits<double>::infinity();
    RunHooks hooks;
    hooks.observe_every = 0.1;
    hooks.observe = [&](double, std::span<const double> s, double) {
      const double e = free_energy(Field1D(f.grid, std::vector<double>(s.begin(), s.end())), p);
      if (std::isfinite(prev)) worst = std::max(worst, e - prev);
      prev = e;
    };
    run(f, 0.0, p, cfg, hooks);
    ok &= worst <= 1e-10;
    os << "L=" << l << " max dE=" << fmt(worst, 3) << "; ";
  }
  return {ok, os.str()};
}

Outcome c10() {
  ModelParams p;
  p.alpha = 1.0;
  p.rho = 0.05;
  QuasirandomICSpec ic;
  ic.k_modes = 5;
  const Grid3D g(20, 20, 64);
  const Field3D f0 = quasirandom_ic_3d(ic, g);
  std::vector<Field3D> finals;
  for (double dt : {0.01, 0.005, 0.0025}) {
    Field3D f = f0;
    StepperConfig cfg;
    cfg.dt = dt;
    cfg.t_end = 2.0;
    cfg.use_splitting = true;
    Stepper3D probe(g, p, cfg);
    if (!(dt < cfg.cfl_safety * probe.stable_dt(f.values))) return {false, "dt above the stable bound"};
    run(f, 0.0, p, cfg, {});
    finals.push_back(std::move(f));
  }
  const auto e01 = error_norms_reference(reconstruct(finals[0]), reconstruct(finals[1]));
  const auto e12 = error_norms_reference(reconstruct(finals[1]), reconstruct(finals[2]));
  const double r1 = e01.l1 / e12.l1, r2 = e01.l2 / e12.l2, ri = e01.linf / e12.linf;
  const bool ok = within(r1, 3.4, 4.6) && within(r2, 3.4, 4.6) && within(ri, 3.4, 4.6);
  return {ok, "ratios L1=" + fmt(r1, 4) + " L2=" + fmt(r2, 4) + " Linf=" + fmt(ri, 4)};
}

Outcome c11() {
  ModelParams p;
  p.v0 = 0.25;
  p.rho = 0.3;
  p.alpha = 1.45;
  p.d_phi = 0.0075;
  const auto sol = solve_sce(p);
  if (sol.disordered || !sol.profile) return {false, "no traveling wave at these parameters"};
  const TravelingWaveProfile prof = *sol.profile;
  const Grid3D g(24, 24, 64);
  const Field1D wave = cell_averages(Grid1D(64), [&](double w) { return prof(w); });
  Field3D f = perturb_spatial(homogeneous_field(g, wave), QuasirandomICSpec{3, 1e-3, 11});
  const double d0 = max_spatial_deviation(f), p0 = localization_order(f).magnitude;
  StepperConfig cfg;
  cfg.dt = 0.02;  // the stability bound takes over when smaller
  cfg.t_end = 200.0;
  double dmax = d0, pmax = p0, t_hit = -1.0;
  RunHooks hooks;
  hooks.observe_every = 1.0;
  hooks.observe = [&](double t, std::span<const double> s, double) {
    const Field3D cur(g, std::vector<double>(s.begin(), s.end()));
    dmax = std::max(dmax, max_spatial_deviation(cur));
    pmax = std::max(pmax, localization_order(cur).magnitude);
    if (t_hit < 0.0 && dmax >= 10.0 * d0 && pmax > 5.0 * p0) t_hit = t;
  };
  run(f, 0.0, p, cfg, hooks);
  const bool ok = t_hit >= 0.0;
  return {ok, "delta_r0=" + fmt(d0, 3) + " max delta_r=" + fmt(dmax, 3) + " P0=" + fmt(p0, 3) + " max P=" + fmt(pmax, 3) +
                  (ok ? " reached at t=" + fmt(t_hit, 4) : " thresholds not reached by t=200")};
}

const std::map<std::string, std::pair<std::string, std::function<Outcome()>>>& registry() {
  static const std::map<std::string, std::pair<std::string, std::function<Outcome()>>> r{
      {"C1", {"1D stationary convergence order", c1}},
      {"C2", {"1D traveling-wave convergence order", c2}},
      {"C3", {"SCE versus long FVM runs", c3}},
      {"C4", {"transition line bracketed by a d_phi sweep", c4}},
      {"C5", {"critical wave speed from the SCE solver", c5}},
      {"C6", {"mass conservation and positivity", c6}},
      {"C7", {"homogeneous 3D matches 1D", c7}},
      {"C8", {"R decays above the diffusion threshold", c8}},
      {"C9", {"free energy is non-increasing", c9}},
      {"C10", {"second-order splitting in dt", c10}},
      {"C11", {"spatial pattern emergence", c11}},
  };
  return r;
}

bool run_one(const std::string& id) {
  const auto& [name, fn] = registry().at(id);
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::cout << (o.pass ? "PASS " : "FAIL ") << id << " " << name << ": " << o.detail << " [" << fmt(secs, 3) << " s]"
            << std::endl;
  return o.pass;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: acceptance <C1..C11|all>\n";
    return 2;
  }
  const std::string which = argv[1];
  if (which == "all") {
    bool ok = true;
    for (int i = 1; i <= 11; ++i) ok &= run_one("C" + std::to_string(i));
    return ok ? 0 : 1;
  }
  if (!registry().count(which)) {
    std::cerr << "unknown criterion " << which << "\n";
    return 2;
  }
  return run_one(which) ? 0 : 1;
}
