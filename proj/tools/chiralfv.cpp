// Command-line driver: run, sweep, norms, sce, ic.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chiralfv/analytic.hpp"
#include "chiralfv/experiments.hpp"
#include "chiralfv/io.hpp"
#include "chiralfv/parallel.hpp"
#include "chiralfv/time_integration.hpp"

using namespace chiralfv;
namespace fs = std::filesystem;

namespace {

struct ParamOpts {
  ModelParams p;
  void add(CLI::App* app) {
    app->add_option("--v0", p.v0, "self-propulsion speed");
    app->add_option("--sigma", p.sigma, "coupling strength");
    app->add_option("--alpha", p.alpha, "phase lag");
    app->add_option("--d-phi", p.d_phi, "rotational diffusion");
    app->add_option("--rho", p.rho, "interaction radius");
  }
};

std::vector<double> range(double from, double to, double step) {
  if (!(step > 0.0)) throw std::invalid_argument("range step must be positive");
  std::vector<double> out;
  const auto count = static_cast<long long>(std::floor((to - from) / step + 1e-9));
  for (long long i = 0; i <= count; ++i) out.push_back(from + static_cast<double>(i) * step);
  return out;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  return out;
}

// Writes to a file, or stdout for "-".
template <class Fn>
void emit(const std::string& path, Fn&& fn) {
  if (path == "-") {
    fn(std::cout);
    return;
  }
  auto out = open_out(path);
  fn(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path);
}

Field1D named_state_1d(const std::string& name, const Grid1D& grid, const ModelParams& params) {
  if (name == "uniform") return Field1D(grid, uniform_density());
  Field1D f = cell_averages(grid, exact_profile(params));
  return f;
}

template <class Field>
void run_field(Field state, double t0, const RunConfig& cfg) {
  fs::create_directories(cfg.output_dir);
  const fs::path base = fs::path(cfg.output_dir) / cfg.run_name;
  const fs::path csv = base.string() + ".csv";
  std::ofstream out(csv, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + csv.string() + " for writing");
  write_csv_preamble(out, describe(cfg), observable_columns());
  const typename Field::grid_type grid = state.grid;

  int cp_count = 0;
  RunHooks hooks;
  hooks.observe_every = cfg.observe_every;
  hooks.observe = [&](double t, std::span<const double> v, double dt) {
    const Field f(grid, std::vector<double>(v.begin(), v.end()));
    write_observable_row(out, sample_observables(f, t, dt));
  };
  if (cfg.checkpoint_every > 0.0) {
    hooks.checkpoint_every = cfg.checkpoint_every;
    hooks.checkpoint = [&](double t, std::span<const double> v) {
      char name[32];
      std::snprintf(name, sizeof name, "_cp%05d.chk", cp_count++);
      write_field(base.string() + name, Field(grid, std::vector<double>(v.begin(), v.end())), cfg.params, t);
    };
  }
  const RunResult res = run(state, t0, cfg.params, cfg.stepper, hooks);
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + csv.string());
  write_field(base.string() + "_final.chk", state, cfg.params, res.time);
  std::cerr << "done: t=" << format_double(res.time) << " steps=" << res.steps << "\n";
}

void cmd_run(const std::string& config_path, int workers) {
  RunConfig cfg = load_config(config_path);
  if (workers > 0) cfg.workers = workers;
  if (cfg.workers > 0) set_worker_count(cfg.workers);
  if (cfg.mode == Mode::one_d) {
    const Grid1D grid(cfg.l);
    double t0 = 0.0;
    Field1D f(grid);
    switch (cfg.ic_kind) {
      case IcKind::quasirandom: f = quasirandom_ic_1d(cfg.ic, grid); break;
      case IcKind::checkpoint: f = read_field_1d(cfg.ic_checkpoint, grid, &t0); break;
      case IcKind::named: f = named_state_1d(cfg.ic_named, grid, cfg.params); break;
    }
    run_field(std::move(f), t0, cfg);
  } else {
    const Grid3D grid(cfg.n, cfg.m, cfg.l);
    double t0 = 0.0;
    Field3D f(grid);
    switch (cfg.ic_kind) {
      case IcKind::quasirandom: f = quasirandom_ic_3d(cfg.ic, grid); break;
      case IcKind::checkpoint: f = read_field_3d(cfg.ic_checkpoint, grid, &t0); break;
      case IcKind::named: f = homogeneous_field(grid, named_state_1d(cfg.ic_named, Grid1D(cfg.l), cfg.params)); break;
    }
    run_field(std::move(f), t0, cfg);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-volume solver for chiral active-particle kinetics"};
  app.require_subcommand(1);
  int workers = 0;
  app.add_option("--workers", workers, "worker threads (0 = default)")->check(CLI::NonNegativeNumber);

  // run
  auto* run_cmd = app.add_subcommand("run", "run a configuration file");
  std::string config_path;
  run_cmd->add_option("config", config_path, "INI configuration")->required();

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "continuation sweep in d_phi or alpha");
  ParamOpts sweep_p;
  sweep_p.add(sweep_cmd);
  std::string sweep_mode = "3d", sweep_var = "d_phi", sweep_out = "-", sweep_cp_dir;
  double s_from = 0.0, s_to = 0.0, s_step = 0.0;
  bool s_return = false;
  int sn = 24, sm = 24, sl = 64;
  ContinuationConfig ccfg;
  QuasirandomICSpec sweep_ic;
  sweep_cmd->add_option("--mode", sweep_mode)->check(CLI::IsMember({"1d", "3d"}));
  sweep_cmd->add_option("--vary", sweep_var, "parameter swept")->check(CLI::IsMember({"d_phi", "alpha"}));
  sweep_cmd->add_option("--from", s_from)->required();
  sweep_cmd->add_option("--to", s_to)->required();
  sweep_cmd->add_option("--step", s_step)->required();
  sweep_cmd->add_flag("--return", s_return, "append the backward leg");
  sweep_cmd->add_option("-n", sn);
  sweep_cmd->add_option("-m", sm);
  sweep_cmd->add_option("-l", sl);
  sweep_cmd->add_option("--equilibrate", ccfg.equilibrate_time);
  sweep_cmd->add_option("--dt", ccfg.dt);
  sweep_cmd->add_option("--fit-window", ccfg.fit_window);
  sweep_cmd->add_option("--tol-forward", ccfg.slope_tol_forward);
  sweep_cmd->add_option("--tol-backward", ccfg.slope_tol_backward);
  sweep_cmd->add_option("--max-steps", ccfg.max_steps);
  sweep_cmd->add_option("--seed", sweep_ic.seed);
  sweep_cmd->add_option("--out", sweep_out, "CSV path or - for stdout");
  sweep_cmd->add_option("--checkpoint-dir", sweep_cp_dir, "drop a checkpoint per point");

  // norms
  auto* norms_cmd = app.add_subcommand("norms", "grid refinement study");
  ParamOpts norms_p;
  norms_p.add(norms_cmd);
  std::string norms_mode = "1d", norms_out = "-";
  std::vector<int> sizes{32, 64, 128, 256, 512, 1024};
  std::vector<int> l_sizes;
  StepperConfig nstep;
  nstep.dt = 1e-4;
  nstep.t_end = 100.0;
  QuasirandomICSpec norms_ic;
  norms_cmd->add_option("--mode", norms_mode)->check(CLI::IsMember({"1d", "3d"}));
  norms_cmd->add_option("--sizes", sizes, "L in 1d, n = m in 3d")->delimiter(',');
  norms_cmd->add_option("--l-sizes", l_sizes, "angular sizes in 3d (default: same as --sizes)")->delimiter(',');
  norms_cmd->add_option("--dt", nstep.dt);
  norms_cmd->add_option("--t-end", nstep.t_end);
  norms_cmd->add_option("--seed", norms_ic.seed);
  norms_cmd->add_option("--out", norms_out);

  // sce
  auto* sce_cmd = app.add_subcommand("sce", "tabulate self-consistent traveling waves");
  ParamOpts sce_p;
  sce_p.add(sce_cmd);
  double a_from = 0.0, a_to = 1.5, a_step = 0.01;
  std::vector<double> d_list{0.1};
  std::string sce_out = "-";
  sce_cmd->add_option("--alpha-from", a_from);
  sce_cmd->add_option("--alpha-to", a_to);
  sce_cmd->add_option("--alpha-step", a_step);
  sce_cmd->add_option("--d-list", d_list, "comma-separated d_phi values")->delimiter(',');
  sce_cmd->add_option("--out", sce_out);

  // ic
  auto* ic_cmd = app.add_subcommand("ic", "write a quasirandom initial condition");
  ParamOpts ic_p;
  ic_p.add(ic_cmd);
  std::string ic_mode = "1d", ic_out;
  int in = 40, im = 40, il = 256;
  QuasirandomICSpec ic_spec;
  double ic_eps = -1.0;
  ic_cmd->add_option("--mode", ic_mode)->check(CLI::IsMember({"1d", "3d"}));
  ic_cmd->add_option("-n", in);
  ic_cmd->add_option("-m", im);
  ic_cmd->add_option("-l", il);
  ic_cmd->add_option("--k-modes", ic_spec.k_modes);
  ic_cmd->add_option("--epsilon", ic_eps);
  ic_cmd->add_option("--seed", ic_spec.seed);
  ic_cmd->add_option("--out", ic_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << app.help();
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  try {
    if (workers > 0) set_worker_count(workers);

    if (run_cmd->parsed()) {
      cmd_run(config_path, workers);
    } else if (sweep_cmd->parsed()) {
      sweep_p.p.validate();
      std::vector<double> values = range(s_from, s_to, s_step);
      std::vector<SweepPoint> path;
      auto at = [&](double v) {
        ModelParams p = sweep_p.p;
        (sweep_var == "d_phi" ? p.d_phi : p.alpha) = v;
        p.validate();
        return p;
      };
      for (double v : values) path.push_back({at(v), SweepDirection::forward});
      if (s_return)
        for (auto it = values.rbegin() + 1; it != values.rend(); ++it) path.push_back({at(*it), SweepDirection::backward});
      if (!sweep_cp_dir.empty()) {
        fs::create_directories(sweep_cp_dir);
        const bool three = sweep_mode == "3d";
        ccfg.on_point = [&, three](std::size_t idx, std::span<const double> v, double t) {
          char name[32];
          std::snprintf(name, sizeof name, "point%04zu.chk", idx);
          const fs::path file = fs::path(sweep_cp_dir) / name;
          std::vector<double> vals(v.begin(), v.end());
          if (three) write_field(file, Field3D(Grid3D(sn, sm, sl), std::move(vals)), path[idx].params, t);
          else write_field(file, Field1D(Grid1D(sl), std::move(vals)), path[idx].params, t);
        };
      }
      Metadata meta = describe(sweep_p.p);
      meta.emplace_back("mode", sweep_mode);
      meta.emplace_back("vary", sweep_var);
      meta.emplace_back("n", std::to_string(sn));
      meta.emplace_back("m", std::to_string(sm));
      meta.emplace_back("l", std::to_string(sl));
      std::vector<SweepRecord> recs;
      if (sweep_mode == "3d") {
        Field3D init = quasirandom_ic_3d(sweep_ic, Grid3D(sn, sm, sl));
        recs = continuation_sweep(std::move(init), path, ccfg);
      } else {
        Field1D init = quasirandom_ic_1d(sweep_ic, Grid1D(sl));
        recs = continuation_sweep(std::move(init), path, ccfg);
      }
      emit(sweep_out, [&](std::ostream& os) { write_sweep(os, recs, meta); });
    } else if (norms_cmd->parsed()) {
      norms_p.p.validate();
      RefinementStudy study;
      if (norms_mode == "1d") {
        study = refinement_study_1d(norms_p.p, sizes, nstep, norms_ic, exact_profile(norms_p.p));
      } else {
        if (l_sizes.empty()) l_sizes = sizes;
        if (l_sizes.size() != sizes.size()) throw std::invalid_argument("--l-sizes must match --sizes in length");
        std::vector<std::array<int, 3>> grids;
        for (std::size_t i = 0; i < sizes.size(); ++i) grids.push_back({sizes[i], sizes[i], l_sizes[i]});
        study = refinement_study_3d(norms_p.p, grids, nstep, norms_ic);
      }
      emit(norms_out, [&](std::ostream& os) {
        Metadata meta = describe(norms_p.p);
        meta.emplace_back("mode", norms_mode);
        meta.emplace_back("dt", format_double(nstep.dt));
        meta.emplace_back("t_end", format_double(nstep.t_end));
        meta.emplace_back("order_L1", format_double(study.order_l1));
        meta.emplace_back("order_L2", format_double(study.order_l2));
        meta.emplace_back("order_Linf", format_double(study.order_linf));
        write_csv_preamble(os, meta, {"n", "m", "l", "h", "L1", "L2", "Linf"});
        for (const auto& r : study.rows)
          os << r.n << ',' << r.m << ',' << r.l << ',' << format_double(r.h) << ',' << format_double(r.err.l1) << ','
             << format_double(r.err.l2) << ',' << format_double(r.err.linf) << '\n';
      });
    } else if (sce_cmd->parsed()) {
      emit(sce_out, [&](std::ostream& os) {
        write_csv_preamble(os, describe(sce_p.p), {"alpha", "d_phi", "R", "v", "disordered", "residual", "iterations"});
        for (double d : d_list) {
          std::optional<double> r0, v0;
          for (double a : range(a_from, a_to, a_step)) {
            ModelParams p = sce_p.p;
            p.alpha = a;
            p.d_phi = d;
            p.validate();
            const TravelingWaveSolution s = solve_sce(p, r0, v0);
            if (!s.disordered) {
              r0 = s.r_mag;
              v0 = s.v_wave;
            }
            os << format_double(a) << ',' << format_double(d) << ',' << format_double(s.r_mag) << ','
               << format_double(s.v_wave) << ',' << (s.disordered ? 1 : 0) << ',' << format_double(s.residual) << ','
               << s.iterations << '\n';
          }
        }
      });
    } else if (ic_cmd->parsed()) {
      ic_p.p.validate();
      if (ic_eps >= 0.0) ic_spec.epsilon = ic_eps;
      if (ic_mode == "1d") write_field(ic_out, quasirandom_ic_1d(ic_spec, Grid1D(il)), ic_p.p, 0.0);
      else write_field(ic_out, quasirandom_ic_3d(ic_spec, Grid3D(in, im, il)), ic_p.p, 0.0);
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (char& c : msg)
      if (c == '\n') c = ' ';
    std::cerr << "error: " << msg << "\n";
    return 1;
  }
  return 0;
}
