#include "chiralfv/time_integration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace chiralfv {

void StepperConfig::validate() const {
  auto fail = [](const char* name, double v, const char* rule) {
    std::ostringstream os;
    os << "invalid stepper parameter " << name << " = " << v << ": " << rule;
    throw std::invalid_argument(os.str());
  };
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt", dt, "must be positive");
  if (!(cfl_safety > 0.0 && cfl_safety <= 1.0)) fail("cfl_safety", cfl_safety, "must lie in (0, 1]");
  if (!std::isfinite(t_end)) fail("t_end", t_end, "must be finite");
  if (!(theta >= 1.0 && theta <= 2.0)) fail("theta", theta, "must lie in [1, 2]");
  if (!(min_dt >= 0.0)) fail("min_dt", min_dt, "must be nonnegative");
}

void check_stage(std::span<double> values, int stage) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    double& v = values[i];
    if (v >= 0.0) continue;
    if (v >= -kNegativeRoundoff) {
      v = 0.0;
      continue;
    }
    std::ostringstream os;
    os << "ssp_rk2_step: stage " << stage << " produced " << (std::isfinite(v) ? "negative" : "non-finite")
       << " value " << v << " at cell " << i;
    throw std::runtime_error(os.str());
  }
}

void ssp_rk2_step(std::vector<double>& state, const RhsFunction& rhs, double dt, RkWorkspace& work,
                  const std::vector<double>* first_rhs) {
  const std::size_t n = state.size();
  work.resize(n);
  const std::vector<double>* k1 = first_rhs;
  if (k1 == nullptr) {
    rhs(state, work.k1);
    k1 = &work.k1;
  }
  for (std::size_t i = 0; i < n; ++i) work.stage[i] = state[i] + dt * (*k1)[i];
  check_stage(work.stage, 1);
  rhs(work.stage, work.k2);
  for (std::size_t i = 0; i < n; ++i) state[i] = 0.5 * state[i] + 0.5 * (work.stage[i] + dt * work.k2[i]);
  check_stage(state, 2);
}

namespace {

double diffusive_bound(double dphi, double d) {
  return d > 0.0 ? dphi * dphi / (2.0 * d) : std::numeric_limits<double>::infinity();
}

double choose_dt(const StepperConfig& cfg, double bound, double remaining) {
  double dt = std::min(cfg.dt, cfg.cfl_safety * bound);
  if (remaining < dt * (1.0 - 1e-6)) return remaining;
  if (dt < cfg.min_dt) {
    std::ostringstream os;
    os << "stable time step " << dt << " fell below the floor " << cfg.min_dt;
    throw std::runtime_error(os.str());
  }
  return dt;
}

}  // namespace

// ---------------------------------------------------------------------------

Stepper1D::Stepper1D(Grid1D grid, ModelParams params, StepperConfig config, PotentialOptions options)
    : op_(grid, params, config.theta, options), config_(config), first_(grid.size()) {
  config_.validate();
}

double Stepper1D::bound_from_speed(double c) const {
  const double dphi = op_.grid().d_phi_cell();
  const double advective = c > 0.0 ? dphi / (2.0 * c) : std::numeric_limits<double>::infinity();
  return std::min(advective, diffusive_bound(dphi, op_.params().d_phi));
}

double Stepper1D::stable_dt(std::span<const double> f) { return bound_from_speed(op_.max_velocity(f)); }

double Stepper1D::step(std::vector<double>& f, double remaining) {
  const double c = op_.evaluate(f, first_);
  const double dt = choose_dt(config_, bound_from_speed(c), remaining);
  ssp_rk2_step(
      f, [this](std::span<const double> x, std::span<double> out) { op_.evaluate(x, out); }, dt, work_, &first_);
  return dt;
}

// ---------------------------------------------------------------------------

Stepper3D::Stepper3D(Grid3D grid, ModelParams params, StepperConfig config, PotentialOptions options)
    : op_(grid, params, config.theta, options), config_(config), tmp_(grid.size()) {
  config_.validate();
}

double Stepper3D::bound_from_speed(double c) const {
  const Grid3D& g = op_.grid();
  VelocityBounds b{op_.max_u(), op_.max_v(), c};
  return std::min(cfl_dt_3d(b, g, config_.use_splitting), diffusive_bound(g.d_phi_cell(), op_.params().d_phi));
}

double Stepper3D::stable_dt(std::span<const double> f) { return bound_from_speed(op_.max_angular_velocity(f)); }

void Stepper3D::split_step(std::vector<double>& f, double dt) {
  auto spatial = [this](std::span<const double> x, std::span<double> out) { op_.evaluate_spatial(x, out); };
  auto angular = [this](std::span<const double> x, std::span<double> out) { op_.evaluate_angular(x, out); };
  const bool moving = op_.params().v0 != 0.0;
  if (moving) ssp_rk2_step(f, spatial, 0.5 * dt, work_);
  ssp_rk2_step(f, angular, dt, work_);
  if (moving) ssp_rk2_step(f, spatial, 0.5 * dt, work_);
}

void Stepper3D::unsplit_step(std::vector<double>& f, double dt) {
  ssp_rk2_step(
      f, [this](std::span<const double> x, std::span<double> out) { op_.evaluate(x, out); }, dt, work_);
}

double Stepper3D::step(std::vector<double>& f, double remaining) {
  if (config_.use_splitting) {
    const double dt = choose_dt(config_, stable_dt(f), remaining);
    split_step(f, dt);
    return dt;
  }
  const double c = op_.evaluate(f, tmp_);
  const double dt = choose_dt(config_, bound_from_speed(c), remaining);
  ssp_rk2_step(
      f, [this](std::span<const double> x, std::span<double> out) { op_.evaluate(x, out); }, dt, work_, &tmp_);
  return dt;
}

Field3D split_step(const Field3D& state, double dt, const ModelParams& params, const StepperConfig& config) {
  Stepper3D stepper(state.grid, params, config);
  Field3D out = state;
  stepper.split_step(out.values, dt);
  return out;
}

// ---------------------------------------------------------------------------

template <class Stepper>
RunResult run_loop(Stepper& stepper, std::vector<double>& state, double t0, const RunHooks& hooks) {
  const StepperConfig& cfg = stepper.config();
  RunResult result;
  double t = t0;
  long long obs_count = 0, ckpt_count = 0;
  double last_observed = -std::numeric_limits<double>::infinity();

  auto observe = [&](double dt) {
    if (!hooks.observe) return;
    hooks.observe(t, state, dt);
    last_observed = t;
  };
  auto due = [&](double every, long long count) { return t >= t0 + static_cast<double>(count) * every - 1e-9 * every; };

  observe(0.0);
  ++obs_count;
  ++ckpt_count;
  while (cfg.t_end - t > 1e-6 * cfg.dt) {
    const double dt = stepper.step(state, cfg.t_end - t);
    t += dt;
    ++result.steps;
    result.last_dt = dt;

    if (hooks.observe) {
      if (hooks.observe_every <= 0.0) {
        observe(dt);
      } else if (due(hooks.observe_every, obs_count)) {
        observe(dt);
        while (due(hooks.observe_every, obs_count)) ++obs_count;
      }
    }
    if (hooks.checkpoint && hooks.checkpoint_every > 0.0 && due(hooks.checkpoint_every, ckpt_count)) {
      hooks.checkpoint(t, state);
      while (due(hooks.checkpoint_every, ckpt_count)) ++ckpt_count;
    }
    if (hooks.stop && hooks.stop(t, state)) {
      result.stopped_early = true;
      break;
    }
  }
  if (hooks.observe && last_observed != t) observe(result.last_dt);
  result.time = t;
  return result;
}

template RunResult run_loop<Stepper1D>(Stepper1D&, std::vector<double>&, double, const RunHooks&);
template RunResult run_loop<Stepper3D>(Stepper3D&, std::vector<double>&, double, const RunHooks&);

RunResult run(Field1D& state, double t0, const ModelParams& params, const StepperConfig& config,
              const RunHooks& hooks) {
  Stepper1D stepper(state.grid, params, config);
  return run_loop(stepper, state.values, t0, hooks);
}

RunResult run(Field3D& state, double t0, const ModelParams& params, const StepperConfig& config,
              const RunHooks& hooks) {
  Stepper3D stepper(state.grid, params, config);
  return run_loop(stepper, state.values, t0, hooks);
}

}  // namespace chiralfv
