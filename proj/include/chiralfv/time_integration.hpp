#pragma once

// Explicit SSP-RK2 (Heun) stepping, the spatial/angular splitting
//   Psi_dt = S_{dt/2} o A_dt o S_{dt/2},
// adaptive step control and the simulation loop.

#include <functional>
#include <span>
#include <vector>

#include "chiralfv/core.hpp"
#include "chiralfv/homogeneous_solver.hpp"
#include "chiralfv/kinetic_solver.hpp"

namespace chiralfv {

struct StepperConfig {
  double dt = 1e-3;          // requested step
  double cfl_safety = 0.9;   // fraction of the stability bound actually used
  double t_end = 1.0;
  bool use_splitting = true;  // 3D only
  double theta = 2.0;
  double min_dt = 1e-12;      // abort when the stable step collapses below this

  void validate() const;
};

/// Right-hand side evaluator: writes d f / dt into out.
using RhsFunction = std::function<void(std::span<const double> f, std::span<double> out)>;

/// Scratch buffers for ssp_rk2_step.
struct RkWorkspace {
  std::vector<double> k1, stage, k2;
  void resize(std::size_t n) {
    k1.resize(n);
    stage.resize(n);
    k2.resize(n);
  }
};

/// One Heun step in place. If `first_rhs` is non-null it holds L(state)
/// already. Throws std::runtime_error naming the stage and cell if a stage
/// produces a negative or non-finite value.
void ssp_rk2_step(std::vector<double>& state, const RhsFunction& rhs, double dt, RkWorkspace& work,
                  const std::vector<double>* first_rhs = nullptr);

/// Values in [-tolerance, 0) are treated as round-off and reset to zero;
/// anything below or non-finite throws.
inline constexpr double kNegativeRoundoff = 1e-14;
void check_stage(std::span<double> values, int stage);

/// Advances a 1D state with adaptive Heun steps.
class Stepper1D {
 public:
  Stepper1D(Grid1D grid, ModelParams params, StepperConfig config,
            PotentialOptions options = {PotentialMethod::fourier_mode, 1e-30});

  /// Step of size min(config.dt, safety * stable bound), shortened to
  /// `remaining` only when that is smaller by more than a 1e-6 fraction.
  /// Returns the step actually taken.
  double step(std::vector<double>& f, double remaining);

  /// Stable bound for the given state: min(dphi/(2c), dphi^2/(2 D)).
  double stable_dt(std::span<const double> f);

  HomogeneousOperator& op() noexcept { return op_; }
  const StepperConfig& config() const noexcept { return config_; }

 private:
  double bound_from_speed(double c) const;

  HomogeneousOperator op_;
  StepperConfig config_;
  RkWorkspace work_;
  std::vector<double> first_;
};

/// Advances a 3D state, split or unsplit per the configuration.
class Stepper3D {
 public:
  Stepper3D(Grid3D grid, ModelParams params, StepperConfig config,
            PotentialOptions options = {PotentialMethod::fourier_mode, 1e-30});

  double step(std::vector<double>& f, double remaining);
  double stable_dt(std::span<const double> f);

  /// The composition S_{dt/2} o A_dt o S_{dt/2} with a fixed dt.
  void split_step(std::vector<double>& f, double dt);
  /// One unsplit Heun step on the full right-hand side.
  void unsplit_step(std::vector<double>& f, double dt);

  KineticOperator& op() noexcept { return op_; }
  const StepperConfig& config() const noexcept { return config_; }

 private:
  double bound_from_speed(double c) const;

  KineticOperator op_;
  StepperConfig config_;
  RkWorkspace work_;
  std::vector<double> tmp_;
};

/// Free-function form of the splitting step.
Field3D split_step(const Field3D& state, double dt, const ModelParams& params, const StepperConfig& config);

struct RunHooks {
  /// Cadence (simulation time) of observer calls; 0 calls after every step.
  double observe_every = 0.0;
  std::function<void(double t, std::span<const double> state, double dt)> observe;
  double checkpoint_every = 0.0;  // 0 disables
  std::function<void(double t, std::span<const double> state)> checkpoint;
  /// Called after each step; returning true stops the run early.
  std::function<bool(double t, std::span<const double> state)> stop;
};

struct RunResult {
  double time = 0.0;
  long long steps = 0;
  double last_dt = 0.0;
  bool stopped_early = false;
};

/// Drives `stepper` from t0 to config.t_end. Observers are sampled at step
/// boundaries (the first at t0); steps are never shortened for sampling so
/// the trajectory does not depend on the observer cadence. A final step that
/// would overshoot t_end by more than a 1e-6 fraction of a step is truncated.
template <class Stepper>
RunResult run_loop(Stepper& stepper, std::vector<double>& state, double t0, const RunHooks& hooks);

RunResult run(Field1D& state, double t0, const ModelParams& params, const StepperConfig& config,
              const RunHooks& hooks = {});
RunResult run(Field3D& state, double t0, const ModelParams& params, const StepperConfig& config,
              const RunHooks& hooks = {});

}  // namespace chiralfv
