#pragma once

// Initial conditions, error norms and the continuation driver.

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "chiralfv/core.hpp"
#include "chiralfv/reconstruction.hpp"
#include "chiralfv/time_integration.hpp"

namespace chiralfv {

struct QuasirandomICSpec {
  int k_modes = 10;
  /// Coefficient bound; unset picks 0.01/(2 pi) in 1D and 0.01 c0 in 3D.
  std::optional<double> epsilon;
  std::uint64_t seed = 1;
  int max_redraws = 1000;
};

inline constexpr double default_epsilon_1d() { return 0.01 / two_pi; }
inline constexpr double default_epsilon_3d() { return 0.01 / two_pi; }

/// a0 + sum_k a_k cos k phi + b_k sin k phi, a0 = 1/(2 pi), exact cell averages.
Field1D quasirandom_ic_1d(const QuasirandomICSpec& spec, const Grid1D& grid);

/// c0 + sum_{n,m,l=1..K} c sin(2 pi n x - a) sin(2 pi m y - b) sin(l phi - g).
Field3D quasirandom_ic_3d(const QuasirandomICSpec& spec, const Grid3D& grid);

/// Adds a zero-mean 3D quasirandom perturbation scaled to max-norm epsilon,
/// floors at zero and restores the original mass.
Field3D perturb_spatial(const Field3D& field, const QuasirandomICSpec& spec);

/// Angular counterpart used by 1D continuation legs.
Field1D perturb_angular(const Field1D& field, const QuasirandomICSpec& spec);

/// Cell averages of a function by 8-point Gauss-Legendre per cell.
Field1D cell_averages(const Grid1D& grid, const std::function<double(double)>& f);
/// Spatially homogeneous 3D field with the given angular profile.
Field3D homogeneous_field(const Grid3D& grid, const Field1D& profile);

struct ErrorNorms {
  double l1 = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

using AngularProfile = std::function<double(double)>;
using PhaseSpaceProfile = std::function<double(double x, double y, double phi)>;

/// Circular mean of a profile: arg int e^{i phi} f.
double circular_mean(const AngularProfile& f);

/// Norms of the reconstruction minus the exact solution. With `align` the
/// exact solution is rotated in phi so that its circular mean matches the
/// numerical one. `nodes` Gauss-Legendre points per cell and dimension.
ErrorNorms error_norms_exact(const Reconstruction1D& numeric, const AngularProfile& exact, bool align, int nodes = 4);
/// Spatially homogeneous exact solution given by its angular profile.
ErrorNorms error_norms_exact(const Reconstruction3D& numeric, const AngularProfile& exact, bool align, int nodes = 4);
ErrorNorms error_norms_exact(const Reconstruction3D& numeric, const PhaseSpaceProfile& exact, bool align,
                             int nodes = 4);

/// Norms between two reconstructions on the lcm grid of the two meshes.
ErrorNorms error_norms_reference(const Reconstruction1D& a, const Reconstruction1D& b, int nodes = 4);
ErrorNorms error_norms_reference(const Reconstruction3D& a, const Reconstruction3D& b, int nodes = 4,
                                 std::uint64_t max_cells = std::uint64_t{1} << 28);

/// Least-squares slope of log(err) against log(h); the convergence order.
double fitted_order(const std::vector<double>& h, const std::vector<double>& err);

/// Least-squares slope of y against t.
double linear_fit_slope(const std::vector<double>& t, const std::vector<double>& y);

/// Stationary or traveling-wave profile for the given parameters: von Mises
/// at alpha = 0, the self-consistent traveling wave otherwise, uniform on
/// the disordered side.
AngularProfile exact_profile(const ModelParams& params);

struct RefinementRow {
  int n = 1;
  int m = 1;
  int l = 0;
  double h = 0.0;  // angular cell width
  ErrorNorms err;
};

struct RefinementStudy {
  std::vector<RefinementRow> rows;
  double order_l1 = 0.0;
  double order_l2 = 0.0;
  double order_linf = 0.0;
};

/// Runs the same quasirandom 1D IC on each L to t_end with fixed dt and
/// measures aligned norms against `exact`.
RefinementStudy refinement_study_1d(const ModelParams& params, const std::vector<int>& sizes, const StepperConfig& config,
                                    const QuasirandomICSpec& ic, const AngularProfile& exact);

/// 3D self-convergence: every grid against the last (finest) one.
RefinementStudy refinement_study_3d(const ModelParams& params, const std::vector<std::array<int, 3>>& grids,
                                    const StepperConfig& config, const QuasirandomICSpec& ic);

// --- continuation ---------------------------------------------------------

enum class SweepDirection { forward, backward };
const char* to_string(SweepDirection d);

struct SweepPoint {
  ModelParams params;
  SweepDirection direction = SweepDirection::forward;
};

struct ContinuationConfig {
  double equilibrate_time = 100.0;
  double dt = 5e-3;
  double cfl_safety = 0.9;
  double theta = 2.0;
  double sample_every = 0.1;
  double fit_window = 50.0;
  double slope_tol_forward = 5e-5;
  double slope_tol_backward = 1e-6;
  long long max_steps = 1000000;
  QuasirandomICSpec perturbation{3, 1e-4, 7};
  /// Called with each finished point and its final state (3D: Field3D, 1D: Field1D values).
  std::function<void(std::size_t index, std::span<const double> state, double time)> on_point;
};

struct SweepRecord {
  ModelParams params;
  SweepDirection direction = SweepDirection::forward;
  double r_final = 0.0;
  double theta_final = 0.0;
  double p_final = 0.0;
  double psi_final = 0.0;
  double mass_final = 0.0;
  double last_dt = 0.0;
  double v_est = 0.0;
  double monitor_final = 0.0;  // delta_r in 3D, R in 1D
  double slope = 0.0;          // fitted d monitor / dt over the window
  std::vector<double> monitor_times;
  std::vector<double> monitor_series;
  bool converged = false;
  long long wall_steps = 0;
  double time = 0.0;
};

/// 3D sweep monitored by delta_r. Each point warm-starts from the previous
/// final state; backward points first apply perturb_spatial (with the seed
/// advanced per point).
std::vector<SweepRecord> continuation_sweep(Field3D initial, const std::vector<SweepPoint>& path,
                                            const ContinuationConfig& config);

/// 1D sweep monitored by R; backward points apply perturb_angular.
std::vector<SweepRecord> continuation_sweep(Field1D initial, const std::vector<SweepPoint>& path,
                                            const ContinuationConfig& config);

}  // namespace chiralfv
