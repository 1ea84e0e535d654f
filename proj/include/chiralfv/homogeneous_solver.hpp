#pragma once

// Semidiscrete finite-volume right-hand side of the spatially homogeneous
// (angle-only) equation
//
//   d/dt f_k = -(F_{k+1/2} - F_{k-1/2}) / dphi,
//   F_{k+1/2} = w+ f^T_k + w- f^B_{k+1},
//   w_{k+1/2} = -(xi_{k+1} - xi_k) / dphi,
//
// with the velocity potential xi built from cell-exact cosine integrals of the
// piecewise-linear reconstruction plus D_phi ln f.

#include <limits>
#include <span>
#include <vector>

#include "chiralfv/core.hpp"
#include "chiralfv/reconstruction.hpp"

namespace chiralfv {

/// How the alignment sum inside the potential is evaluated.
///   direct        the printed double sum over cells, O(L^2)
///   fourier_mode  the cosine kernel carries a single Fourier mode, so the
///                 circular convolution collapses onto the first angular
///                 moments of the density and slopes, O(L)
enum class PotentialMethod { direct, fourier_mode };

struct PotentialOptions {
  PotentialMethod method = PotentialMethod::direct;
  /// ln f is evaluated as ln(max(f, log_floor)).
  double log_floor = 1e-30;
};

struct Potential1D {
  std::vector<double> values;  // xi_k
};

/// Trig weights of the cell-exact integrals: sin(h)/h and cos(h) - sin(h)/h
/// with h = dphi / 2.
struct CellTrigWeights {
  double average;
  double slope;
  explicit CellTrigWeights(double dphi);
};

Potential1D potential_1d(const Reconstruction1D& recon, const ModelParams& params, PotentialOptions options = {});

/// The alignment part of xi alone (without D_phi ln f).
std::vector<double> interaction_potential_1d(const Reconstruction1D& recon, const ModelParams& params,
                                             PotentialMethod method = PotentialMethod::direct);

/// w_{k+1/2} for k = 0..L-1, periodic.
std::vector<double> interface_velocities_1d(const Potential1D& potential, const Grid1D& grid);

Field1D rhs_1d(const Reconstruction1D& recon, const ModelParams& params, PotentialOptions options = {});

/// dphi / (2c) with c = max_k max(w+, -w-); +infinity when c == 0.
double cfl_dt_1d(std::span<const double> velocities, const Grid1D& grid);

/// Allocation-free evaluator used by the time stepper.
class HomogeneousOperator {
 public:
  HomogeneousOperator(Grid1D grid, ModelParams params, double theta = 2.0, PotentialOptions options = {});

  /// Writes d f / dt into `out` and returns c = max |w_{k+1/2}|.
  double evaluate(std::span<const double> f, std::span<double> out);

  /// c for the given state without forming the right-hand side.
  double max_velocity(std::span<const double> f);

  const Grid1D& grid() const noexcept { return grid_; }
  const ModelParams& params() const noexcept { return params_; }
  double theta() const noexcept { return theta_; }
  const PotentialOptions& options() const noexcept { return options_; }

 private:
  void potential(std::span<const double> f);

  Grid1D grid_;
  ModelParams params_;
  double theta_;
  PotentialOptions options_;
  Reconstruction1D recon_;
  std::vector<double> xi_, w_, flux_;
  std::vector<double> cos_phi_, sin_phi_, cos_shift_, sin_shift_;
  std::vector<double> cos_diff_, sin_diff_;  // direct path: cos/sin(d dphi - alpha)
};

}  // namespace chiralfv
