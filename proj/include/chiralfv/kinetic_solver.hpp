#pragma once

// Semidiscrete right-hand sides of the full (x, y, phi) equation on the
// periodic unit square. Spatial transport uses the constant interface
// velocities v0 (cos phi_k, sin phi_k); angular transport uses
// w = -d xi / d phi with the nonlocal potential
//
//   xi_{ijk} = -sigma * sum_C int f cos(phi' - phi_k - alpha) / sum_C f + D ln f_{ijk}
//
// where C is the digital disc of radius rho around (i, j).

#include <span>
#include <utility>
#include <vector>

#include "chiralfv/core.hpp"
#include "chiralfv/homogeneous_solver.hpp"
#include "chiralfv/reconstruction.hpp"

namespace chiralfv {

struct NeighborStencil {
  std::vector<std::pair<int, int>> offsets;  // (di, dj), minimal-image signed
  int n = 0;
  int m = 0;
  double rho = 0.0;
};

/// All spatial offsets whose minimal-image center distance is <= rho.
NeighborStencil build_stencil(const Grid3D& grid, double rho);

struct Potential3D {
  std::vector<double> values;
};

Potential3D potential_3d(const Reconstruction3D& recon, const NeighborStencil& stencil, const ModelParams& params,
                         PotentialOptions options = {});

/// Per angular cell k: u_k = v0 cos phi_k, v_k = v0 sin phi_k.
struct SpatialVelocities {
  std::vector<double> u;
  std::vector<double> v;
};

SpatialVelocities spatial_interface_velocities(const Grid3D& grid, const ModelParams& params);

/// Spatial flux-difference part of the right-hand side (needs x and y slopes).
Field3D rhs_spatial(const Reconstruction3D& recon, const ModelParams& params);

/// Angular flux-difference part (needs phi slopes).
Field3D rhs_angular(const Reconstruction3D& recon, const NeighborStencil& stencil, const ModelParams& params,
                    PotentialOptions options = {});

/// Angular interface velocities w_{i,j,k+1/2}.
std::vector<double> angular_interface_velocities(const Potential3D& potential, const Grid3D& grid);

struct VelocityBounds {
  double a = 0.0;  // max |u|
  double b = 0.0;  // max |v|
  double c = 0.0;  // max |w|
};

VelocityBounds velocity_bounds(const SpatialVelocities& spatial, std::span<const double> angular);

/// Unsplit: min(dx/6a, dy/6b, dphi/6c). Split: min(dx/4a, dy/4b, dphi/2c).
/// Zero speeds drop their term; +infinity when all vanish.
double cfl_dt_3d(const VelocityBounds& bounds, const Grid3D& grid, bool split);

/// Rows of halo a slab needs: stencil reach plus one reconstruction cell.
int halo_depth(const Grid3D& grid, double rho);

/// Allocation-free evaluator used by the time stepper. Kernels run over
/// static row slabs; every value is produced with the same arithmetic
/// regardless of the worker count.
class KineticOperator {
 public:
  KineticOperator(Grid3D grid, ModelParams params, double theta = 2.0,
                  PotentialOptions options = {PotentialMethod::fourier_mode, 1e-30});

  /// d f / dt from spatial transport only.
  void evaluate_spatial(std::span<const double> f, std::span<double> out);
  /// d f / dt from angular transport only; returns max |w|.
  double evaluate_angular(std::span<const double> f, std::span<double> out);
  /// Full right-hand side; returns max |w|.
  double evaluate(std::span<const double> f, std::span<double> out);

  /// max |w| for the given state.
  double max_angular_velocity(std::span<const double> f);

  double max_u() const noexcept { return max_u_; }
  double max_v() const noexcept { return max_v_; }

  const Grid3D& grid() const noexcept { return grid_; }
  const ModelParams& params() const noexcept { return params_; }
  const NeighborStencil& stencil() const noexcept { return stencil_; }
  double theta() const noexcept { return theta_; }

 private:
  void slopes(std::span<const double> f, Directions dirs);
  void potential(std::span<const double> f);

  Grid3D grid_;
  ModelParams params_;
  double theta_;
  PotentialOptions options_;
  NeighborStencil stencil_;
  SpatialVelocities vel_;
  double max_u_ = 0.0, max_v_ = 0.0;
  std::vector<double> sx_, sy_, sp_;
  std::vector<double> xi_;
  std::vector<double> col_a_, col_b_, col_m_;
  std::vector<double> row_c_;
  std::vector<double> cos_phi_, sin_phi_, cos_shift_, sin_shift_;
  std::vector<double> cos_diff_, sin_diff_;
};

}  // namespace chiralfv
