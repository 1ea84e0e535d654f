#pragma once

// Diagnostics of 1D and 3D states. Angular and spatial Fourier moments use
// the exact cell integrals of e^{i phi} and e^{i 2 pi (x + y)} over each
// cell, i.e. cell averages weighted by sinc factors.

#include <vector>

#include "chiralfv/core.hpp"
#include "chiralfv/kinetic_solver.hpp"

namespace chiralfv {

struct OrderParameter {
  double magnitude = 0.0;
  double phase = 0.0;  // in [-pi, pi]
};

/// R e^{i Theta} = int e^{i phi} f.
OrderParameter polar_order(const Field1D& field);
OrderParameter polar_order(const Field3D& field);

/// Per spatial cell: first angular moment summed over the stencil divided by
/// the stencil area. Layout i * m + j.
std::vector<OrderParameter> nonlocal_polar_field(const Field3D& field, const NeighborStencil& stencil);

/// P e^{i Psi} = int f e^{i 2 pi (x + y)}.
OrderParameter localization_order(const Field3D& field);

/// Cell averages on the n x m spatial grid, layout i * m + j.
struct SpatialField {
  int n = 0;
  int m = 0;
  std::vector<double> values;
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * static_cast<std::size_t>(m) + static_cast<std::size_t>(j)]; }
};

struct MomentumField {
  int n = 0;
  int m = 0;
  std::vector<double> ux;
  std::vector<double> uy;
};

/// int f dphi.
SpatialField spatial_density(const Field3D& field);
/// int e(phi) f dphi.
MomentumField momentum_field(const Field3D& field);

struct LineProfile {
  std::vector<double> s;       // arclength in [-1/2, 1/2]
  std::vector<double> values;  // spatial density along the line
  int i_max = 0;
  int j_max = 0;
  double x_max = 0.0;
  double y_max = 0.0;
  double phi_max = 0.0;
};

/// Spatial density along r(s) = r_max + e(phi_max) s, where r_max is the
/// cell of maximal density (lowest (i, j) on ties) and phi_max the direction
/// of the momentum there. Values come from the limited piecewise-linear
/// reconstruction of the spatial density.
LineProfile line_profile(const Field3D& field, int samples);

/// max |f_{ijk} - mean_{ij} f_{ijk}|.
double max_spatial_deviation(const Field3D& field);

/// -(sigma/2) sum_kj W_kj f_k f_j dphi^2 + D sum f ln f dphi on the cell
/// averages, W_kj the exact cell average of cos(phi - phi'). Only defined for
/// alpha = 0.
double free_energy(const Field1D& field, const ModelParams& params);

}  // namespace chiralfv
