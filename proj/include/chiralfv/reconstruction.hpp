#pragma once

// Piecewise-linear reconstruction of cell averages with a positivity
// preserving generalized minmod limiter.
//
// Slopes start as centered differences. Only when a centered slope would make
// one of the two interface values of its cell negative is it replaced by
//   minmod(theta * forward, centered, theta * backward),
// which for theta in [1, 2] keeps both interface values >= 0.

#include <cstddef>
#include <vector>

#include "chiralfv/core.hpp"

namespace chiralfv {

double minmod3(double a, double b, double c) noexcept;

/// Slope of the middle cell of three consecutive averages with spacing h.
inline double limited_slope(double f_minus, double f, double f_plus, double h, double theta) noexcept {
  const double centered = (f_plus - f_minus) / (2.0 * h);
  if (f - 0.5 * h * std::abs(centered) >= 0.0) return centered;
  return minmod3(theta * (f_plus - f) / h, centered, theta * (f - f_minus) / h);
}

struct Reconstruction1D {
  Field1D base;
  std::vector<double> slope;  // (d/dphi f)_k
  double theta = 2.0;

  explicit Reconstruction1D(Grid1D g) : base(g), slope(g.size(), 0.0) {}
};

enum class Directions : unsigned { spatial = 1u, angular = 2u, all = 3u };

constexpr bool has(Directions set, Directions d) noexcept {
  return (static_cast<unsigned>(set) & static_cast<unsigned>(d)) != 0u;
}

struct Reconstruction3D {
  Field3D base;
  std::vector<double> slope_x;
  std::vector<double> slope_y;
  std::vector<double> slope_phi;
  double theta = 2.0;
  Directions directions = Directions::all;  // which slope arrays are current

  explicit Reconstruction3D(Grid3D g)
      : base(g), slope_x(g.size(), 0.0), slope_y(g.size(), 0.0), slope_phi(g.size(), 0.0) {}
};

/// Rejects negative or non-finite cell averages with std::invalid_argument.
Reconstruction1D reconstruct(const Field1D& field, double theta = 2.0);
Reconstruction3D reconstruct(const Field3D& field, double theta = 2.0, Directions dirs = Directions::all);

/// In-place variants reusing the buffers of `out` (grids must match).
void reconstruct_into(const Field1D& field, double theta, Reconstruction1D& out);
void reconstruct_into(const Field3D& field, double theta, Directions dirs, Reconstruction3D& out);

/// Value of the reconstruction at a point; coordinates are wrapped onto the
/// periodic domain.
double evaluate_at(const Reconstruction1D& recon, double phi);
double evaluate_at(const Reconstruction3D& recon, double x, double y, double phi);

struct InterfaceValues1D {
  std::vector<double> top;     // f_k + dphi/2 * slope
  std::vector<double> bottom;  // f_k - dphi/2 * slope
};

struct InterfaceValues3D {
  std::vector<double> east, west, north, south, top, bottom;
};

InterfaceValues1D interface_values(const Reconstruction1D& recon);
InterfaceValues3D interface_values(const Reconstruction3D& recon);

/// Number of cells (per direction summed) whose slope was limited.
std::size_t limited_slope_count(const Field1D& field, double theta);

}  // namespace chiralfv
