#pragma once

// Parameters, periodic grids and cell-average field containers shared by the
// 1D (angle only) and 3D (x, y, angle) solvers.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chiralfv {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Physical parameters of the kinetic model.
///   v0     self-propulsion speed
///   sigma  coupling strength
///   alpha  phase lag
///   d_phi  rotational diffusion
///   rho    interaction radius on the unit periodic square
struct ModelParams {
  double v0 = 1.0;
  double sigma = 1.0;
  double alpha = 0.0;
  double d_phi = 0.1;
  double rho = 0.05;

  /// Throws std::invalid_argument naming the first offending field.
  void validate() const;
};

/// Uniform periodic angular grid with cell centers phi_k = k * dphi.
class Grid1D {
 public:
  explicit Grid1D(int l);

  int l() const noexcept { return l_; }
  double d_phi_cell() const noexcept { return dphi_; }
  double center(int k) const noexcept { return k * dphi_; }
  std::size_t size() const noexcept { return static_cast<std::size_t>(l_); }

  friend bool operator==(const Grid1D&, const Grid1D&) = default;

 private:
  int l_;
  double dphi_;
};

/// Uniform grid on the periodic unit square times the circle.
class Grid3D {
 public:
  Grid3D(int n, int m, int l);

  int n() const noexcept { return n_; }
  int m() const noexcept { return m_; }
  int l() const noexcept { return l_; }
  double dx() const noexcept { return dx_; }
  double dy() const noexcept { return dy_; }
  double d_phi_cell() const noexcept { return dphi_; }

  double x_center(int i) const noexcept { return i * dx_; }
  double y_center(int j) const noexcept { return j * dy_; }
  double phi_center(int k) const noexcept { return k * dphi_; }

  double cell_volume() const noexcept { return dx_ * dy_ * dphi_; }
  std::size_t spatial_size() const noexcept {
    return static_cast<std::size_t>(n_) * static_cast<std::size_t>(m_);
  }
  std::size_t size() const noexcept { return spatial_size() * static_cast<std::size_t>(l_); }

  /// Flat index with the angular index fastest.
  std::size_t index(int i, int j, int k) const noexcept {
    return (static_cast<std::size_t>(i) * static_cast<std::size_t>(m_) + static_cast<std::size_t>(j)) *
               static_cast<std::size_t>(l_) +
           static_cast<std::size_t>(k);
  }
  /// Offset of the first angular cell of spatial column (i, j).
  std::size_t column(int i, int j) const noexcept { return index(i, j, 0); }

  Grid1D angular() const { return Grid1D(l_); }

  friend bool operator==(const Grid3D&, const Grid3D&) = default;

 private:
  int n_, m_, l_;
  double dx_, dy_, dphi_;
};

struct Field1D {
  using grid_type = Grid1D;
  Grid1D grid;
  std::vector<double> values;

  explicit Field1D(Grid1D g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  Field1D(Grid1D g, std::vector<double> v);

  double& operator[](int k) { return values[static_cast<std::size_t>(k)]; }
  double operator[](int k) const { return values[static_cast<std::size_t>(k)]; }
};

struct Field3D {
  using grid_type = Grid3D;
  Grid3D grid;
  std::vector<double> values;

  explicit Field3D(Grid3D g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  Field3D(Grid3D g, std::vector<double> v);

  double& at(int i, int j, int k) { return values[grid.index(i, j, k)]; }
  double at(int i, int j, int k) const { return values[grid.index(i, j, k)]; }

  std::span<double> column(int i, int j) {
    return {values.data() + grid.column(i, j), static_cast<std::size_t>(grid.l())};
  }
  std::span<const double> column(int i, int j) const {
    return {values.data() + grid.column(i, j), static_cast<std::size_t>(grid.l())};
  }
};

/// Periodic index reduction into [0, extent).
constexpr int wrap(int index, int extent) noexcept {
  const int r = index % extent;
  return r < 0 ? r + extent : r;
}

double total_mass(const Field1D& field);
double total_mass(const Field3D& field);

/// Squared minimal-image distance between the centers of spatial cells
/// (i, j) and (l, m) on the periodic unit square.
double periodic_center_distance_sq(int i, int j, int l, int m, const Grid3D& grid);

/// sin(x)/x with the removable singularity filled in.
inline double sinc(double x) noexcept {
  return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
}

/// Throws std::invalid_argument if any value is negative or non-finite.
void require_nonnegative_finite(std::span<const double> values, const char* what);

}  // namespace chiralfv
