#include "chiralfv/core.hpp"

#include <algorithm>
#include <sstream>

namespace chiralfv {

namespace {

[[noreturn]] void bad_param(const std::string& name, double value, const char* rule) {
  std::ostringstream os;
  os << "invalid model parameter " << name << " = " << value << ": " << rule;
  throw std::invalid_argument(os.str());
}

}  // namespace

void ModelParams::validate() const {
  if (!std::isfinite(v0) || v0 < 0.0) bad_param("v0", v0, "must be finite and >= 0");
  if (!std::isfinite(sigma) || sigma <= 0.0) bad_param("sigma", sigma, "must be finite and > 0");
  if (!std::isfinite(alpha) || std::abs(alpha) > std::numbers::pi)
    bad_param("alpha", alpha, "must lie in [-pi, pi]");
  if (!std::isfinite(d_phi) || d_phi < 0.0) bad_param("d_phi", d_phi, "must be finite and >= 0");
  if (!std::isfinite(rho) || rho <= 0.0 || rho > 0.5)
    bad_param("rho", rho, "must lie in (0, 0.5] (minimal-image bound on the unit square)");
}

Grid1D::Grid1D(int l) : l_(l), dphi_(0.0) {
  if (l <= 0) throw std::invalid_argument("Grid1D: cell count must be positive");
  dphi_ = two_pi / l;
}

Grid3D::Grid3D(int n, int m, int l) : n_(n), m_(m), l_(l), dx_(0.0), dy_(0.0), dphi_(0.0) {
  if (n <= 0 || m <= 0 || l <= 0) throw std::invalid_argument("Grid3D: cell counts must be positive");
  dx_ = 1.0 / n;
  dy_ = 1.0 / m;
  dphi_ = two_pi / l;
}

Field1D::Field1D(Grid1D g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw std::invalid_argument("Field1D: value count does not match grid");
}

Field3D::Field3D(Grid3D g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) throw std::invalid_argument("Field3D: value count does not match grid");
}

double total_mass(const Field1D& field) {
  double sum = 0.0;
  for (double f : field.values) sum += f;
  return sum * field.grid.d_phi_cell();
}

double total_mass(const Field3D& field) {
  double sum = 0.0;
  for (double f : field.values) sum += f;
  return sum * field.grid.cell_volume();
}

double periodic_center_distance_sq(int i, int j, int l, int m, const Grid3D& grid) {
  auto minimal = [](int a, int b, int extent) {
    const int d = wrap(a - b, extent);
    return std::min(d, extent - d);
  };
  const double ddx = minimal(i, l, grid.n()) * grid.dx();
  const double ddy = minimal(j, m, grid.m()) * grid.dy();
  return ddx * ddx + ddy * ddy;
}

void require_nonnegative_finite(std::span<const double> values, const char* what) {
  for (std::size_t c = 0; c < values.size(); ++c) {
    const double f = values[c];
    if (!std::isfinite(f) || f < 0.0) {
      std::ostringstream os;
      os << what << ": cell " << c << " holds " << f << " (expected a finite value >= 0)";
      throw std::invalid_argument(os.str());
    }
  }
}

}  // namespace chiralfv
