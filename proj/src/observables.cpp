#include "chiralfv/observables.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "chiralfv/homogeneous_solver.hpp"
#include "chiralfv/reconstruction.hpp"

namespace chiralfv {

namespace {

OrderParameter from_complex(std::complex<double> z) { return {std::abs(z), std::arg(z)}; }

// int_cell e^{i phi} for the angular cells, times the cell width.
std::vector<std::complex<double>> angular_weights(int l) {
  const double dphi = two_pi / l;
  const double s0 = sinc(0.5 * dphi);
  std::vector<std::complex<double>> w(static_cast<std::size_t>(l));
  for (int k = 0; k < l; ++k) w[static_cast<std::size_t>(k)] = dphi * s0 * std::polar(1.0, k * dphi);
  return w;
}

std::complex<double> column_moment(const double* f, const std::vector<std::complex<double>>& w) {
  std::complex<double> z = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) z += f[k] * w[k];
  return z;
}

}  // namespace

OrderParameter polar_order(const Field1D& field) {
  return from_complex(column_moment(field.values.data(), angular_weights(field.grid.l())));
}

OrderParameter polar_order(const Field3D& field) {
  const Grid3D& g = field.grid;
  const auto w = angular_weights(g.l());
  std::complex<double> z = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.m(); ++j) z += column_moment(field.values.data() + g.column(i, j), w);
  return from_complex(z * (g.dx() * g.dy()));
}

std::vector<OrderParameter> nonlocal_polar_field(const Field3D& field, const NeighborStencil& stencil) {
  const Grid3D& g = field.grid;
  if (stencil.n != g.n() || stencil.m != g.m())
    throw std::invalid_argument("nonlocal_polar_field: stencil does not match grid");
  const auto w = angular_weights(g.l());
  std::vector<std::complex<double>> col(g.spatial_size());
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.m(); ++j)
      col[static_cast<std::size_t>(i * g.m() + j)] = column_moment(field.values.data() + g.column(i, j), w);
  std::vector<OrderParameter> out(g.spatial_size());
  const double count = static_cast<double>(stencil.offsets.size());
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.m(); ++j) {
      std::complex<double> z = 0.0;
      for (const auto& [di, dj] : stencil.offsets) z += col[static_cast<std::size_t>(wrap(i + di, g.n()) * g.m() + wrap(j + dj, g.m()))];
      out[static_cast<std::size_t>(i * g.m() + j)] = from_complex(z / count);
    }
  return out;
}

OrderParameter localization_order(const Field3D& field) {
  const Grid3D& g = field.grid;
  const double weight = sinc(std::numbers::pi * g.dx()) * sinc(std::numbers::pi * g.dy()) * g.cell_volume();
  std::complex<double> z = 0.0;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.m(); ++j) {
      double mass = 0.0;
      const double* f = field.values.data() + g.column(i, j);
      for (int k = 0; k < g.l(); ++k) mass += f[k];
      z += mass * std::polar(1.0, two_pi * (g.x_center(i) + g.y_center(j)));
    }
  return from_complex(z * weight);
}

SpatialField spatial_density(const Field3D& field) {
  const Grid3D& g = field.grid;
  SpatialField s{g.n(), g.m(), std::vector<double>(g.spatial_size())};
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.m(); ++j) {
      double mass = 0.0;
      const double* f = field.values.data() + g.column(i, j);
      for (int k = 0; k < g.l(); ++k) mass += f[k];
      s.values[static_cast<std::size_t>(i * g.m() + j)] = mass * g.d_phi_cell();
    }
  return s;
}

MomentumField momentum_field(const Field3D& field) {
  const Grid3D& g = field.grid;
  const auto w = angular_weights(g.l());
  MomentumField u{g.n(), g.m(), std::vector<double>(g.spatial_size()), std::vector<double>(g.spatial_size())};
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.m(); ++j) {
      const auto z = column_moment(field.values.data() + g.column(i, j), w);
      u.ux[static_cast<std::size_t>(i * g.m() + j)] = z.real();
      u.uy[static_cast<std::size_t>(i * g.m() + j)] = z.imag();
    }
  return u;
}

LineProfile line_profile(const Field3D& field, int samples) {
  if (samples < 2) throw std::invalid_argument("line_profile: need at least two samples");
  const Grid3D& g = field.grid;
  const SpatialField rho = spatial_density(field);
  const auto [lo, hi] = std::minmax_element(rho.values.begin(), rho.values.end());
  if (*lo == *hi) throw std::invalid_argument("line_profile: spatial density is constant, maximum is ambiguous");
  // max_element returns the first maximum, i.e. the lowest (i, j).
  const auto idx = static_cast<int>(std::max_element(rho.values.begin(), rho.values.end()) - rho.values.begin());

  LineProfile p;
  p.i_max = idx / g.m();
  p.j_max = idx % g.m();
  p.x_max = g.x_center(p.i_max);
  p.y_max = g.y_center(p.j_max);
  const MomentumField u = momentum_field(field);
  const double ux = u.ux[static_cast<std::size_t>(idx)], uy = u.uy[static_cast<std::size_t>(idx)];
  if (ux == 0.0 && uy == 0.0) throw std::invalid_argument("line_profile: momentum vanishes at the density maximum");
  p.phi_max = std::atan2(uy, ux);

  // The projection is reconstructed as a single-angle 3D field.
  const Field3D plane(Grid3D(g.n(), g.m(), 1), rho.values);
  const Reconstruction3D recon = reconstruct(plane, 2.0, Directions::spatial);
  const double ex = std::cos(p.phi_max), ey = std::sin(p.phi_max);
  for (int n = 0; n < samples; ++n) {
    const double s = -0.5 + static_cast<double>(n) / (samples - 1);
    p.s.push_back(s);
    p.values.push_back(evaluate_at(recon, p.x_max + ex * s, p.y_max + ey * s, 0.0));
  }
  return p;
}

double max_spatial_deviation(const Field3D& field) {
  const Grid3D& g = field.grid;
  const int l = g.l();
  std::vector<double> mean(static_cast<std::size_t>(l), 0.0);
  for (std::size_t c = 0; c < g.spatial_size(); ++c)
    for (int k = 0; k < l; ++k) mean[static_cast<std::size_t>(k)] += field.values[c * static_cast<std::size_t>(l) + static_cast<std::size_t>(k)];
  for (double& v : mean) v /= static_cast<double>(g.spatial_size());
  double dev = 0.0;
  for (std::size_t c = 0; c < g.spatial_size(); ++c)
    for (int k = 0; k < l; ++k)
      dev = std::max(dev, std::abs(field.values[c * static_cast<std::size_t>(l) + static_cast<std::size_t>(k)] -
                                   mean[static_cast<std::size_t>(k)]));
  return dev;
}

double free_energy(const Field1D& field, const ModelParams& params) {
  if (params.alpha != 0.0) throw std::invalid_argument("free_energy: only defined for alpha = 0");
  const int l = field.grid.l();
  const double dphi = field.grid.d_phi_cell();
  // interaction between two cells: cos(phi_k - phi_j) sinc^2(dphi/2)
  const double w = CellTrigWeights(dphi).average;
  std::complex<double> z = 0.0;
  double entropy = 0.0;
  for (int k = 0; k < l; ++k) {
    const double f = field[k];
    z += dphi * std::polar(1.0, k * dphi) * f;
    if (f > 0.0) entropy += f * std::log(f) * dphi;
  }
  return -0.5 * params.sigma * w * w * std::norm(z) + params.d_phi * entropy;
}

}  // namespace chiralfv
