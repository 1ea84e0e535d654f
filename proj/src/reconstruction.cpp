#include "chiralfv/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "chiralfv/parallel.hpp"

namespace chiralfv {

double minmod3(double a, double b, double c) noexcept {
  if (a > 0.0 && b > 0.0 && c > 0.0) return std::min({a, b, c});
  if (a < 0.0 && b < 0.0 && c < 0.0) return std::max({a, b, c});
  return 0.0;
}

namespace {

// Rounding in the minmod bound can leave an interface value a few ulps below
// zero when a neighbor average is exactly zero.
double guard_positive(double f, double s, double h) noexcept {
  while (s != 0.0 && f - 0.5 * h * std::abs(s) < 0.0) s *= 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
  return s;
}

double slope_at(double fm, double f, double fp, double h, double theta) noexcept {
  return guard_positive(f, limited_slope(fm, f, fp, h, theta), h);
}

void check_theta(double theta) {
  if (!(theta >= 1.0 && theta <= 2.0)) throw std::invalid_argument("reconstruct: theta must lie in [1, 2]");
}

}  // namespace

void reconstruct_into(const Field1D& field, double theta, Reconstruction1D& out) {
  check_theta(theta);
  require_nonnegative_finite(field.values, "reconstruct");
  if (!(out.base.grid == field.grid)) out = Reconstruction1D(field.grid);
  out.base.values = field.values;
  out.theta = theta;
  const int l = field.grid.l();
  const double h = field.grid.d_phi_cell();
  const auto& f = field.values;
  for (int k = 0; k < l; ++k) {
    out.slope[static_cast<std::size_t>(k)] =
        slope_at(f[static_cast<std::size_t>(wrap(k - 1, l))], f[static_cast<std::size_t>(k)],
                 f[static_cast<std::size_t>(wrap(k + 1, l))], h, theta);
  }
}

Reconstruction1D reconstruct(const Field1D& field, double theta) {
  Reconstruction1D r(field.grid);
  reconstruct_into(field, theta, r);
  return r;
}

void reconstruct_into(const Field3D& field, double theta, Directions dirs, Reconstruction3D& out) {
  check_theta(theta);
  require_nonnegative_finite(field.values, "reconstruct");
  const Grid3D& g = field.grid;
  if (!(out.base.grid == g)) out = Reconstruction3D(g);
  out.base.values = field.values;
  out.theta = theta;
  out.directions = dirs;
  const int n = g.n(), m = g.m(), l = g.l();
  const double* f = field.values.data();

  parallel_rows(n, [&](int i) {
    const int ip = wrap(i + 1, n), im = wrap(i - 1, n);
    for (int j = 0; j < m; ++j) {
      const int jp = wrap(j + 1, m), jm = wrap(j - 1, m);
      const std::size_t c = g.column(i, j);
      if (has(dirs, Directions::spatial)) {
        const std::size_t cxp = g.column(ip, j), cxm = g.column(im, j);
        const std::size_t cyp = g.column(i, jp), cym = g.column(i, jm);
        for (int k = 0; k < l; ++k) {
          const double fc = f[c + k];
          out.slope_x[c + k] = slope_at(f[cxm + k], fc, f[cxp + k], g.dx(), theta);
          out.slope_y[c + k] = slope_at(f[cym + k], fc, f[cyp + k], g.dy(), theta);
        }
      }
      if (has(dirs, Directions::angular)) {
        const double h = g.d_phi_cell();
        for (int k = 0; k < l; ++k) {
          out.slope_phi[c + k] = slope_at(f[c + wrap(k - 1, l)], f[c + k], f[c + wrap(k + 1, l)], h, theta);
        }
      }
    }
  });
}

Reconstruction3D reconstruct(const Field3D& field, double theta, Directions dirs) {
  Reconstruction3D r(field.grid);
  reconstruct_into(field, theta, dirs, r);
  return r;
}

namespace {

// Cell index and offset from its center for a periodic coordinate.
std::pair<int, double> locate(double coord, double period, int cells) {
  double c = std::fmod(coord, period);
  if (c < 0.0) c += period;
  const double h = period / cells;
  // Cell k covers [(k - 1/2) h, (k + 1/2) h).
  int k = static_cast<int>(std::floor(c / h + 0.5));
  k = wrap(k, cells);
  double offset = c - k * h;
  if (offset > 0.5 * period) offset -= period;
  if (offset < -0.5 * period) offset += period;
  return {k, offset};
}

}  // namespace

double evaluate_at(const Reconstruction1D& recon, double phi) {
  const auto [k, d] = locate(phi, two_pi, recon.base.grid.l());
  const auto kk = static_cast<std::size_t>(k);
  return recon.base.values[kk] + recon.slope[kk] * d;
}

double evaluate_at(const Reconstruction3D& recon, double x, double y, double phi) {
  const Grid3D& g = recon.base.grid;
  const auto [i, dx] = locate(x, 1.0, g.n());
  const auto [j, dy] = locate(y, 1.0, g.m());
  const auto [k, dp] = locate(phi, two_pi, g.l());
  const std::size_t c = g.index(i, j, k);
  return recon.base.values[c] + recon.slope_x[c] * dx + recon.slope_y[c] * dy + recon.slope_phi[c] * dp;
}

InterfaceValues1D interface_values(const Reconstruction1D& recon) {
  const double half = 0.5 * recon.base.grid.d_phi_cell();
  InterfaceValues1D iv;
  iv.top.resize(recon.slope.size());
  iv.bottom.resize(recon.slope.size());
  for (std::size_t k = 0; k < recon.slope.size(); ++k) {
    iv.top[k] = recon.base.values[k] + half * recon.slope[k];
    iv.bottom[k] = recon.base.values[k] - half * recon.slope[k];
  }
  return iv;
}

InterfaceValues3D interface_values(const Reconstruction3D& recon) {
  const Grid3D& g = recon.base.grid;
  const double hx = 0.5 * g.dx(), hy = 0.5 * g.dy(), hp = 0.5 * g.d_phi_cell();
  const std::size_t size = g.size();
  InterfaceValues3D iv;
  for (auto* v : {&iv.east, &iv.west, &iv.north, &iv.south, &iv.top, &iv.bottom}) v->resize(size);
  for (std::size_t c = 0; c < size; ++c) {
    const double f = recon.base.values[c];
    iv.east[c] = f + hx * recon.slope_x[c];
    iv.west[c] = f - hx * recon.slope_x[c];
    iv.north[c] = f + hy * recon.slope_y[c];
    iv.south[c] = f - hy * recon.slope_y[c];
    iv.top[c] = f + hp * recon.slope_phi[c];
    iv.bottom[c] = f - hp * recon.slope_phi[c];
  }
  return iv;
}

std::size_t limited_slope_count(const Field1D& field, double theta) {
  const int l = field.grid.l();
  const double h = field.grid.d_phi_cell();
  std::size_t count = 0;
  for (int k = 0; k < l; ++k) {
    const double fm = field[wrap(k - 1, l)], f = field[k], fp = field[wrap(k + 1, l)];
    const double centered = (fp - fm) / (2.0 * h);
    if (limited_slope(fm, f, fp, h, theta) != centered) ++count;
  }
  return count;
}

}  // namespace chiralfv
