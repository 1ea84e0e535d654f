#include "chiralfv/kinetic_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "chiralfv/parallel.hpp"

namespace chiralfv {

namespace {

int signed_offset(int r, int extent) { return 2 * r > extent ? r - extent : r; }

// Fixed-order aggregation of per-column moments over the stencil.
struct Moments {
  double a = 0.0, b = 0.0, m = 0.0;
};

Moments aggregate(const std::vector<double>& ca, const std::vector<double>& cb, const std::vector<double>& cm,
                  const NeighborStencil& s, const Grid3D& g, int i, int j) {
  Moments out;
  for (const auto& [di, dj] : s.offsets) {
    const auto c = static_cast<std::size_t>(wrap(i + di, g.n())) * static_cast<std::size_t>(g.m()) +
                   static_cast<std::size_t>(wrap(j + dj, g.m()));
    out.a += ca[c];
    out.b += cb[c];
    out.m += cm[c];
  }
  return out;
}

void column_moments(const double* f, const double* slope, int l, const CellTrigWeights& wt, const double* cs,
                    const double* sn, double& a, double& b, double& m) {
  a = 0.0;
  b = 0.0;
  m = 0.0;
  for (int n = 0; n < l; ++n) {
    const double fa = wt.average * f[n];
    const double sb = wt.slope * slope[n];
    a += fa * cs[n] + sb * sn[n];
    b += fa * sn[n] - sb * cs[n];
    m += f[n];
  }
}

// Interaction potential of one column from stencil-aggregated angular data,
// evaluated with the printed double sum.
void direct_column(const double* agg_f, const double* agg_s, double mass, int l, const CellTrigWeights& wt,
                   const double* cos_diff, const double* sin_diff, double sigma, double* xi) {
  const double scale = -sigma / mass;
  for (int k = 0; k < l; ++k) {
    double sum = 0.0;
    for (int n = 0; n < l; ++n) {
      const int d = wrap(n - k, l);
      sum += agg_f[n] * wt.average * cos_diff[d] + agg_s[n] * sin_diff[d] * wt.slope;
    }
    xi[k] = scale * sum;
  }
}

void upwind_column(const double* f, const double* slope, const double* xi, int l, double dphi, double* out,
                   double& cmax) {
  const double half = 0.5 * dphi;
  // Flux through the bottom interface of cell 0 is the top flux of cell l-1.
  auto flux = [&](int k) {
    const int kp = k + 1 == l ? 0 : k + 1;
    const double w = -(xi[kp] - xi[k]) / dphi;
    cmax = std::max(cmax, std::abs(w));
    return std::max(w, 0.0) * (f[k] + half * slope[k]) + std::min(w, 0.0) * (f[kp] - half * slope[kp]);
  };
  const double first = flux(l - 1);
  double prev = first;
  for (int k = 0; k < l; ++k) {
    const double cur = k == l - 1 ? first : flux(k);
    out[k] = -(cur - prev) / dphi;
    prev = cur;
  }
}

}  // namespace

NeighborStencil build_stencil(const Grid3D& grid, double rho) {
  if (!(rho > 0.0) || rho > 0.5 || !std::isfinite(rho))
    throw std::invalid_argument("build_stencil: rho = " + std::to_string(rho) +
                                " must lie in (0, 0.5] for a unique minimal image");
  NeighborStencil s;
  s.n = grid.n();
  s.m = grid.m();
  s.rho = rho;
  // Relative slack so that centers lying exactly on the circle are kept.
  const double r2 = rho * rho * (1.0 + 1e-12);
  for (int r = 0; r < grid.n(); ++r) {
    for (int q = 0; q < grid.m(); ++q) {
      if (periodic_center_distance_sq(0, 0, r, q, grid) <= r2)
        s.offsets.emplace_back(signed_offset(r, grid.n()), signed_offset(q, grid.m()));
    }
  }
  std::sort(s.offsets.begin(), s.offsets.end());
  return s;
}

int halo_depth(const Grid3D& grid, double rho) {
  return static_cast<int>(std::ceil(rho / std::min(grid.dx(), grid.dy()) - 1e-12)) + 1;
}

SpatialVelocities spatial_interface_velocities(const Grid3D& grid, const ModelParams& params) {
  SpatialVelocities sv;
  sv.u.resize(static_cast<std::size_t>(grid.l()));
  sv.v.resize(static_cast<std::size_t>(grid.l()));
  for (int k = 0; k < grid.l(); ++k) {
    sv.u[static_cast<std::size_t>(k)] = params.v0 * std::cos(grid.phi_center(k));
    sv.v[static_cast<std::size_t>(k)] = params.v0 * std::sin(grid.phi_center(k));
  }
  return sv;
}

Potential3D potential_3d(const Reconstruction3D& recon, const NeighborStencil& stencil, const ModelParams& params,
                         PotentialOptions options) {
  const Grid3D& g = recon.base.grid;
  if (stencil.n != g.n() || stencil.m != g.m()) throw std::invalid_argument("potential_3d: stencil does not match grid");
  require_nonnegative_finite(recon.base.values, "potential_3d");
  const int n = g.n(), m = g.m(), l = g.l();
  const CellTrigWeights wt(g.d_phi_cell());
  const auto& f = recon.base.values;
  const auto& sp = recon.slope_phi;

  std::vector<double> cs(static_cast<std::size_t>(l)), sn(static_cast<std::size_t>(l));
  for (int k = 0; k < l; ++k) {
    cs[static_cast<std::size_t>(k)] = std::cos(g.phi_center(k));
    sn[static_cast<std::size_t>(k)] = std::sin(g.phi_center(k));
  }

  Potential3D p{std::vector<double>(g.size())};
  if (options.method == PotentialMethod::fourier_mode) {
    std::vector<double> ca(g.spatial_size()), cb(g.spatial_size()), cm(g.spatial_size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        const std::size_t c = static_cast<std::size_t>(i) * static_cast<std::size_t>(m) + static_cast<std::size_t>(j);
        column_moments(f.data() + g.column(i, j), sp.data() + g.column(i, j), l, wt, cs.data(), sn.data(), ca[c],
                       cb[c], cm[c]);
      }
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        const Moments mo = aggregate(ca, cb, cm, stencil, g, i, j);
        if (!(mo.m > 0.0)) throw std::invalid_argument("potential_3d: zero neighborhood mass");
        const double scale = -params.sigma / mo.m;
        for (int k = 0; k < l; ++k) {
          const double beta = g.phi_center(k) + params.alpha;
          p.values[g.index(i, j, k)] = scale * (mo.a * std::cos(beta) + mo.b * std::sin(beta));
        }
      }
  } else {
    std::vector<double> cos_diff(static_cast<std::size_t>(l)), sin_diff(static_cast<std::size_t>(l));
    for (int d = 0; d < l; ++d) {
      cos_diff[static_cast<std::size_t>(d)] = std::cos(d * g.d_phi_cell() - params.alpha);
      sin_diff[static_cast<std::size_t>(d)] = std::sin(d * g.d_phi_cell() - params.alpha);
    }
    std::vector<double> agg_f(static_cast<std::size_t>(l)), agg_s(static_cast<std::size_t>(l));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < m; ++j) {
        std::fill(agg_f.begin(), agg_f.end(), 0.0);
        std::fill(agg_s.begin(), agg_s.end(), 0.0);
        double mass = 0.0;
        for (const auto& [di, dj] : stencil.offsets) {
          const std::size_t c = g.column(wrap(i + di, n), wrap(j + dj, m));
          for (int k = 0; k < l; ++k) {
            agg_f[static_cast<std::size_t>(k)] += f[c + static_cast<std::size_t>(k)];
            agg_s[static_cast<std::size_t>(k)] += sp[c + static_cast<std::size_t>(k)];
            mass += f[c + static_cast<std::size_t>(k)];
          }
        }
        if (!(mass > 0.0)) throw std::invalid_argument("potential_3d: zero neighborhood mass");
        direct_column(agg_f.data(), agg_s.data(), mass, l, wt, cos_diff.data(), sin_diff.data(), params.sigma,
                      p.values.data() + g.column(i, j));
      }
  }
  if (params.d_phi != 0.0) {
    for (std::size_t c = 0; c < g.size(); ++c)
      p.values[c] += params.d_phi * std::log(std::max(f[c], options.log_floor));
  }
  return p;
}

std::vector<double> angular_interface_velocities(const Potential3D& potential, const Grid3D& grid) {
  std::vector<double> w(grid.size());
  const int l = grid.l();
  for (std::size_t c = 0; c < grid.spatial_size(); ++c) {
    const double* xi = potential.values.data() + c * static_cast<std::size_t>(l);
    for (int k = 0; k < l; ++k)
      w[c * static_cast<std::size_t>(l) + static_cast<std::size_t>(k)] = -(xi[wrap(k + 1, l)] - xi[k]) / grid.d_phi_cell();
  }
  return w;
}

Field3D rhs_spatial(const Reconstruction3D& recon, const ModelParams& params) {
  const Grid3D& g = recon.base.grid;
  const int n = g.n(), m = g.m(), l = g.l();
  const auto vel = spatial_interface_velocities(g, params);
  const auto iv = interface_values(recon);
  Field3D out(g);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < l; ++k) {
        const double u = vel.u[static_cast<std::size_t>(k)], v = vel.v[static_cast<std::size_t>(k)];
        const std::size_t c = g.index(i, j, k);
        const std::size_t ce = g.index(wrap(i + 1, n), j, k), cw = g.index(wrap(i - 1, n), j, k);
        const std::size_t cn = g.index(i, wrap(j + 1, m), k), cs = g.index(i, wrap(j - 1, m), k);
        const double fe = std::max(u, 0.0) * iv.east[c] + std::min(u, 0.0) * iv.west[ce];
        const double fw = std::max(u, 0.0) * iv.east[cw] + std::min(u, 0.0) * iv.west[c];
        const double fn = std::max(v, 0.0) * iv.north[c] + std::min(v, 0.0) * iv.south[cn];
        const double fs = std::max(v, 0.0) * iv.north[cs] + std::min(v, 0.0) * iv.south[c];
        out.values[c] = -(fe - fw) / g.dx() - (fn - fs) / g.dy();
      }
  return out;
}

Field3D rhs_angular(const Reconstruction3D& recon, const NeighborStencil& stencil, const ModelParams& params,
                    PotentialOptions options) {
  const Grid3D& g = recon.base.grid;
  const auto xi = potential_3d(recon, stencil, params, options);
  Field3D out(g);
  double cmax = 0.0;
  for (std::size_t c = 0; c < g.spatial_size(); ++c) {
    const std::size_t o = c * static_cast<std::size_t>(g.l());
    upwind_column(recon.base.values.data() + o, recon.slope_phi.data() + o, xi.values.data() + o, g.l(),
                  g.d_phi_cell(), out.values.data() + o, cmax);
  }
  return out;
}

VelocityBounds velocity_bounds(const SpatialVelocities& spatial, std::span<const double> angular) {
  VelocityBounds b;
  for (double u : spatial.u) b.a = std::max({b.a, std::max(u, 0.0), -std::min(u, 0.0)});
  for (double v : spatial.v) b.b = std::max({b.b, std::max(v, 0.0), -std::min(v, 0.0)});
  for (double w : angular) b.c = std::max({b.c, std::max(w, 0.0), -std::min(w, 0.0)});
  return b;
}

double cfl_dt_3d(const VelocityBounds& bounds, const Grid3D& grid, bool split) {
  const double inf = std::numeric_limits<double>::infinity();
  const double kx = split ? 4.0 : 6.0, kp = split ? 2.0 : 6.0;
  double dt = inf;
  if (bounds.a > 0.0) dt = std::min(dt, grid.dx() / (kx * bounds.a));
  if (bounds.b > 0.0) dt = std::min(dt, grid.dy() / (kx * bounds.b));
  if (bounds.c > 0.0) dt = std::min(dt, grid.d_phi_cell() / (kp * bounds.c));
  return dt;
}

// ---------------------------------------------------------------------------

KineticOperator::KineticOperator(Grid3D grid, ModelParams params, double theta, PotentialOptions options)
    : grid_(grid),
      params_(params),
      theta_(theta),
      options_(options),
      stencil_(build_stencil(grid, params.rho)),
      vel_(spatial_interface_velocities(grid, params)),
      sx_(grid.size()),
      sy_(grid.size()),
      sp_(grid.size()),
      xi_(grid.size()),
      col_a_(grid.spatial_size()),
      col_b_(grid.spatial_size()),
      col_m_(grid.spatial_size()),
      row_c_(static_cast<std::size_t>(grid.n())) {
  params_.validate();
  if (!(theta >= 1.0 && theta <= 2.0)) throw std::invalid_argument("KineticOperator: theta must lie in [1, 2]");
  const auto b = velocity_bounds(vel_, {});
  max_u_ = b.a;
  max_v_ = b.b;
  const int l = grid.l();
  const double dphi = grid.d_phi_cell();
  for (auto* v : {&cos_phi_, &sin_phi_, &cos_shift_, &sin_shift_}) v->resize(static_cast<std::size_t>(l));
  for (int k = 0; k < l; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    cos_phi_[kk] = std::cos(k * dphi);
    sin_phi_[kk] = std::sin(k * dphi);
    cos_shift_[kk] = std::cos(k * dphi + params_.alpha);
    sin_shift_[kk] = std::sin(k * dphi + params_.alpha);
  }
  if (options_.method == PotentialMethod::direct) {
    cos_diff_.resize(static_cast<std::size_t>(l));
    sin_diff_.resize(static_cast<std::size_t>(l));
    for (int d = 0; d < l; ++d) {
      cos_diff_[static_cast<std::size_t>(d)] = std::cos(d * dphi - params_.alpha);
      sin_diff_[static_cast<std::size_t>(d)] = std::sin(d * dphi - params_.alpha);
    }
  }
}

void KineticOperator::slopes(std::span<const double> f, Directions dirs) {
  if (f.size() != grid_.size()) throw std::invalid_argument("KineticOperator: state size does not match grid");
  require_nonnegative_finite(f, "KineticOperator");
  const int n = grid_.n(), m = grid_.m(), l = grid_.l();
  const double hx = grid_.dx(), hy = grid_.dy(), hp = grid_.d_phi_cell();
  const double shrink = 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
  auto guarded = [&](double fm, double fc, double fp, double h) {
    double s = limited_slope(fm, fc, fp, h, theta_);
    while (s != 0.0 && fc - 0.5 * h * std::abs(s) < 0.0) s *= shrink;
    return s;
  };
  parallel_rows(n, [&](int i) {
    const int ip = wrap(i + 1, n), im = wrap(i - 1, n);
    for (int j = 0; j < m; ++j) {
      const std::size_t c = grid_.column(i, j);
      if (has(dirs, Directions::spatial)) {
        const std::size_t cxp = grid_.column(ip, j), cxm = grid_.column(im, j);
        const std::size_t cyp = grid_.column(i, wrap(j + 1, m)), cym = grid_.column(i, wrap(j - 1, m));
        for (int k = 0; k < l; ++k) {
          const double fc = f[c + k];
          sx_[c + k] = guarded(f[cxm + k], fc, f[cxp + k], hx);
          sy_[c + k] = guarded(f[cym + k], fc, f[cyp + k], hy);
        }
      }
      if (has(dirs, Directions::angular)) {
        for (int k = 0; k < l; ++k)
          sp_[c + k] = guarded(f[c + (k == 0 ? l - 1 : k - 1)], f[c + k], f[c + (k + 1 == l ? 0 : k + 1)], hp);
      }
    }
  });
}

void KineticOperator::potential(std::span<const double> f) {
  const int n = grid_.n(), m = grid_.m(), l = grid_.l();
  const CellTrigWeights wt(grid_.d_phi_cell());
  const double* fp = f.data();

  if (options_.method == PotentialMethod::fourier_mode) {
    parallel_rows(n, [&](int i) {
      for (int j = 0; j < m; ++j) {
        const std::size_t s = static_cast<std::size_t>(i) * static_cast<std::size_t>(m) + static_cast<std::size_t>(j);
        column_moments(fp + grid_.column(i, j), sp_.data() + grid_.column(i, j), l, wt, cos_phi_.data(),
                       sin_phi_.data(), col_a_[s], col_b_[s], col_m_[s]);
      }
    });
    parallel_rows(n, [&](int i) {
      for (int j = 0; j < m; ++j) {
        const Moments mo = aggregate(col_a_, col_b_, col_m_, stencil_, grid_, i, j);
        if (!(mo.m > 0.0)) throw std::invalid_argument("potential_3d: zero neighborhood mass");
        const double scale = -params_.sigma / mo.m;
        double* xi = xi_.data() + grid_.column(i, j);
        for (int k = 0; k < l; ++k) xi[k] = scale * (mo.a * cos_shift_[k] + mo.b * sin_shift_[k]);
      }
    });
  } else {
    parallel_rows(n, [&](int i) {
      std::vector<double> agg_f(static_cast<std::size_t>(l)), agg_s(static_cast<std::size_t>(l));
      for (int j = 0; j < m; ++j) {
        std::fill(agg_f.begin(), agg_f.end(), 0.0);
        std::fill(agg_s.begin(), agg_s.end(), 0.0);
        double mass = 0.0;
        for (const auto& [di, dj] : stencil_.offsets) {
          const std::size_t c = grid_.column(wrap(i + di, n), wrap(j + dj, m));
          for (int k = 0; k < l; ++k) {
            agg_f[static_cast<std::size_t>(k)] += fp[c + k];
            agg_s[static_cast<std::size_t>(k)] += sp_[c + k];
            mass += fp[c + k];
          }
        }
        if (!(mass > 0.0)) throw std::invalid_argument("potential_3d: zero neighborhood mass");
        direct_column(agg_f.data(), agg_s.data(), mass, l, wt, cos_diff_.data(), sin_diff_.data(), params_.sigma,
                      xi_.data() + grid_.column(i, j));
      }
    });
  }
  if (params_.d_phi != 0.0) {
    const double d = params_.d_phi, floor = options_.log_floor;
    parallel_rows(n, [&](int i) {
      const std::size_t begin = grid_.column(i, 0), end = begin + static_cast<std::size_t>(m) * static_cast<std::size_t>(l);
      for (std::size_t c = begin; c < end; ++c) xi_[c] += d * std::log(std::max(fp[c], floor));
    });
  }
}

void KineticOperator::evaluate_spatial(std::span<const double> f, std::span<double> out) {
  if (out.size() != grid_.size()) throw std::invalid_argument("KineticOperator: output size does not match grid");
  slopes(f, Directions::spatial);
  const int n = grid_.n(), m = grid_.m(), l = grid_.l();
  const double hx = 0.5 * grid_.dx(), hy = 0.5 * grid_.dy();
  const double idx = 1.0 / grid_.dx(), idy = 1.0 / grid_.dy();
  parallel_rows(n, [&](int i) {
    const int ip = wrap(i + 1, n), im = wrap(i - 1, n);
    for (int j = 0; j < m; ++j) {
      const std::size_t c = grid_.column(i, j);
      const std::size_t ce = grid_.column(ip, j), cw = grid_.column(im, j);
      const std::size_t cn = grid_.column(i, wrap(j + 1, m)), cs = grid_.column(i, wrap(j - 1, m));
      for (int k = 0; k < l; ++k) {
        const double u = vel_.u[static_cast<std::size_t>(k)], v = vel_.v[static_cast<std::size_t>(k)];
        const double up = std::max(u, 0.0), um = std::min(u, 0.0);
        const double vp = std::max(v, 0.0), vm = std::min(v, 0.0);
        const double east_c = f[c + k] + hx * sx_[c + k], west_c = f[c + k] - hx * sx_[c + k];
        const double north_c = f[c + k] + hy * sy_[c + k], south_c = f[c + k] - hy * sy_[c + k];
        const double fe = up * east_c + um * (f[ce + k] - hx * sx_[ce + k]);
        const double fw = up * (f[cw + k] + hx * sx_[cw + k]) + um * west_c;
        const double fn = vp * north_c + vm * (f[cn + k] - hy * sy_[cn + k]);
        const double fs = vp * (f[cs + k] + hy * sy_[cs + k]) + vm * south_c;
        out[c + k] = -(fe - fw) * idx - (fn - fs) * idy;
      }
    }
  });
}

double KineticOperator::evaluate_angular(std::span<const double> f, std::span<double> out) {
  if (out.size() != grid_.size()) throw std::invalid_argument("KineticOperator: output size does not match grid");
  slopes(f, Directions::angular);
  potential(f);
  const int n = grid_.n(), m = grid_.m(), l = grid_.l();
  const double dphi = grid_.d_phi_cell();
  parallel_rows(n, [&](int i) {
    double cmax = 0.0;
    for (int j = 0; j < m; ++j) {
      const std::size_t c = grid_.column(i, j);
      upwind_column(f.data() + c, sp_.data() + c, xi_.data() + c, l, dphi, out.data() + c, cmax);
    }
    row_c_[static_cast<std::size_t>(i)] = cmax;
  });
  double c = 0.0;
  for (double r : row_c_) c = std::max(c, r);
  return c;
}

double KineticOperator::evaluate(std::span<const double> f, std::span<double> out) {
  std::vector<double> tmp(grid_.size());
  evaluate_spatial(f, out);
  const double c = evaluate_angular(f, tmp);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += tmp[i];
  return c;
}

double KineticOperator::max_angular_velocity(std::span<const double> f) {
  slopes(f, Directions::angular);
  potential(f);
  const int n = grid_.n(), m = grid_.m(), l = grid_.l();
  const double dphi = grid_.d_phi_cell();
  parallel_rows(n, [&](int i) {
    double cmax = 0.0;
    for (int j = 0; j < m; ++j) {
      const double* xi = xi_.data() + grid_.column(i, j);
      for (int k = 0; k < l; ++k) cmax = std::max(cmax, std::abs(-(xi[k + 1 == l ? 0 : k + 1] - xi[k]) / dphi));
    }
    row_c_[static_cast<std::size_t>(i)] = cmax;
  });
  double c = 0.0;
  for (double r : row_c_) c = std::max(c, r);
  return c;
}

}  // namespace chiralfv
