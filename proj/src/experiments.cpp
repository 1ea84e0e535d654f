#include "chiralfv/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

#include "chiralfv/analytic.hpp"
#include "chiralfv/homogeneous_solver.hpp"
#include "chiralfv/observables.hpp"

namespace chiralfv {

namespace {

struct Rule {
  std::vector<double> x;  // on [-1, 1]
  std::vector<double> w;
};

template <unsigned N>
Rule make_rule() {
  using G = boost::math::quadrature::gauss<double, N>;
  const auto& a = G::abscissa();
  const auto& wt = G::weights();
  Rule r;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] == 0.0) {
      r.x.push_back(0.0);
      r.w.push_back(wt[i]);
    } else {
      r.x.push_back(a[i]);
      r.w.push_back(wt[i]);
      r.x.push_back(-a[i]);
      r.w.push_back(wt[i]);
    }
  }
  return r;
}

Rule gauss_rule(int nodes) {
  switch (nodes) {
    case 1: return {{0.0}, {2.0}};
    case 2: return make_rule<2>();
    case 3: return make_rule<3>();
    case 4: return make_rule<4>();
    case 5: return make_rule<5>();
    case 6: return make_rule<6>();
    case 8: return make_rule<8>();
    default: throw std::invalid_argument("gauss_rule: supported node counts are 1-6 and 8");
  }
}

double epsilon_or(const QuasirandomICSpec& spec, double fallback) {
  const double e = spec.epsilon.value_or(fallback);
  if (!(e >= 0.0) || !std::isfinite(e)) throw std::invalid_argument("quasirandom IC: epsilon must be >= 0");
  if (spec.k_modes < 1) throw std::invalid_argument("quasirandom IC: k_modes must be >= 1");
  return e;
}

double min_value(const std::vector<double>& v) { return *std::min_element(v.begin(), v.end()); }

void renormalize(std::vector<double>& v, double cell_volume, double target) {
  double mass = 0.0;
  for (double x : v) mass += x;
  mass *= cell_volume;
  if (!(mass > 0.0)) throw std::runtime_error("renormalize: field has no mass");
  const double s = target / mass;
  for (double& x : v) x *= s;
}

// Angular series sum_k a_k cos k phi + b_k sin k phi as exact cell averages.
std::vector<double> angular_series(const std::vector<double>& a, const std::vector<double>& b, const Grid1D& grid) {
  const int l = grid.l();
  const double dphi = grid.d_phi_cell();
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t m = 0; m < a.size(); ++m) {
    const double k = static_cast<double>(m + 1);
    const double s = sinc(0.5 * k * dphi);
    for (int c = 0; c < l; ++c)
      out[static_cast<std::size_t>(c)] += s * (a[m] * std::cos(k * c * dphi) + b[m] * std::sin(k * c * dphi));
  }
  return out;
}

// Cell averages of sum c sin(2 pi n x - a) sin(2 pi m y - b) sin(l phi - g).
std::vector<double> product_series(int kmodes, double eps, std::mt19937_64& rng, const Grid3D& g) {
  std::uniform_real_distribution<double> coef(-eps, eps), phase(0.0, two_pi);
  const int n = g.n(), m = g.m(), l = g.l();
  std::vector<double> out(g.size(), 0.0);
  std::vector<double> xs(static_cast<std::size_t>(n)), ys(static_cast<std::size_t>(m)), ps(static_cast<std::size_t>(l));
  for (int a = 1; a <= kmodes; ++a)
    for (int b = 1; b <= kmodes; ++b)
      for (int c = 1; c <= kmodes; ++c) {
        const double cc = coef(rng), sa = phase(rng), sb = phase(rng), sg = phase(rng);
        const double wx = sinc(std::numbers::pi * a * g.dx()), wy = sinc(std::numbers::pi * b * g.dy());
        const double wp = sinc(0.5 * c * g.d_phi_cell());
        for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = wx * std::sin(two_pi * a * g.x_center(i) - sa);
        for (int j = 0; j < m; ++j) ys[static_cast<std::size_t>(j)] = wy * std::sin(two_pi * b * g.y_center(j) - sb);
        for (int k = 0; k < l; ++k) ps[static_cast<std::size_t>(k)] = wp * std::sin(c * g.phi_center(k) - sg);
        for (int i = 0; i < n; ++i)
          for (int j = 0; j < m; ++j) {
            const double xy = cc * xs[static_cast<std::size_t>(i)] * ys[static_cast<std::size_t>(j)];
            double* f = out.data() + g.column(i, j);
            for (int k = 0; k < l; ++k) f[k] += xy * ps[static_cast<std::size_t>(k)];
          }
      }
  return out;
}

std::complex<double> reconstruction_moment(const Reconstruction1D& r) {
  const Grid1D& g = r.base.grid;
  const CellTrigWeights wt(g.d_phi_cell());
  std::complex<double> z = 0.0;
  for (int k = 0; k < g.l(); ++k)
    z += g.d_phi_cell() * std::polar(1.0, g.center(k)) *
         std::complex<double>(wt.average * r.base[k], -wt.slope * r.slope[static_cast<std::size_t>(k)]);
  return z;
}

std::complex<double> reconstruction_moment(const Reconstruction3D& r) {
  const Grid3D& g = r.base.grid;
  const CellTrigWeights wt(g.d_phi_cell());
  std::complex<double> z = 0.0;
  for (std::size_t c = 0; c < g.spatial_size(); ++c)
    for (int k = 0; k < g.l(); ++k) {
      const std::size_t idx = c * static_cast<std::size_t>(g.l()) + static_cast<std::size_t>(k);
      z += std::polar(1.0, g.phi_center(k)) *
           std::complex<double>(wt.average * r.base.values[idx], -wt.slope * r.slope_phi[idx]);
    }
  return z;
}

double wrap_coord(double c, double period) {
  double w = std::fmod(c, period);
  if (w < 0.0) w += period;
  return w;
}

std::uint64_t lcm64(std::uint64_t a, std::uint64_t b) { return a / std::gcd(a, b) * b; }

// Sorted breakpoints of the common refinement of two cell-centered periodic
// meshes on [-h_a/2, period - h_a/2).
std::vector<double> common_breaks(int na, int nb, double period) {
  const double ha = period / na, hb = period / nb;
  const double lo = -0.5 * ha, hi = period - 0.5 * ha;
  std::vector<double> pts;
  for (int k = 0; k <= na; ++k) pts.push_back(lo + k * ha);
  for (int k = -1; k <= nb + 1; ++k) {
    const double p = (k - 0.5) * hb;
    if (p > lo && p < hi) pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end());
  std::vector<double> out;
  for (double p : pts)
    if (out.empty() || p - out.back() > 1e-14 * period) out.push_back(p);
  if (hi - out.back() > 1e-14 * period) out.push_back(hi);
  else out.back() = hi;
  return out;
}

void accumulate(ErrorNorms& e, double weight, double diff) {
  e.l1 += weight * std::abs(diff);
  e.l2 += weight * diff * diff;
}

}  // namespace

// --- initial conditions ------------------------------------------------------

Field1D quasirandom_ic_1d(const QuasirandomICSpec& spec, const Grid1D& grid) {
  const double eps = epsilon_or(spec, default_epsilon_1d());
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> coef(-eps, eps);
  for (int attempt = 0; attempt <= spec.max_redraws; ++attempt) {
    std::vector<double> a(static_cast<std::size_t>(spec.k_modes)), b(a.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      a[k] = eps > 0.0 ? coef(rng) : 0.0;
      b[k] = eps > 0.0 ? coef(rng) : 0.0;
    }
    auto v = angular_series(a, b, grid);
    for (double& x : v) x += uniform_density();
    if (min_value(v) < 0.0) continue;
    renormalize(v, grid.d_phi_cell(), 1.0);
    return Field1D(grid, std::move(v));
  }
  throw std::runtime_error("quasirandom_ic_1d: no nonnegative draw within the redraw cap; use a smaller epsilon");
}

Field3D quasirandom_ic_3d(const QuasirandomICSpec& spec, const Grid3D& grid) {
  const double eps = epsilon_or(spec, default_epsilon_3d());
  std::mt19937_64 rng(spec.seed);
  for (int attempt = 0; attempt <= spec.max_redraws; ++attempt) {
    auto v = eps > 0.0 ? product_series(spec.k_modes, eps, rng, grid) : std::vector<double>(grid.size(), 0.0);
    for (double& x : v) x += uniform_density();
    if (min_value(v) < 0.0) continue;
    renormalize(v, grid.cell_volume(), 1.0);
    return Field3D(grid, std::move(v));
  }
  throw std::runtime_error("quasirandom_ic_3d: no nonnegative draw within the redraw cap; use a smaller epsilon");
}

Field3D perturb_spatial(const Field3D& field, const QuasirandomICSpec& spec) {
  const double eps = epsilon_or(spec, default_epsilon_3d());
  if (eps == 0.0) return field;
  std::mt19937_64 rng(spec.seed);
  auto p = product_series(spec.k_modes, 1.0, rng, field.grid);
  double amp = 0.0;
  for (double x : p) amp = std::max(amp, std::abs(x));
  const double mass = total_mass(field);
  Field3D out = field;
  if (amp > 0.0)
    for (std::size_t c = 0; c < p.size(); ++c) out.values[c] = std::max(0.0, out.values[c] + eps * p[c] / amp);
  renormalize(out.values, field.grid.cell_volume(), mass);
  return out;
}

Field1D perturb_angular(const Field1D& field, const QuasirandomICSpec& spec) {
  const double eps = epsilon_or(spec, default_epsilon_1d());
  if (eps == 0.0) return field;
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::vector<double> a(static_cast<std::size_t>(spec.k_modes)), b(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    a[k] = coef(rng);
    b[k] = coef(rng);
  }
  const auto p = angular_series(a, b, field.grid);
  double amp = 0.0;
  for (double x : p) amp = std::max(amp, std::abs(x));
  const double mass = total_mass(field);
  Field1D out = field;
  if (amp > 0.0)
    for (std::size_t c = 0; c < p.size(); ++c) out.values[c] = std::max(0.0, out.values[c] + eps * p[c] / amp);
  renormalize(out.values, field.grid.d_phi_cell(), mass);
  return out;
}

Field1D cell_averages(const Grid1D& grid, const std::function<double(double)>& f) {
  const Rule r = gauss_rule(8);
  const double h = grid.d_phi_cell();
  Field1D out(grid);
  for (int k = 0; k < grid.l(); ++k) {
    double s = 0.0;
    for (std::size_t q = 0; q < r.x.size(); ++q) s += 0.5 * r.w[q] * f(grid.center(k) + 0.5 * h * r.x[q]);
    out[k] = s;
  }
  return out;
}

Field3D homogeneous_field(const Grid3D& grid, const Field1D& profile) {
  if (profile.grid.l() != grid.l()) throw std::invalid_argument("homogeneous_field: angular sizes differ");
  Field3D out(grid);
  for (int i = 0; i < grid.n(); ++i)
    for (int j = 0; j < grid.m(); ++j) std::copy(profile.values.begin(), profile.values.end(), out.column(i, j).begin());
  return out;
}

// --- norms -------------------------------------------------------------------

double circular_mean(const AngularProfile& f) {
  // Doubling on the first moment with a tolerance relative to the mass; a
  // purely relative test stalls when one component is zero.
  auto moment = [&](int panels) {
    const double c = composite_gauss([&](double p) { return f(p) * std::cos(p); }, 0.0, two_pi, panels);
    const double s = composite_gauss([&](double p) { return f(p) * std::sin(p); }, 0.0, two_pi, panels);
    return std::complex<double>(c, s);
  };
  const double mass = std::abs(composite_gauss(f, 0.0, two_pi, 256));
  int panels = 64;
  std::complex<double> prev = moment(panels);
  while (panels < (1 << 16)) {
    panels *= 2;
    const std::complex<double> cur = moment(panels);
    if (std::abs(cur - prev) <= 1e-13 * std::max(mass, 1e-300)) return std::arg(cur);
    prev = cur;
  }
  return std::arg(prev);
}

ErrorNorms error_norms_exact(const Reconstruction1D& numeric, const AngularProfile& exact, bool align, int nodes) {
  const Rule r = gauss_rule(nodes);
  const Grid1D& g = numeric.base.grid;
  const double h = g.d_phi_cell();
  const double shift = align ? std::arg(reconstruction_moment(numeric)) - circular_mean(exact) : 0.0;
  auto ex = [&](double phi) { return exact(wrap_coord(phi - shift, two_pi)); };
  ErrorNorms e;
  for (int k = 0; k < g.l(); ++k) {
    const double f = numeric.base[k], s = numeric.slope[static_cast<std::size_t>(k)];
    for (std::size_t q = 0; q < r.x.size(); ++q) {
      const double d = 0.5 * h * r.x[q];
      accumulate(e, 0.5 * h * r.w[q], f + s * d - ex(g.center(k) + d));
    }
    e.linf = std::max(e.linf, std::abs(f - ex(g.center(k))));
  }
  e.l2 = std::sqrt(e.l2);
  return e;
}

ErrorNorms error_norms_exact(const Reconstruction3D& numeric, const AngularProfile& exact, bool align, int nodes) {
  const Rule r = gauss_rule(nodes);
  const Grid3D& g = numeric.base.grid;
  const int l = g.l();
  const double hx = g.dx(), hy = g.dy(), hp = g.d_phi_cell();
  const double shift = align ? std::arg(reconstruction_moment(numeric)) - circular_mean(exact) : 0.0;
  const std::size_t nq = r.x.size();
  // Exact values at the angular nodes and centers, shared by all columns.
  std::vector<double> at_nodes(static_cast<std::size_t>(l) * nq), at_center(static_cast<std::size_t>(l));
  for (int k = 0; k < l; ++k) {
    at_center[static_cast<std::size_t>(k)] = exact(wrap_coord(g.phi_center(k) - shift, two_pi));
    for (std::size_t q = 0; q < nq; ++q)
      at_nodes[static_cast<std::size_t>(k) * nq + q] =
          exact(wrap_coord(g.phi_center(k) + 0.5 * hp * r.x[q] - shift, two_pi));
  }
  ErrorNorms e;
  const double vol = 0.125 * hx * hy * hp;
  for (std::size_t c = 0; c < g.spatial_size(); ++c)
    for (int k = 0; k < l; ++k) {
      const std::size_t idx = c * static_cast<std::size_t>(l) + static_cast<std::size_t>(k);
      const double f = numeric.base.values[idx];
      const double sx = numeric.slope_x[idx], sy = numeric.slope_y[idx], sp = numeric.slope_phi[idx];
      for (std::size_t a = 0; a < nq; ++a)
        for (std::size_t b = 0; b < nq; ++b)
          for (std::size_t q = 0; q < nq; ++q) {
            const double v = f + sx * 0.5 * hx * r.x[a] + sy * 0.5 * hy * r.x[b] + sp * 0.5 * hp * r.x[q];
            accumulate(e, vol * r.w[a] * r.w[b] * r.w[q], v - at_nodes[static_cast<std::size_t>(k) * nq + q]);
          }
      e.linf = std::max(e.linf, std::abs(f - at_center[static_cast<std::size_t>(k)]));
    }
  e.l2 = std::sqrt(e.l2);
  return e;
}

ErrorNorms error_norms_exact(const Reconstruction3D& numeric, const PhaseSpaceProfile& exact, bool align, int nodes) {
  const Rule r = gauss_rule(nodes);
  const Grid3D& g = numeric.base.grid;
  double shift = 0.0;
  if (align) {
    // Circular mean of the spatial average of the exact solution.
    const Rule r8 = gauss_rule(8);
    auto avg = [&](double phi) {
      double s = 0.0;
      for (int i = 0; i < g.n(); ++i)
        for (int j = 0; j < g.m(); ++j)
          for (std::size_t a = 0; a < r8.x.size(); ++a)
            for (std::size_t b = 0; b < r8.x.size(); ++b)
              s += 0.25 * r8.w[a] * r8.w[b] * g.dx() * g.dy() *
                   exact(wrap_coord(g.x_center(i) + 0.5 * g.dx() * r8.x[a], 1.0),
                         wrap_coord(g.y_center(j) + 0.5 * g.dy() * r8.x[b], 1.0), phi);
      return s;
    };
    shift = std::arg(reconstruction_moment(numeric)) - circular_mean(avg);
  }
  const double hx = g.dx(), hy = g.dy(), hp = g.d_phi_cell();
  const double vol = 0.125 * hx * hy * hp;
  ErrorNorms e;
  for (int i = 0; i < g.n(); ++i)
    for (int j = 0; j < g.m(); ++j)
      for (int k = 0; k < g.l(); ++k) {
        const std::size_t idx = g.index(i, j, k);
        const double f = numeric.base.values[idx];
        const double sx = numeric.slope_x[idx], sy = numeric.slope_y[idx], sp = numeric.slope_phi[idx];
        for (std::size_t a = 0; a < r.x.size(); ++a)
          for (std::size_t b = 0; b < r.x.size(); ++b)
            for (std::size_t q = 0; q < r.x.size(); ++q) {
              const double dx = 0.5 * hx * r.x[a], dy = 0.5 * hy * r.x[b], dp = 0.5 * hp * r.x[q];
              const double ex = exact(wrap_coord(g.x_center(i) + dx, 1.0), wrap_coord(g.y_center(j) + dy, 1.0),
                                      wrap_coord(g.phi_center(k) + dp - shift, two_pi));
              accumulate(e, vol * r.w[a] * r.w[b] * r.w[q], f + sx * dx + sy * dy + sp * dp - ex);
            }
        const double ex =
            exact(g.x_center(i), g.y_center(j), wrap_coord(g.phi_center(k) - shift, two_pi));
        e.linf = std::max(e.linf, std::abs(f - ex));
      }
  e.l2 = std::sqrt(e.l2);
  return e;
}

ErrorNorms error_norms_reference(const Reconstruction1D& a, const Reconstruction1D& b, int nodes) {
  const Rule r = gauss_rule(nodes);
  const int la = a.base.grid.l(), lb = b.base.grid.l();
  const auto breaks = common_breaks(la, lb, two_pi);
  ErrorNorms e;
  for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
    const double lo = breaks[p], hi = breaks[p + 1], mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    for (std::size_t q = 0; q < r.x.size(); ++q) {
      const double phi = mid + half * r.x[q];
      accumulate(e, half * r.w[q], evaluate_at(a, phi) - evaluate_at(b, phi));
    }
  }
  const auto lc = static_cast<int>(lcm64(static_cast<std::uint64_t>(la), static_cast<std::uint64_t>(lb)));
  for (int c = 0; c < lc; ++c) {
    const double phi = c * two_pi / lc;
    e.linf = std::max(e.linf, std::abs(evaluate_at(a, phi) - evaluate_at(b, phi)));
  }
  e.l2 = std::sqrt(e.l2);
  return e;
}

ErrorNorms error_norms_reference(const Reconstruction3D& a, const Reconstruction3D& b, int nodes,
                                 std::uint64_t max_cells) {
  const Grid3D& ga = a.base.grid;
  const Grid3D& gb = b.base.grid;
  const std::uint64_t nc = lcm64(static_cast<std::uint64_t>(ga.n()), static_cast<std::uint64_t>(gb.n()));
  const std::uint64_t mc = lcm64(static_cast<std::uint64_t>(ga.m()), static_cast<std::uint64_t>(gb.m()));
  const std::uint64_t lc = lcm64(static_cast<std::uint64_t>(ga.l()), static_cast<std::uint64_t>(gb.l()));
  const long double cells = static_cast<long double>(nc) * mc * lc;
  if (cells > static_cast<long double>(max_cells)) {
    std::ostringstream os;
    os << "error_norms_reference: lcm grid " << nc << "x" << mc << "x" << lc << " exceeds the cap of " << max_cells
       << " cells; evaluate in tiles";
    throw std::invalid_argument(os.str());
  }
  const Rule r = gauss_rule(nodes);
  const auto bx = common_breaks(ga.n(), gb.n(), 1.0);
  const auto by = common_breaks(ga.m(), gb.m(), 1.0);
  const auto bp = common_breaks(ga.l(), gb.l(), two_pi);
  ErrorNorms e;
  const std::size_t nq = r.x.size();
  for (std::size_t i = 0; i + 1 < bx.size(); ++i)
    for (std::size_t j = 0; j + 1 < by.size(); ++j)
      for (std::size_t k = 0; k + 1 < bp.size(); ++k) {
        const double mx = 0.5 * (bx[i] + bx[i + 1]), hx = 0.5 * (bx[i + 1] - bx[i]);
        const double my = 0.5 * (by[j] + by[j + 1]), hy = 0.5 * (by[j + 1] - by[j]);
        const double mp = 0.5 * (bp[k] + bp[k + 1]), hp = 0.5 * (bp[k + 1] - bp[k]);
        for (std::size_t qa = 0; qa < nq; ++qa)
          for (std::size_t qb = 0; qb < nq; ++qb)
            for (std::size_t qc = 0; qc < nq; ++qc) {
              const double x = mx + hx * r.x[qa], y = my + hy * r.x[qb], p = mp + hp * r.x[qc];
              accumulate(e, hx * hy * hp * r.w[qa] * r.w[qb] * r.w[qc], evaluate_at(a, x, y, p) - evaluate_at(b, x, y, p));
            }
      }
  for (std::uint64_t i = 0; i < nc; ++i)
    for (std::uint64_t j = 0; j < mc; ++j)
      for (std::uint64_t k = 0; k < lc; ++k) {
        const double x = static_cast<double>(i) / nc, y = static_cast<double>(j) / mc,
                     p = two_pi * static_cast<double>(k) / lc;
        e.linf = std::max(e.linf, std::abs(evaluate_at(a, x, y, p) - evaluate_at(b, x, y, p)));
      }
  e.l2 = std::sqrt(e.l2);
  return e;
}

double linear_fit_slope(const std::vector<double>& t, const std::vector<double>& y) {
  if (t.size() != y.size() || t.size() < 2) throw std::invalid_argument("linear_fit_slope: need >= 2 matching samples");
  const double n = static_cast<double>(t.size());
  const double mt = std::accumulate(t.begin(), t.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    sxy += (t[i] - mt) * (y[i] - my);
    sxx += (t[i] - mt) * (t[i] - mt);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit_slope: abscissae are all equal");
  return sxy / sxx;
}

double fitted_order(const std::vector<double>& h, const std::vector<double>& err) {
  std::vector<double> lh, le;
  for (std::size_t i = 0; i < h.size(); ++i) {
    lh.push_back(std::log(h[i]));
    le.push_back(std::log(err[i]));
  }
  return linear_fit_slope(lh, le);
}

AngularProfile exact_profile(const ModelParams& params) {
  if (params.alpha == 0.0) {
    const VonMises vm = von_mises(0.0, params);
    if (vm.r_mag > 0.0) return [vm](double phi) { return vm(phi); };
    return [](double) { return uniform_density(); };
  }
  const TravelingWaveSolution sol = solve_sce(params);
  if (sol.disordered || !sol.profile) return [](double) { return uniform_density(); };
  const TravelingWaveProfile prof = *sol.profile;
  return [prof](double phi) { return prof(phi); };
}

namespace {

void fill_orders(RefinementStudy& s) {
  std::vector<double> h, e1, e2, ei;
  for (const auto& r : s.rows) {
    h.push_back(r.h);
    e1.push_back(r.err.l1);
    e2.push_back(r.err.l2);
    ei.push_back(r.err.linf);
  }
  if (h.size() < 2) return;
  s.order_l1 = fitted_order(h, e1);
  s.order_l2 = fitted_order(h, e2);
  s.order_linf = fitted_order(h, ei);
}

}  // namespace

RefinementStudy refinement_study_1d(const ModelParams& params, const std::vector<int>& sizes, const StepperConfig& config,
                                    const QuasirandomICSpec& ic, const AngularProfile& exact) {
  RefinementStudy study;
  for (int l : sizes) {
    const Grid1D grid(l);
    Field1D f = quasirandom_ic_1d(ic, grid);
    run(f, 0.0, params, config, {});
    RefinementRow row;
    row.l = l;
    row.h = grid.d_phi_cell();
    row.err = error_norms_exact(reconstruct(f, config.theta), exact, true);
    study.rows.push_back(row);
  }
  fill_orders(study);
  return study;
}

RefinementStudy refinement_study_3d(const ModelParams& params, const std::vector<std::array<int, 3>>& grids,
                                    const StepperConfig& config, const QuasirandomICSpec& ic) {
  if (grids.size() < 2) throw std::invalid_argument("refinement_study_3d: need at least two grids");
  std::vector<Field3D> finals;
  for (const auto& g : grids) {
    Field3D f = quasirandom_ic_3d(ic, Grid3D(g[0], g[1], g[2]));
    run(f, 0.0, params, config, {});
    finals.push_back(std::move(f));
  }
  const Reconstruction3D ref = reconstruct(finals.back(), config.theta);
  RefinementStudy study;
  for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
    RefinementRow row;
    row.n = grids[i][0];
    row.m = grids[i][1];
    row.l = grids[i][2];
    row.h = finals[i].grid.d_phi_cell();
    row.err = error_norms_reference(reconstruct(finals[i], config.theta), ref);
    study.rows.push_back(row);
  }
  fill_orders(study);
  return study;
}

// --- continuation ------------------------------------------------------------

const char* to_string(SweepDirection d) { return d == SweepDirection::forward ? "forward" : "backward"; }

namespace {

struct SweepAdapter1D {
  using FieldType = Field1D;
  using StepperType = Stepper1D;
  static Grid1D grid(const Field1D& f) { return f.grid; }
  static Field1D perturb(const Field1D& f, const QuasirandomICSpec& s) { return perturb_angular(f, s); }
  static double monitor(const Field1D& f) { return polar_order(f).magnitude; }
  static OrderParameter polar(const Field1D& f) { return polar_order(f); }
  static OrderParameter localization(const Field1D&) { return {}; }
};

struct SweepAdapter3D {
  using FieldType = Field3D;
  using StepperType = Stepper3D;
  static Grid3D grid(const Field3D& f) { return f.grid; }
  static Field3D perturb(const Field3D& f, const QuasirandomICSpec& s) { return perturb_spatial(f, s); }
  static double monitor(const Field3D& f) { return max_spatial_deviation(f); }
  static OrderParameter polar(const Field3D& f) { return polar_order(f); }
  static OrderParameter localization(const Field3D& f) { return localization_order(f); }
};

template <class A>
std::vector<SweepRecord> sweep(typename A::FieldType state, const std::vector<SweepPoint>& path,
                               const ContinuationConfig& cfg) {
  if (!(cfg.sample_every > 0.0) || !(cfg.fit_window > 0.0))
    throw std::invalid_argument("continuation_sweep: sample_every and fit_window must be positive");
  std::vector<SweepRecord> records;
  for (std::size_t idx = 0; idx < path.size(); ++idx) {
    const SweepPoint& pt = path[idx];
    if (pt.direction == SweepDirection::backward) {
      QuasirandomICSpec spec = cfg.perturbation;
      spec.seed += idx;
      state = A::perturb(state, spec);
    }
    StepperConfig sc;
    sc.dt = cfg.dt;
    sc.cfl_safety = cfg.cfl_safety;
    sc.theta = cfg.theta;
    sc.t_end = std::numeric_limits<double>::max();
    typename A::StepperType stepper(A::grid(state), pt.params, sc);

    SweepRecord rec;
    rec.params = pt.params;
    rec.direction = pt.direction;
    const double tol = pt.direction == SweepDirection::forward ? cfg.slope_tol_forward : cfg.slope_tol_backward;

    double t = 0.0, last_dt = 0.0;
    long long steps = 0;
    std::vector<double> theta_unwrapped;
    double last_theta = 0.0;
    long long samples = 0;
    const double t_monitor = cfg.equilibrate_time;
    while (steps < cfg.max_steps) {
      last_dt = stepper.step(state.values, std::numeric_limits<double>::max());
      t += last_dt;
      ++steps;
      if (t < t_monitor - 1e-9 * cfg.sample_every) continue;
      const double next = t_monitor + static_cast<double>(samples) * cfg.sample_every;
      if (t < next - 1e-9 * cfg.sample_every) continue;
      while (t >= t_monitor + static_cast<double>(samples) * cfg.sample_every - 1e-9 * cfg.sample_every) ++samples;

      rec.monitor_times.push_back(t);
      rec.monitor_series.push_back(A::monitor(state));
      const double th = A::polar(state).phase;
      if (theta_unwrapped.empty()) {
        theta_unwrapped.push_back(th);
      } else {
        double d = th - last_theta;
        d -= two_pi * std::round(d / two_pi);
        theta_unwrapped.push_back(theta_unwrapped.back() + d);
      }
      last_theta = th;

      if (t - t_monitor >= cfg.fit_window - 1e-9 * cfg.sample_every) {
        const double from = t - cfg.fit_window - 1e-9 * cfg.sample_every;
        const auto first = static_cast<std::size_t>(
            std::lower_bound(rec.monitor_times.begin(), rec.monitor_times.end(), from) - rec.monitor_times.begin());
        std::vector<double> tw(rec.monitor_times.begin() + static_cast<std::ptrdiff_t>(first), rec.monitor_times.end());
        std::vector<double> yw(rec.monitor_series.begin() + static_cast<std::ptrdiff_t>(first), rec.monitor_series.end());
        if (tw.size() >= 2) {
          rec.slope = linear_fit_slope(tw, yw);
          if (std::abs(rec.slope) < tol) {
            rec.converged = true;
            break;
          }
        }
      }
    }
    if (rec.monitor_times.size() >= 2) {
      const double from = rec.monitor_times.back() - cfg.fit_window - 1e-9 * cfg.sample_every;
      const auto first = static_cast<std::size_t>(
          std::lower_bound(rec.monitor_times.begin(), rec.monitor_times.end(), from) - rec.monitor_times.begin());
      std::vector<double> tw(rec.monitor_times.begin() + static_cast<std::ptrdiff_t>(first), rec.monitor_times.end());
      std::vector<double> th(theta_unwrapped.begin() + static_cast<std::ptrdiff_t>(first), theta_unwrapped.end());
      if (tw.size() >= 2) rec.v_est = linear_fit_slope(tw, th);
    }
    const OrderParameter op = A::polar(state);
    rec.r_final = op.magnitude;
    rec.theta_final = op.phase;
    const OrderParameter loc = A::localization(state);
    rec.p_final = loc.magnitude;
    rec.psi_final = loc.phase;
    rec.mass_final = total_mass(state);
    rec.last_dt = last_dt;
    rec.monitor_final = A::monitor(state);
    rec.wall_steps = steps;
    rec.time = t;
    if (cfg.on_point) cfg.on_point(idx, state.values, t);
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace

std::vector<SweepRecord> continuation_sweep(Field3D initial, const std::vector<SweepPoint>& path,
                                            const ContinuationConfig& config) {
  return sweep<SweepAdapter3D>(std::move(initial), path, config);
}

std::vector<SweepRecord> continuation_sweep(Field1D initial, const std::vector<SweepPoint>& path,
                                            const ContinuationConfig& config) {
  return sweep<SweepAdapter1D>(std::move(initial), path, config);
}

}  // namespace chiralfv
