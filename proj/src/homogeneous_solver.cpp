#include "chiralfv/homogeneous_solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace chiralfv {

CellTrigWeights::CellTrigWeights(double dphi) {
  const double h = 0.5 * dphi;
  average = sinc(h);
  slope = std::cos(h) - sinc(h);
}

HomogeneousOperator::HomogeneousOperator(Grid1D grid, ModelParams params, double theta, PotentialOptions options)
    : grid_(grid),
      params_(params),
      theta_(theta),
      options_(options),
      recon_(grid),
      xi_(grid.size()),
      w_(grid.size()),
      flux_(grid.size()) {
  params_.validate();
  const int l = grid.l();
  const double dphi = grid.d_phi_cell();
  cos_phi_.resize(grid.size());
  sin_phi_.resize(grid.size());
  cos_shift_.resize(grid.size());
  sin_shift_.resize(grid.size());
  for (int k = 0; k < l; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    cos_phi_[kk] = std::cos(k * dphi);
    sin_phi_[kk] = std::sin(k * dphi);
    cos_shift_[kk] = std::cos(k * dphi + params_.alpha);
    sin_shift_[kk] = std::sin(k * dphi + params_.alpha);
  }
  if (options_.method == PotentialMethod::direct) {
    cos_diff_.resize(grid.size());
    sin_diff_.resize(grid.size());
    for (int d = 0; d < l; ++d) {
      cos_diff_[static_cast<std::size_t>(d)] = std::cos(d * dphi - params_.alpha);
      sin_diff_[static_cast<std::size_t>(d)] = std::sin(d * dphi - params_.alpha);
    }
  }
}

void HomogeneousOperator::potential(std::span<const double> f) {
  const int l = grid_.l();
  const CellTrigWeights wt(grid_.d_phi_cell());
  const auto& slope = recon_.slope;

  double mass = 0.0;
  for (int n = 0; n < l; ++n) mass += f[static_cast<std::size_t>(n)];
  if (!(mass > 0.0)) throw std::invalid_argument("potential_1d: density has zero total mass");
  const double scale = -params_.sigma / mass;

  if (options_.method == PotentialMethod::fourier_mode) {
    double a = 0.0, b = 0.0;
    for (int n = 0; n < l; ++n) {
      const auto nn = static_cast<std::size_t>(n);
      const double fa = wt.average * f[nn];
      const double sb = wt.slope * slope[nn];
      a += fa * cos_phi_[nn] + sb * sin_phi_[nn];
      b += fa * sin_phi_[nn] - sb * cos_phi_[nn];
    }
    for (int k = 0; k < l; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      xi_[kk] = scale * (a * cos_shift_[kk] + b * sin_shift_[kk]);
    }
  } else {
    for (int k = 0; k < l; ++k) {
      double sum = 0.0;
      for (int n = 0; n < l; ++n) {
        const auto nn = static_cast<std::size_t>(n);
        const auto d = static_cast<std::size_t>(wrap(n - k, l));
        sum += f[nn] * wt.average * cos_diff_[d] + slope[nn] * sin_diff_[d] * wt.slope;
      }
      xi_[static_cast<std::size_t>(k)] = scale * sum;
    }
  }

  if (params_.d_phi != 0.0) {
    for (int k = 0; k < l; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      xi_[kk] += params_.d_phi * std::log(std::max(f[kk], options_.log_floor));
    }
  }
}

double HomogeneousOperator::max_velocity(std::span<const double> f) {
  Field1D field(grid_, std::vector<double>(f.begin(), f.end()));
  reconstruct_into(field, theta_, recon_);
  potential(f);
  const int l = grid_.l();
  const double dphi = grid_.d_phi_cell();
  double c = 0.0;
  for (int k = 0; k < l; ++k) {
    const double w = -(xi_[static_cast<std::size_t>(wrap(k + 1, l))] - xi_[static_cast<std::size_t>(k)]) / dphi;
    c = std::max(c, std::abs(w));
  }
  return c;
}

double HomogeneousOperator::evaluate(std::span<const double> f, std::span<double> out) {
  if (f.size() != grid_.size() || out.size() != grid_.size())
    throw std::invalid_argument("HomogeneousOperator: state size does not match grid");
  require_nonnegative_finite(f, "rhs_1d");
  const int l = grid_.l();
  const double dphi = grid_.d_phi_cell();
  const double half = 0.5 * dphi;

  // Reconstruction in place, without the Field1D round trip.
  recon_.base.values.assign(f.begin(), f.end());
  for (int k = 0; k < l; ++k) {
    recon_.slope[static_cast<std::size_t>(k)] = limited_slope(f[static_cast<std::size_t>(wrap(k - 1, l))],
                                                              f[static_cast<std::size_t>(k)],
                                                              f[static_cast<std::size_t>(wrap(k + 1, l))], dphi, theta_);
  }
  // Same rounding guard as reconstruct().
  for (int k = 0; k < l; ++k) {
    auto& s = recon_.slope[static_cast<std::size_t>(k)];
    const double fk = f[static_cast<std::size_t>(k)];
    while (s != 0.0 && fk - 0.5 * dphi * std::abs(s) < 0.0) s *= 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
  }
  potential(f);

  double c = 0.0;
  for (int k = 0; k < l; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    const auto kp = static_cast<std::size_t>(wrap(k + 1, l));
    const double w = -(xi_[kp] - xi_[kk]) / dphi;
    w_[kk] = w;
    c = std::max(c, std::abs(w));
    const double top = f[kk] + half * recon_.slope[kk];
    const double bottom_next = f[kp] - half * recon_.slope[kp];
    flux_[kk] = std::max(w, 0.0) * top + std::min(w, 0.0) * bottom_next;
  }
  for (int k = 0; k < l; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    out[kk] = -(flux_[kk] - flux_[static_cast<std::size_t>(wrap(k - 1, l))]) / dphi;
  }
  return c;
}

Potential1D potential_1d(const Reconstruction1D& recon, const ModelParams& params, PotentialOptions options) {
  const Grid1D& g = recon.base.grid;
  require_nonnegative_finite(recon.base.values, "potential_1d");
  const auto interaction = interaction_potential_1d(recon, params, options.method);
  Potential1D p{interaction};
  if (params.d_phi != 0.0) {
    for (std::size_t k = 0; k < g.size(); ++k)
      p.values[k] += params.d_phi * std::log(std::max(recon.base.values[k], options.log_floor));
  }
  return p;
}

std::vector<double> interaction_potential_1d(const Reconstruction1D& recon, const ModelParams& params,
                                             PotentialMethod method) {
  const Grid1D& g = recon.base.grid;
  const int l = g.l();
  const double dphi = g.d_phi_cell();
  const CellTrigWeights wt(dphi);
  const auto& f = recon.base.values;
  double mass = 0.0;
  for (double v : f) mass += v;
  if (!(mass > 0.0)) throw std::invalid_argument("potential_1d: density has zero total mass");
  const double scale = -params.sigma / mass;

  std::vector<double> xi(g.size(), 0.0);
  if (method == PotentialMethod::fourier_mode) {
    double a = 0.0, b = 0.0;
    for (int n = 0; n < l; ++n) {
      const auto nn = static_cast<std::size_t>(n);
      const double phi = n * dphi;
      const double fa = wt.average * f[nn];
      const double sb = wt.slope * recon.slope[nn];
      a += fa * std::cos(phi) + sb * std::sin(phi);
      b += fa * std::sin(phi) - sb * std::cos(phi);
    }
    for (int k = 0; k < l; ++k) {
      const double beta = k * dphi + params.alpha;
      xi[static_cast<std::size_t>(k)] = scale * (a * std::cos(beta) + b * std::sin(beta));
    }
  } else {
    for (int k = 0; k < l; ++k) {
      double sum = 0.0;
      for (int n = 0; n < l; ++n) {
        const auto nn = static_cast<std::size_t>(n);
        const double arg = (n - k) * dphi - params.alpha;
        sum += f[nn] * wt.average * std::cos(arg) + recon.slope[nn] * std::sin(arg) * wt.slope;
      }
      xi[static_cast<std::size_t>(k)] = scale * sum;
    }
  }
  return xi;
}

std::vector<double> interface_velocities_1d(const Potential1D& potential, const Grid1D& grid) {
  if (potential.values.size() != grid.size())
    throw std::invalid_argument("interface_velocities_1d: potential size does not match grid");
  const int l = grid.l();
  std::vector<double> w(grid.size());
  for (int k = 0; k < l; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    w[kk] = -(potential.values[static_cast<std::size_t>(wrap(k + 1, l))] - potential.values[kk]) / grid.d_phi_cell();
  }
  return w;
}

Field1D rhs_1d(const Reconstruction1D& recon, const ModelParams& params, PotentialOptions options) {
  const Grid1D& g = recon.base.grid;
  const int l = g.l();
  const double dphi = g.d_phi_cell();
  const auto w = interface_velocities_1d(potential_1d(recon, params, options), g);
  const auto iv = interface_values(recon);
  std::vector<double> flux(g.size());
  for (int k = 0; k < l; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    flux[kk] = std::max(w[kk], 0.0) * iv.top[kk] + std::min(w[kk], 0.0) * iv.bottom[static_cast<std::size_t>(wrap(k + 1, l))];
  }
  Field1D out(g);
  for (int k = 0; k < l; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    out.values[kk] = -(flux[kk] - flux[static_cast<std::size_t>(wrap(k - 1, l))]) / dphi;
  }
  return out;
}

double cfl_dt_1d(std::span<const double> velocities, const Grid1D& grid) {
  double c = 0.0;
  for (double w : velocities) c = std::max({c, std::max(w, 0.0), -std::min(w, 0.0)});
  if (c == 0.0) return std::numeric_limits<double>::infinity();
  return grid.d_phi_cell() / (2.0 * c);
}

}  // namespace chiralfv
