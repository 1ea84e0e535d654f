#include "chiralfv/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/quadrature/gauss.hpp>

namespace chiralfv {

namespace {

constexpr int kBasePanels = 64;
constexpr int kMaxPanels = 1 << 16;

// Full 8-point Gauss-Legendre rule on [-1, 1].
struct GaussRule8 {
  double x[8];
  double w[8];
  GaussRule8() {
    using rule = boost::math::quadrature::gauss<double, 8>;
    const auto& a = rule::abscissa();
    const auto& wt = rule::weights();
    for (std::size_t i = 0; i < 4; ++i) {
      x[i] = -a[3 - i];
      w[i] = wt[3 - i];
      x[7 - i] = a[3 - i];
      w[7 - i] = wt[3 - i];
    }
  }
};

const GaussRule8& rule8() {
  static const GaussRule8 r;
  return r;
}

// Visits the quadrature nodes of the composite rule: visit(x, weight).
template <class Visit>
void for_each_node(double a, double b, int panels, Visit&& visit) {
  const GaussRule8& r = rule8();
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * h;
    for (int q = 0; q < 8; ++q) visit(mid + 0.5 * h * r.x[q], 0.5 * h * r.w[q]);
  }
}

// log int_a^b exp(e(x)) dx by a shifted composite rule.
template <class Exponent>
double log_integral_exp(Exponent&& e, double a, double b, int panels, std::vector<double>& buf) {
  buf.clear();
  double emax = -std::numeric_limits<double>::infinity();
  for_each_node(a, b, panels, [&](double x, double) {
    const double v = e(x);
    buf.push_back(v);
    emax = std::max(emax, v);
  });
  double sum = 0.0;
  std::size_t i = 0;
  for_each_node(a, b, panels, [&](double, double w) { sum += w * std::exp(buf[i++] - emax); });
  return emax + std::log(sum);
}

}  // namespace

double composite_gauss(const std::function<double(double)>& h, double a, double b, int panels) {
  if (panels <= 0) throw std::invalid_argument("composite_gauss: panels must be positive");
  double sum = 0.0;
  for_each_node(a, b, panels, [&](double x, double w) { sum += w * h(x); });
  return sum;
}

double adaptive_gauss(const std::function<double(double)>& h, double a, double b, double rel_tol, int* panels_used) {
  int panels = kBasePanels;
  double prev = composite_gauss(h, a, b, panels);
  while (panels < kMaxPanels) {
    panels *= 2;
    const double cur = composite_gauss(h, a, b, panels);
    if (std::abs(cur - prev) <= rel_tol * std::max(std::abs(cur), 1e-300)) {
      if (panels_used) *panels_used = panels;
      return cur;
    }
    prev = cur;
  }
  if (panels_used) *panels_used = panels;
  return prev;
}

double bessel_i0_scaled(double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("bessel_i0_scaled: kappa must be >= 0");
  if (kappa == 0.0) return 1.0;
  return adaptive_gauss([kappa](double t) { return std::exp(kappa * (std::cos(t) - 1.0)); }, 0.0, std::numbers::pi,
                        1e-14) /
         std::numbers::pi;
}

double bessel_ratio(double kappa) {
  if (!(kappa >= 0.0) || !std::isfinite(kappa)) throw std::invalid_argument("bessel_ratio: kappa must be >= 0");
  if (kappa == 0.0) return 0.0;
  const double num = adaptive_gauss([kappa](double t) { return std::exp(kappa * (std::cos(t) - 1.0)) * std::cos(t); },
                                    0.0, std::numbers::pi, 1e-14);
  const double den = adaptive_gauss([kappa](double t) { return std::exp(kappa * (std::cos(t) - 1.0)); }, 0.0,
                                    std::numbers::pi, 1e-14);
  return num / den;
}

double VonMises::operator()(double phi) const {
  if (kappa == 0.0) return uniform_density();
  return std::exp(kappa * (std::cos(phi - theta_mean) - 1.0)) / (two_pi * i0_scaled);
}

VonMises von_mises(double theta_mean, const ModelParams& params) {
  params.validate();
  if (!(params.d_phi > 0.0)) throw std::invalid_argument("von_mises: d_phi must be positive");
  VonMises vm;
  vm.theta_mean = theta_mean;
  if (params.d_phi >= 0.5 * params.sigma) return vm;

  const double damping = 0.8;
  double r = 0.5;
  constexpr int cap = 1000000;
  for (int it = 1; it <= cap; ++it) {
    const double target = bessel_ratio(params.sigma * r / params.d_phi);
    const double next = (1.0 - damping) * r + damping * target;
    if (std::abs(target - r) <= 1e-14) {
      vm.r_mag = target;
      vm.kappa = params.sigma * target / params.d_phi;
      vm.i0_scaled = bessel_i0_scaled(vm.kappa);
      vm.iterations = it;
      return vm;
    }
    r = next;
    if (it == cap) {
      std::ostringstream os;
      os << "von_mises: fixed point did not converge, residual " << std::abs(target - r);
      throw std::runtime_error(os.str());
    }
  }
  return vm;
}

// ---------------------------------------------------------------------------

TravelingWaveProfile::TravelingWaveProfile(double r_mag, double v_wave, const ModelParams& params, int inner_panels)
    : r_(r_mag), v_(v_wave), params_(params) {
  params_.validate();
  if (!(params_.d_phi > 0.0)) throw std::invalid_argument("traveling_wave_profile: d_phi must be positive");
  if (!std::isfinite(r_mag) || !std::isfinite(v_wave) || r_mag < 0.0)
    throw std::invalid_argument("traveling_wave_profile: R must be finite and nonnegative, v finite");
  if (inner_panels > 0) {
    panels_ = inner_panels;
    log_norm_ = log_mass(panels_);
    return;
  }
  int panels = kBasePanels;
  double prev = log_mass(panels);
  while (panels < kMaxPanels) {
    const double cur = log_mass(2 * panels);
    panels *= 2;
    if (std::abs(cur - prev) <= 1e-11) break;
    prev = cur;
  }
  panels_ = panels;
  log_norm_ = log_mass(panels_);
}

double TravelingWaveProfile::log_unnormalized(double omega, int panels) const {
  const double a = v_ / params_.d_phi;
  const double k = params_.sigma * r_ / params_.d_phi;
  const double base = -k * std::cos(omega + params_.alpha);
  thread_local std::vector<double> buf;
  // U(w + s) - U(w) = a s - k cos(w + s + alpha) + k cos(w + alpha)
  return log_integral_exp([&](double s) { return a * s - k * std::cos(omega + s + params_.alpha) - base; }, 0.0,
                          two_pi, panels, buf);
}

double TravelingWaveProfile::log_mass(int panels) const {
  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(panels) * 8);
  double lmax = -std::numeric_limits<double>::infinity();
  for_each_node(0.0, two_pi, panels, [&](double w, double) {
    logs.push_back(log_unnormalized(w, panels));
    lmax = std::max(lmax, logs.back());
  });
  double sum = 0.0;
  std::size_t i = 0;
  for_each_node(0.0, two_pi, panels, [&](double, double wt) { sum += wt * std::exp(logs[i++] - lmax); });
  return lmax + std::log(sum);
}

double TravelingWaveProfile::log_value(double omega) const { return log_unnormalized(omega, panels_) - log_norm_; }

double TravelingWaveProfile::operator()(double omega) const { return std::exp(log_value(omega)); }

double TravelingWaveProfile::integrate(const std::function<double(double)>& h) const {
  double sum = 0.0;
  for_each_node(0.0, two_pi, panels_, [&](double w, double wt) { sum += wt * std::exp(log_value(w)) * h(w); });
  return sum;
}

TravelingWaveProfile traveling_wave_profile(double r_mag, double v_wave, const ModelParams& params) {
  return TravelingWaveProfile(r_mag, v_wave, params);
}

SceResidual sce_residual(double r_mag, double v_wave, const ModelParams& params, int panels) {
  const TravelingWaveProfile g(r_mag, v_wave, params, panels);
  double c = 0.0, s = 0.0;
  for_each_node(0.0, two_pi, g.panels(), [&](double w, double wt) {
    const double gw = std::exp(g.log_value(w));
    c += wt * gw * std::cos(w);
    s += wt * gw * std::sin(w);
  });
  return {r_mag - c, s};
}

TravelingWaveSolution solve_sce(const ModelParams& params, std::optional<double> r0, std::optional<double> v0,
                                SceOptions options) {
  params.validate();
  if (!(params.d_phi > 0.0)) throw std::invalid_argument("solve_sce: d_phi must be positive");
  TravelingWaveSolution sol;
  sol.params = params;
  double r = r0.value_or(0.5);
  double v = v0.value_or(critical_wave_speed(params));
  if (!(r > 0.0)) throw std::invalid_argument("solve_sce: initial R must be positive");

  // Panels are fixed from the seed so the residual is a smooth function of (R, v).
  const int panels = std::max(TravelingWaveProfile(r, v, params).panels(), 128);
  auto resid = [&](double rr, double vv) { return sce_residual(rr, vv, params, panels); };
  auto norm = [](const SceResidual& x) { return std::hypot(x.cos_part, x.sin_part); };

  auto fail = [&](const std::string& why) {
    std::ostringstream os;
    os.precision(17);
    os << "solve_sce: " << why << " (last iterate R = " << r << ", v = " << v << ")";
    throw std::runtime_error(os.str());
  };

  SceResidual f = resid(r, v);
  for (int it = 0; it <= options.max_iterations; ++it) {
    sol.iterations = it;
    if (r < 1e-6) {
      sol.disordered = true;
      sol.r_mag = 0.0;
      sol.v_wave = v;
      sol.residual = norm(f);
      return sol;
    }
    if (norm(f) <= options.tolerance) {
      sol.r_mag = r;
      sol.v_wave = v;
      sol.residual = norm(f);
      sol.profile.emplace(r, v, params);
      return sol;
    }
    if (it == options.max_iterations) break;

    const double h = options.fd_step;
    const double hr = std::min(h, 0.5 * r);
    const SceResidual rp = resid(r + hr, v), rm = resid(r - hr, v);
    const SceResidual vp = resid(r, v + h), vm = resid(r, v - h);
    const double j11 = (rp.cos_part - rm.cos_part) / (2.0 * hr), j21 = (rp.sin_part - rm.sin_part) / (2.0 * hr);
    const double j12 = (vp.cos_part - vm.cos_part) / (2.0 * h), j22 = (vp.sin_part - vm.sin_part) / (2.0 * h);
    const double det = j11 * j22 - j12 * j21;
    const double scale = std::abs(j11 * j22) + std::abs(j12 * j21);
    if (!(std::abs(det) > 1e-14 * scale) || !std::isfinite(det)) {
      if (r < 1e-3) {
        sol.disordered = true;
        sol.r_mag = 0.0;
        sol.v_wave = v;
        sol.residual = norm(f);
        return sol;
      }
      fail("singular Jacobian");
    }
    const double dr = -(j22 * f.cos_part - j12 * f.sin_part) / det;
    const double dv = -(-j21 * f.cos_part + j11 * f.sin_part) / det;

    // Backtracking: keep R positive and do not let the residual grow.
    double lambda = 1.0;
    for (int k = 0; k < 60; ++k, lambda *= 0.5) {
      const double rn = r + lambda * dr, vn = v + lambda * dv;
      if (!(rn > 0.0)) continue;
      const SceResidual fn = resid(rn, vn);
      if (norm(fn) < norm(f) || k == 59) {
        r = rn;
        v = vn;
        f = fn;
        break;
      }
    }
  }
  fail("iteration cap reached");
  return sol;
}

double hydrodynamic_r_near_transition(const ModelParams& params, double v_wave) {
  const double d = params.d_phi;
  const double gap = std::cos(params.alpha) - 2.0 * d;
  if (!(gap > 0.0) || !(d > 0.0)) return 0.0;
  return std::sqrt((4.0 * d * d + v_wave * v_wave) / d * gap);
}

double r_decay_threshold(const ModelParams& params) {
  if (std::abs(params.alpha) > 0.5 * std::numbers::pi)
    throw std::invalid_argument("r_decay_threshold: requires |alpha| <= pi/2");
  return params.sigma * (std::cos(params.alpha) + 0.5 * std::sin(std::abs(params.alpha)));
}

}  // namespace chiralfv
