#pragma once

// Reference solutions of the spatially homogeneous equation.
//
// A traveling wave f(phi, t) = g(phi - v t) with order parameter R (phase
// zero in the co-moving frame) satisfies D g' + (v + sigma R sin(w + alpha)) g = J.
// With U(w) = (v/D) w - (sigma R / D) cos(w + alpha) the periodic solution is
//
//   g(w) = c0 * int_0^{2pi} exp(U(w + s) - U(w)) ds,
//
// which is evaluated in log-shifted form so large sigma R / D cannot overflow.

#include <functional>
#include <optional>
#include <vector>

#include "chiralfv/core.hpp"

namespace chiralfv {

inline double uniform_density() noexcept { return 1.0 / two_pi; }

/// int_a^b h over `panels` equal panels with 8-point Gauss-Legendre each.
double composite_gauss(const std::function<double(double)>& h, double a, double b, int panels);

/// Doubles the panel count (from 64) until two results agree to rel_tol.
double adaptive_gauss(const std::function<double(double)>& h, double a, double b, double rel_tol = 1e-11,
                      int* panels_used = nullptr);

/// I1(kappa) / I0(kappa) for kappa >= 0.
double bessel_ratio(double kappa);

/// exp(-kappa) I0(kappa), finite for large kappa.
double bessel_i0_scaled(double kappa);

struct VonMises {
  double r_mag = 0.0;       // self-consistent R
  double theta_mean = 0.0;  // Theta
  double kappa = 0.0;       // sigma R / D
  double i0_scaled = 1.0;   // I0(kappa) e^{-kappa}
  int iterations = 0;

  double operator()(double phi) const;
};

/// Stationary state of the alpha = 0 problem with mean direction theta_mean.
/// R = 0 (uniform) when D >= sigma / 2.
VonMises von_mises(double theta_mean, const ModelParams& params);

class TravelingWaveProfile {
 public:
  /// inner_panels = 0 picks the panel count adaptively.
  TravelingWaveProfile(double r_mag, double v_wave, const ModelParams& params, int inner_panels = 0);

  double operator()(double omega) const;
  double log_value(double omega) const;

  double r_mag() const noexcept { return r_; }
  double v_wave() const noexcept { return v_; }
  int panels() const noexcept { return panels_; }

  /// int_0^{2pi} g(w) h(w) dw with the profile's quadrature.
  double integrate(const std::function<double(double)>& h) const;

 private:
  double log_unnormalized(double omega, int panels) const;
  double log_mass(int panels) const;

  double r_, v_;
  ModelParams params_;
  int panels_ = 64;
  double log_norm_ = 0.0;
};

TravelingWaveProfile traveling_wave_profile(double r_mag, double v_wave, const ModelParams& params);

struct SceResidual {
  double cos_part;  // R - int g cos w
  double sin_part;  // int g sin w
};

SceResidual sce_residual(double r_mag, double v_wave, const ModelParams& params, int panels = 0);

struct TravelingWaveSolution {
  double r_mag = 0.0;
  double v_wave = 0.0;
  ModelParams params;
  bool disordered = false;
  double residual = 0.0;
  int iterations = 0;
  std::optional<TravelingWaveProfile> profile;  // absent when disordered
};

struct SceOptions {
  double tolerance = 1e-10;
  int max_iterations = 100;
  double fd_step = 1e-6;
};

/// Newton-Raphson on the two self-consistency residuals. Seeds default to
/// (0.5, -(sigma/2) sin alpha). Throws std::runtime_error carrying the last
/// iterate when the Jacobian is singular away from R = 0 or the iteration
/// cap is reached.
TravelingWaveSolution solve_sce(const ModelParams& params, std::optional<double> r0 = std::nullopt,
                                std::optional<double> v0 = std::nullopt, SceOptions options = {});

/// sqrt(((4D^2 + v^2)/D)(cos alpha - 2D)), 0 on the disordered side.
double hydrodynamic_r_near_transition(const ModelParams& params, double v_wave);

/// sigma (cos alpha + sin|alpha| / 2); requires |alpha| <= pi/2.
double r_decay_threshold(const ModelParams& params);

/// D on the order-disorder line: (sigma/2) cos alpha.
inline double transition_d_phi(const ModelParams& params) { return 0.5 * params.sigma * std::cos(params.alpha); }

/// Wave speed on the transition line: -(sigma/2) sin alpha.
inline double critical_wave_speed(const ModelParams& params) { return -0.5 * params.sigma * std::sin(params.alpha); }

}  // namespace chiralfv
