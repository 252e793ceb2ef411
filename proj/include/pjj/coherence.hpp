#pragma once

// Semiclassical spin picture of the junction: the Schwinger spin J = (Jx, Jy, Jz) scaled by
// N_T/2 lives on the unit sphere, with u = (sin t cos p, sin t sin p, -cos t) for polar
// angle t and azimuth p. The population imbalance is z = u_z = -cos(theta).

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

#include "pjj/constants.hpp"
#include "pjj/error.hpp"
#include "pjj/fock.hpp"
#include "pjj/numerics/ode.hpp"

namespace pjj::coherence {

struct BlochState {
  double theta = 0.5 * pi;
  double phi = 0.0;
};

struct SpinVector {
  double jx = 1.0;
  double jy = 0.0;
  double jz = 0.0;

  double norm() const { return std::sqrt(jx * jx + jy * jy + jz * jz); }
};

inline SpinVector to_spin(const BlochState& b) {
  return {std::sin(b.theta) * std::cos(b.phi), std::sin(b.theta) * std::sin(b.phi), -std::cos(b.theta)};
}

/// Chart read-back; phi in (-pi, pi].
inline BlochState to_bloch(const SpinVector& u) {
  const double n = u.norm();
  const double c = std::clamp(-u.jz / n, -1.0, 1.0);
  return {std::acos(c), std::atan2(u.jy, u.jx)};
}

struct BlochRates {
  double dtheta = 0.0;
  double dphi = 0.0;
};

/// dtheta = -sin phi,  dphi = -g cos theta - cot theta cos phi (rescaled time 2Gt).
inline BlochRates bloch_rhs(const BlochState& s, double g) {
  if (!(s.theta > 0.0 && s.theta < pi)) {
    throw DomainError("bloch_rhs: theta at a pole; use the Cartesian integrator");
  }
  return {-std::sin(s.phi), -g * std::cos(s.theta) - std::cos(s.phi) / std::tan(s.theta)};
}

/// Precession du/dt = grad H x u for H = (g/2) u_z^2 - u_x: the classical limit of
/// (Lambda/2) Jz^2 - 2G Jx, pole-free and equivalent to bloch_rhs away from the poles.
inline SpinVector spin_rhs(const SpinVector& u, double g) {
  return {-g * u.jy * u.jz, u.jz * (1.0 + g * u.jx), -u.jy};
}

struct SpinIntegrateOptions {
  numerics::OdeOptions ode;
  /// | |u| - 1 | above this triggers renormalization, logged in the trajectory.
  double renormalize_tol = 1e-9;
};

struct SpinTrajectory {
  std::vector<double> times;
  std::vector<SpinVector> states;
  std::vector<double> renormalizations; ///< times at which u was projected back onto |u| = 1
  double max_norm_drift = 0.0;
  numerics::StepStats steps;
};

inline SpinTrajectory integrate_cartesian(const SpinVector& s0, double g, double t_end,
                                          const SpinIntegrateOptions& opts = {}) {
  if (std::abs(s0.norm() - 1.0) > 1e-10) throw DomainError("integrate_cartesian: |u0| must be 1");
  if (!(t_end > 0.0)) throw DomainError("integrate_cartesian: t_end must be > 0");
  SpinTrajectory traj;
  auto rhs = [g](double, const numerics::Vec<3>& y) -> numerics::Vec<3> {
    const SpinVector d = spin_rhs({y[0], y[1], y[2]}, g);
    return {d.jx, d.jy, d.jz};
  };
  auto observe = [&](double t, const numerics::Vec<3>& y) {
    const SpinVector u{y[0], y[1], y[2]};
    traj.times.push_back(t);
    traj.states.push_back(u);
    traj.max_norm_drift = std::max(traj.max_norm_drift, std::abs(u.norm() - 1.0));
  };
  auto after = [&](double t, numerics::Vec<3>& y) {
    const double n = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
    if (std::abs(n - 1.0) > opts.renormalize_tol) {
      for (double& v : y) v /= n;
      traj.renormalizations.push_back(t);
    }
    return true;
  };
  traj.steps = numerics::integrate_ode<3>(rhs, numerics::Vec<3>{s0.jx, s0.jy, s0.jz}, 0.0, t_end,
                                          opts.ode, observe, after);
  return traj;
}

/// 2 |<Jx>| / N_T in the semiclassical limit.
inline double fringe_visibility(const SpinVector& u) { return std::abs(u.jx); }
inline double fringe_visibility(const BlochState& b) { return std::abs(std::sin(b.theta) * std::cos(b.phi)); }

/// sin theta cos phi without the absolute value.
inline double signed_visibility(const SpinVector& u) { return u.jx; }
inline double signed_visibility(const BlochState& b) { return std::sin(b.theta) * std::cos(b.phi); }

/// Spin coherent state |theta, phi> in the J_z basis.
///
/// c_k = sqrt(C(N, k)) sin^k(theta/2) cos^(N-k)(theta/2) e^{-i k phi}, k = m + N/2, which is
/// the binomial form with alpha = tan(theta/2) e^{-i phi} multiplied through by
/// cos^N(theta/2). Evaluated in log space, so theta = pi and large N_T need no special case
/// beyond the exactly-zero half-angle factors.
inline FockVector spin_coherent_coefficients(double theta, double phi, int n_total) {
  if (n_total < 1) throw DomainError("spin_coherent_coefficients: N_T must be >= 1");
  if (!(theta >= 0.0 && theta <= pi)) throw DomainError("spin_coherent_coefficients: theta must lie in [0, pi]");
  FockVector v(n_total);
  const double s = std::sin(0.5 * theta);
  const double c = (theta == pi) ? 0.0 : std::cos(0.5 * theta);
  if (s == 0.0) {
    v[0] = 1.0;
    return v;
  }
  if (c == 0.0) {
    v[n_total] = std::polar(1.0, -n_total * phi);
    return v;
  }
  const double ls = std::log(s), lc = std::log(c);
  double log_binom = 0.0; // log C(N, k), accumulated to stay clear of lgamma's global state
  for (int k = 0; k <= n_total; ++k) {
    if (k > 0) log_binom += std::log(static_cast<double>(n_total - k + 1) / k);
    const double log_mag = 0.5 * log_binom + k * ls + (n_total - k) * lc;
    v[k] = std::polar(std::exp(log_mag), -k * phi);
  }
  v.amplitudes /= v.amplitudes.norm();
  return v;
}

} // namespace pjj::coherence
