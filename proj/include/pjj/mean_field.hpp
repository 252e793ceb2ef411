#pragma once

// Semiclassical two-mode junction: population imbalance z and relative phase phi in
// rescaled time 2Gt, with optional phonon loss.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "pjj/beam.hpp"
#include "pjj/constants.hpp"
#include "pjj/error.hpp"
#include "pjj/numerics/ode.hpp"

namespace pjj::mean_field {

struct JunctionState {
  double z = 0.0;
  double phi = 0.0; ///< unwrapped
};

struct DampedJunctionState {
  double z = 0.0;
  double phi = 0.0;
  double N = 1.0; ///< total phonon number relative to its t = 0 value
};

struct Rates {
  double dz = 0.0;
  double dphi = 0.0;
};

struct DampedRates {
  double dz = 0.0;
  double dphi = 0.0;
  double dN = 0.0;
};

/// phi reduced to [0, 2 pi).
inline double wrap_phase(double phi) {
  double w = std::fmod(phi, two_pi);
  if (w < 0.0) w += two_pi;
  if (w >= two_pi) w = 0.0;
  return w;
}

namespace detail {

inline void require_open_interval(double z, double bound, const char* what) {
  if (!(std::abs(z) < bound)) {
    throw DomainError(std::string(what) + ": |z| = " + std::to_string(std::abs(z)) +
                      " must stay below " + std::to_string(bound));
  }
}

} // namespace detail

/// dz = -sqrt(1 - z^2) sin phi,  dphi = Delta + g z + z cos phi / sqrt(1 - z^2).
///
/// The phase velocity is singular at |z| = 1, so the poles are rejected.
inline Rates rhs_conservative(const JunctionState& s, double g, double Delta) {
  detail::require_open_interval(s.z, 1.0, "rhs_conservative");
  const double root = std::sqrt(1.0 - s.z * s.z);
  return {-root * std::sin(s.phi), Delta + g * s.z + s.z * std::cos(s.phi) / root};
}

/// H_J = Delta z + (g/2) z^2 - sqrt(1 - z^2) cos phi.
inline double hamiltonian(const JunctionState& s, double g, double Delta) {
  if (std::abs(s.z) > 1.0) throw DomainError("hamiltonian: |z| > 1");
  return Delta * s.z + 0.5 * g * s.z * s.z - std::sqrt(1.0 - s.z * s.z) * std::cos(s.phi);
}

/// I = I_c sqrt(1 - z^2) sin phi with I_c = G N_T (phonons per unit physical time).
///
/// Positive current carries phonons from resonator 1 to 2: (N_T/2) dz/dt in physical time
/// equals -I with the equations of motion above.
inline double tunneling_current(const JunctionState& s, double G, double N_T) {
  if (std::abs(s.z) > 1.0) throw DomainError("tunneling_current: |z| > 1");
  return G * N_T * std::sqrt(1.0 - s.z * s.z) * std::sin(s.phi);
}

/// Detuning weight in the damped phase equation.
///
/// Either a constant, or Delta_kappa(t) = [-Delta0 + (N_T e^{-kappa t}/2 + 1)(lambda1 - lambda2)]/2G
/// evaluated from effective parameters (t and kappa rescaled).
class Detuning {
public:
  static Detuning constant(double Delta) {
    Detuning d;
    d.constant_ = Delta;
    return d;
  }

  static Detuning from_effective(const beam::EffectiveParams& e) {
    if (e.G == 0.0) throw ParameterError("uncoupled system: G = 0");
    Detuning d;
    d.effective_ = Coefficients{e.Delta0, e.lambda1 - e.lambda2, e.G, e.N_T};
    return d;
  }

  double at(double t, double kappa) const {
    if (!effective_) return constant_;
    const auto& c = *effective_;
    return (-c.Delta0 + (c.N_T * std::exp(-kappa * t) / 2.0 + 1.0) * c.lambda_diff) / (2.0 * c.G);
  }

  bool time_dependent() const { return effective_.has_value() && effective_->lambda_diff != 0.0; }

private:
  struct Coefficients {
    double Delta0;
    double lambda_diff;
    double G;
    double N_T;
  };
  double constant_ = 0.0;
  std::optional<Coefficients> effective_;
};

/// Damped equations; g is the t = 0 value.
inline DampedRates rhs_damped(const DampedJunctionState& s, double g, double Delta_kappa,
                              double kappa) {
  if (!(s.N > 0.0) || s.N > 1.0 + 1e-12) throw DomainError("rhs_damped: N must lie in (0, 1]");
  detail::require_open_interval(s.z, s.N, "rhs_damped");
  const double root = std::sqrt(s.N * s.N - s.z * s.z);
  return {-root * std::sin(s.phi) - kappa * s.z,
          Delta_kappa + g * s.z + s.z * std::cos(s.phi) / root, -kappa * s.N};
}

inline DampedRates rhs_damped(const DampedJunctionState& s, double g, const Detuning& Delta,
                              double kappa, double t) {
  return rhs_damped(s, g, Delta.at(t, kappa), kappa);
}

/// Energy function for damped states: H_J with sqrt(1 - z^2) replaced by sqrt(N^2 - z^2).
inline double damped_energy(const DampedJunctionState& s, double g, double Delta) {
  return Delta * s.z + 0.5 * g * s.z * s.z - std::sqrt(std::max(0.0, s.N * s.N - s.z * s.z)) * std::cos(s.phi);
}

struct GuardEvent {
  double time = 0.0;
  double z = 0.0;
};

struct Diagnostics {
  std::vector<double> energy; ///< one sample per trajectory point
  numerics::StepStats steps;
  std::optional<GuardEvent> guard;
  double max_energy_drift = 0.0;
  bool energy_within_tol = true;
};

template <class State>
struct Trajectory {
  std::vector<double> times;
  std::vector<State> states;
  Diagnostics diagnostics;

  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
};

struct IntegrateOptions {
  numerics::OdeOptions ode;
  /// Integration stops when |z| exceeds (1 - guard) (times N for damped runs).
  double guard = 1e-12;
  /// Overshoot beyond |z| = 1 that is clamped rather than treated as an error.
  double clamp_slack = 1e-9;
  double energy_tol = 1e-8;
  /// Control the phase error absolutely; the unwrapped phase of a running mode grows without
  /// bound and a relative tolerance on it would loosen as it does.
  bool absolute_phase_tolerance = true;
};

namespace detail {

inline numerics::OdeOptions ode_options(const IntegrateOptions& opts, std::size_t n) {
  numerics::OdeOptions o = opts.ode;
  if (opts.absolute_phase_tolerance && o.rtol_weights.empty()) {
    o.rtol_weights.assign(n, 1.0);
    o.rtol_weights[1] = 0.0;
  }
  return o;
}

inline bool apply_guard(double t, double& z, double bound, const IntegrateOptions& opts,
                        std::optional<GuardEvent>& guard) {
  const double limit = bound * (1.0 - opts.guard);
  if (std::abs(z) <= limit) return true;
  if (std::abs(z) - bound > opts.clamp_slack) {
    throw IntegrationError("|z| left the physical domain (|z| = " + std::to_string(std::abs(z)) + ")", t);
  }
  z = std::copysign(limit, z);
  guard = GuardEvent{t, z};
  return false;
}

} // namespace detail

/// Conservative dynamics from s0 over rescaled time [0, t_end].
inline Trajectory<JunctionState> integrate(const JunctionState& s0, double g, double Delta,
                                           double t_end, const IntegrateOptions& opts = {}) {
  if (!(t_end > 0.0)) throw DomainError("integrate: t_end must be > 0");
  detail::require_open_interval(s0.z, 1.0, "integrate");
  Trajectory<JunctionState> traj;
  auto rhs = [g, Delta](double, const numerics::Vec<2>& y) -> numerics::Vec<2> {
    const double root = std::sqrt(std::max(1.0 - y[0] * y[0], 1e-300));
    return {-root * std::sin(y[1]), Delta + g * y[0] + y[0] * std::cos(y[1]) / root};
  };
  const double e0 = hamiltonian(s0, g, Delta);
  auto observe = [&](double t, const numerics::Vec<2>& y) {
    const JunctionState s{std::clamp(y[0], -1.0, 1.0), y[1]};
    traj.times.push_back(t);
    traj.states.push_back(s);
    const double e = hamiltonian(s, g, Delta);
    traj.diagnostics.energy.push_back(e);
    traj.diagnostics.max_energy_drift = std::max(traj.diagnostics.max_energy_drift, std::abs(e - e0));
  };
  auto after = [&](double t, numerics::Vec<2>& y) {
    return detail::apply_guard(t, y[0], 1.0, opts, traj.diagnostics.guard);
  };
  traj.diagnostics.steps = numerics::integrate_ode<2>(rhs, numerics::Vec<2>{s0.z, s0.phi}, 0.0, t_end,
                                                      detail::ode_options(opts, 2), observe, after);
  traj.diagnostics.energy_within_tol = traj.diagnostics.max_energy_drift < opts.energy_tol;
  return traj;
}

struct DampedParams {
  double g = 0.0;
  double kappa = 0.0;
  Detuning detuning = Detuning::constant(0.0);
};

/// Damped dynamics from s0 (N(0) normally 1) over rescaled time [0, t_end].
inline Trajectory<DampedJunctionState> integrate_damped(const DampedJunctionState& s0,
                                                        const DampedParams& p, double t_end,
                                                        const IntegrateOptions& opts = {}) {
  if (!(t_end > 0.0)) throw DomainError("integrate_damped: t_end must be > 0");
  if (p.kappa < 0.0) throw DomainError("integrate_damped: kappa must be >= 0");
  detail::require_open_interval(s0.z, s0.N, "integrate_damped");
  Trajectory<DampedJunctionState> traj;
  auto rhs = [&p](double t, const numerics::Vec<3>& y) -> numerics::Vec<3> {
    const double root = std::sqrt(std::max(y[2] * y[2] - y[0] * y[0], 1e-300));
    return {-root * std::sin(y[1]) - p.kappa * y[0],
            p.detuning.at(t, p.kappa) + p.g * y[0] + y[0] * std::cos(y[1]) / root, -p.kappa * y[2]};
  };
  auto observe = [&](double t, const numerics::Vec<3>& y) {
    const DampedJunctionState s{std::clamp(y[0], -y[2], y[2]), y[1], y[2]};
    traj.times.push_back(t);
    traj.states.push_back(s);
    traj.diagnostics.energy.push_back(damped_energy(s, p.g, p.detuning.at(t, p.kappa)));
  };
  auto after = [&](double t, numerics::Vec<3>& y) {
    return detail::apply_guard(t, y[0], y[2], opts, traj.diagnostics.guard);
  };
  traj.diagnostics.steps = numerics::integrate_ode<3>(
      rhs, numerics::Vec<3>{s0.z, s0.phi, s0.N}, 0.0, t_end, detail::ode_options(opts, 3), observe, after);
  if (p.kappa == 0.0 && !traj.diagnostics.energy.empty()) {
    const double e0 = traj.diagnostics.energy.front();
    for (double e : traj.diagnostics.energy) {
      traj.diagnostics.max_energy_drift = std::max(traj.diagnostics.max_energy_drift, std::abs(e - e0));
    }
    traj.diagnostics.energy_within_tol = traj.diagnostics.max_energy_drift < opts.energy_tol;
  }
  return traj;
}

// Self-trapping thresholds ----------------------------------------------------------

/// g_cr = [1 + sqrt(1 - z0^2) cos phi0] / (z0^2 / 2); infinite for z0 = 0.
inline double critical_g(double z0, double phi0) {
  if (std::abs(z0) > 1.0) throw DomainError("critical_g: |z0| > 1");
  if (z0 == 0.0) return std::numeric_limits<double>::infinity();
  return (1.0 + std::sqrt(1.0 - z0 * z0) * std::cos(phi0)) / (0.5 * z0 * z0);
}

/// g_s = 1 / sqrt(1 - z0^2): the pi-phase fixed point sits exactly at z0.
inline double stationary_g_s(double z0) {
  if (!(std::abs(z0) < 1.0)) throw DomainError("stationary_g_s: requires |z0| < 1");
  return 1.0 / std::sqrt(1.0 - z0 * z0);
}

/// |z_s| = sqrt(1 - g^-2) of the pi-phase maxima, 0 for g <= 1.
inline double pi_phase_imbalance(double g) {
  return g > 1.0 ? std::sqrt(1.0 - 1.0 / (g * g)) : 0.0;
}

enum class Regime { Rabi, Josephson, Fock };

inline const char* to_string(Regime r) {
  switch (r) {
  case Regime::Rabi: return "Rabi";
  case Regime::Josephson: return "Josephson";
  case Regime::Fock: return "Fock";
  }
  return "?";
}

struct RegimeClassification {
  Regime regime = Regime::Rabi;
  /// g sits on 1 or N_T^2 within relative 1e-12; `regime` then names the lower side.
  bool boundary = false;
};

inline RegimeClassification classify_regime(double g, double N_T) {
  if (!(N_T >= 1.0)) throw DomainError("classify_regime requires N_T >= 1");
  const double upper = N_T * N_T;
  auto near = [](double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(b)); };
  if (near(g, 1.0)) return {Regime::Rabi, true};
  if (near(g, upper)) return {Regime::Josephson, true};
  if (g < 1.0) return {Regime::Rabi, false};
  if (g < upper) return {Regime::Josephson, false};
  return {Regime::Fock, false};
}

inline RegimeClassification classify_regime(const beam::DimensionlessParams& p) {
  return classify_regime(p.g, p.N_T);
}

enum class MstType { None, TypeI, TypeII, Boundary };

inline const char* to_string(MstType t) {
  switch (t) {
  case MstType::None: return "none";
  case MstType::TypeI: return "TypeI";
  case MstType::TypeII: return "TypeII";
  case MstType::Boundary: return "Boundary";
  }
  return "?";
}

struct SelfTrappingOptions {
  double window_fraction = 0.5; ///< trailing share of the trajectory that is averaged
  double mst_threshold = 0.02;  ///< |<z>| above this counts as self-trapped
  /// | |<z>| - |z_s| | below this is reported as the TypeI/TypeII boundary.
  double boundary_tol = 1e-5;
  int min_periods = 5;
  /// Variance of z in the window below this counts as a settled (non-oscillating) run.
  double settled_variance = 1e-8;
};

struct SelfTrappingReport {
  double mean_z = 0.0;
  double variance_z = 0.0;
  double z_s = 0.0;
  double periods = 0.0; ///< oscillation periods seen over the whole trajectory
  bool is_mst = false;
  MstType type = MstType::None;
};

/// Time-averaged imbalance over the trailing window and the resulting self-trapping verdict.
template <class State>
SelfTrappingReport detect_self_trapping(const Trajectory<State>& traj, double g,
                                        const SelfTrappingOptions& opts = {}) {
  if (traj.size() < 16) throw DomainError("detect_self_trapping: trajectory too short");
  const double t0 = traj.times.front();
  const double t1 = traj.times.back();
  const double ts = t1 - opts.window_fraction * (t1 - t0);

  auto z_at = [&](std::size_t i) { return traj.states[i].z; };
  std::size_t first = 0;
  while (first + 1 < traj.size() && traj.times[first + 1] <= ts) ++first;

  // Trapezoidal averages of z and z^2 over [ts, t1], interpolating the left edge.
  double sum = 0.0, sum2 = 0.0;
  {
    const double ta = traj.times[first], tb = traj.times[first + 1];
    const double w = (tb > ta) ? (ts - ta) / (tb - ta) : 0.0;
    double prev_t = ts;
    double prev_z = z_at(first) + w * (z_at(first + 1) - z_at(first));
    for (std::size_t i = first + 1; i < traj.size(); ++i) {
      const double dt = traj.times[i] - prev_t;
      const double zi = z_at(i);
      sum += 0.5 * dt * (prev_z + zi);
      sum2 += 0.5 * dt * (prev_z * prev_z + zi * zi);
      prev_t = traj.times[i];
      prev_z = zi;
    }
  }
  const double span = t1 - ts;
  SelfTrappingReport r;
  r.mean_z = sum / span;
  r.variance_z = std::max(0.0, sum2 / span - r.mean_z * r.mean_z);

  int crossings = 0;
  for (std::size_t i = 1; i < traj.size(); ++i) {
    const double a = z_at(i - 1) - r.mean_z, b = z_at(i) - r.mean_z;
    if ((a < 0.0 && b >= 0.0) || (a >= 0.0 && b < 0.0)) ++crossings;
  }
  r.periods = 0.5 * crossings;
  if (r.periods < opts.min_periods && r.variance_z > opts.settled_variance) {
    throw DomainError("detect_self_trapping: trajectory too short (" + std::to_string(r.periods) +
                      " oscillation periods, need " + std::to_string(opts.min_periods) + ")");
  }

  r.z_s = pi_phase_imbalance(g);
  r.is_mst = std::abs(r.mean_z) > opts.mst_threshold;
  if (r.is_mst) {
    const double diff = std::abs(r.mean_z) - r.z_s;
    if (std::abs(diff) < opts.boundary_tol) r.type = MstType::Boundary;
    else r.type = diff < 0.0 ? MstType::TypeI : MstType::TypeII;
  }
  return r;
}

} // namespace pjj::mean_field
