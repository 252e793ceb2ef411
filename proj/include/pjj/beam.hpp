#pragma once

// Doubly clamped beam: flexural eigenproblem, modal mass, Duffing coefficient, and the
// mapping from two physical resonators to the coefficients of the two-mode
// rotating-frame Hamiltonian.

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pjj/constants.hpp"
#include "pjj/error.hpp"
#include "pjj/numerics/quadrature.hpp"
#include "pjj/numerics/roots.hpp"

namespace pjj::beam {

/// Geometry and material of one doubly clamped resonator. All quantities SI.
struct PhysicalBeam {
  double mu = 0.0;             ///< linear mass density (kg/m)
  double length = 0.0;         ///< L (m)
  double rigidity_ratio = 0.0; ///< K, bending over compressional rigidity (m)
  double linear_modulus = 0.0; ///< I = E A (N)
  std::optional<double> omega0; ///< measured fundamental frequency (rad/s); Omega_1 if absent
  double coupling = 0.0;       ///< G0, inter-beam coupling constant (N/m)
  double damping = 0.0;        ///< kappa0 (rad/s)

  void validate() const {
    auto positive = [](double v, const char* name) {
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw ParameterError(std::string(name) + " must be strictly positive");
      }
    };
    positive(mu, "mu");
    positive(length, "L");
    positive(rigidity_ratio, "K");
    positive(linear_modulus, "linear_modulus");
    if (!(rigidity_ratio < length)) throw ParameterError("slender-beam assumption requires K < L");
    if (omega0 && !(*omega0 > 0.0)) throw ParameterError("omega0 must be strictly positive");
    if (damping < 0.0) throw ParameterError("kappa0 must be non-negative");
  }
};

/// Characteristic residual cos(z) - sech(z); same positive roots as cos(z)cosh(z) = 1
/// without overflowing for large z.
inline double characteristic(double zeta) { return std::cos(zeta) - 1.0 / std::cosh(zeta); }

inline double characteristic_derivative(double zeta) {
  return -std::sin(zeta) + std::tanh(zeta) / std::cosh(zeta);
}

/// First `n_modes` positive roots of cos(z) cosh(z) = 1, increasing.
///
/// Root n lies in [n pi, (n+1) pi], where cos changes sign and sech is negligible; the
/// Newton iteration is seeded at the asymptote (n + 1/2) pi.
inline std::vector<double> solve_eigenvalues(int n_modes, double tol = 1e-12) {
  if (n_modes < 1) throw DomainError("n_modes must be >= 1");
  if (!(tol > 0.0)) throw DomainError("tol must be > 0");
  std::vector<double> roots;
  roots.reserve(static_cast<std::size_t>(n_modes));
  for (int n = 1; n <= n_modes; ++n) {
    const numerics::Bracket b{n * pi, (n + 1) * pi};
    const double seed = (n + 0.5) * pi;
    numerics::RootOptions opts;
    opts.f_tol = 0.01 * tol;
    const double z = numerics::newton_bisect(characteristic, characteristic_derivative, b, seed, opts);
    if (!(std::abs(characteristic(z)) < tol)) {
      std::ostringstream os;
      os << "eigenvalue " << n << " residual " << characteristic(z) << " above tolerance " << tol
         << " on bracket [" << b.lo << ", " << b.hi << "]";
      throw SolverError(os.str());
    }
    roots.push_back(z);
  }
  return roots;
}

/// Unnormalized clamped-clamped mode shape in the scaled coordinate s = x / L.
inline double raw_shape(double zeta, double s) {
  const double a = (std::sin(zeta * s) - std::sinh(zeta * s)) / (std::sin(zeta) - std::sinh(zeta));
  const double b = (std::cos(zeta * s) - std::cosh(zeta * s)) / (std::cos(zeta) - std::cosh(zeta));
  return a - b;
}

/// d raw_shape / ds.
inline double raw_shape_ds(double zeta, double s) {
  const double a = (std::cos(zeta * s) - std::cosh(zeta * s)) / (std::sin(zeta) - std::sinh(zeta));
  const double b = (-std::sin(zeta * s) - std::sinh(zeta * s)) / (std::cos(zeta) - std::cosh(zeta));
  return zeta * (a - b);
}

/// Signed value of the raw shape at its largest-magnitude point, so raw / norm peaks at +1.
inline double shape_normalization(double zeta) {
  constexpr int samples = 4000;
  int best = 0;
  double best_abs = 0.0;
  for (int i = 0; i <= samples; ++i) {
    const double v = std::abs(raw_shape(zeta, static_cast<double>(i) / samples));
    if (v > best_abs) {
      best_abs = v;
      best = i;
    }
  }
  // Golden-section refinement of |raw| on the neighbouring cells.
  double lo = std::max(0.0, (best - 1.0) / samples);
  double hi = std::min(1.0, (best + 1.0) / samples);
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - r * (hi - lo), x2 = lo + r * (hi - lo);
  double f1 = std::abs(raw_shape(zeta, x1)), f2 = std::abs(raw_shape(zeta, x2));
  for (int it = 0; it < 100 && hi - lo > 1e-15; ++it) {
    if (f1 > f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - r * (hi - lo);
      f1 = std::abs(raw_shape(zeta, x1));
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + r * (hi - lo);
      f2 = std::abs(raw_shape(zeta, x2));
    }
  }
  return raw_shape(zeta, 0.5 * (lo + hi));
}

/// Max-normalized eigenmode psi_n(s L).
inline double eigenmode(double zeta, double s) {
  if (s < 0.0 || s > 1.0) throw DomainError("eigenmode: s must lie in [0, 1]");
  return raw_shape(zeta, s) / shape_normalization(zeta);
}

/// A mode together with its cached normalization, for repeated evaluation.
class Eigenmode {
public:
  explicit Eigenmode(double zeta) : zeta_(zeta), norm_(shape_normalization(zeta)) {}

  double zeta() const { return zeta_; }
  /// psi(s L)
  double operator()(double s) const { return raw_shape(zeta_, s) / norm_; }
  /// d psi / ds; divide by L for d psi / dx.
  double ds(double s) const { return raw_shape_ds(zeta_, s) / norm_; }

private:
  double zeta_;
  double norm_;
};

/// \int_0^1 psi(s)^2 ds, the modal mass in units of mu L. `scale` multiplies psi.
inline double mode_mass_fraction(double zeta, double scale = 1.0) {
  const Eigenmode psi(zeta);
  return numerics::integrate([&](double s) { return scale * scale * psi(s) * psi(s); }, 0.0, 1.0);
}

/// m_n = mu \int_0^L psi_n(x)^2 dx.
inline double mode_mass(const PhysicalBeam& beam, double zeta) {
  return beam.mu * beam.length * mode_mass_fraction(zeta);
}

/// Omega_n = sqrt(I K^2 / mu) (zeta_n / L)^2.
inline double mode_frequency(const PhysicalBeam& beam, double zeta) {
  const double k = zeta / beam.length;
  return std::sqrt(beam.linear_modulus * beam.rigidity_ratio * beam.rigidity_ratio / beam.mu) * k * k;
}

/// L * \int_0^L psi_n'(x)^2 dx, the dimensionless stretching integral.
inline double stretching_integral_scaled(double zeta) {
  const Eigenmode psi(zeta);
  return numerics::integrate([&](double s) { return psi.ds(s) * psi.ds(s); }, 0.0, 1.0);
}

struct ModeSolution {
  double zeta = 0.0;
  double effective_mass = 0.0;  ///< kg
  double frequency = 0.0;       ///< Omega_n (rad/s)
  double omega0 = 0.0;          ///< frequency used downstream (beam.omega0 or Omega_1)
  double n11 = 0.0;             ///< \int psi_1'^2 dx (1/m)
  double n11_scaled = 0.0;      ///< n11 * L
  double duffing_lambda0 = 0.0; ///< N/m^3
  /// c0 = lambda0 K^2 / (m omega0^2); approximately 0.060 for the fundamental mode.
  double duffing_coefficient = 0.0;
};

/// lambda0 = N11^2 L^3 mu omega0^2 / (2 zeta^4 K^2), evaluated for an already-solved mode.
inline double duffing_lambda(const PhysicalBeam& beam, const ModeSolution& mode) {
  const double k2 = beam.rigidity_ratio * beam.rigidity_ratio;
  return mode.n11 * mode.n11 * std::pow(beam.length, 3) * beam.mu * mode.omega0 * mode.omega0 /
         (2.0 * std::pow(mode.zeta, 4) * k2);
}

/// Fundamental flexural mode with all derived quantities.
inline ModeSolution fundamental_mode(const PhysicalBeam& beam) {
  beam.validate();
  ModeSolution m;
  m.zeta = solve_eigenvalues(1).front();
  m.effective_mass = mode_mass(beam, m.zeta);
  m.frequency = mode_frequency(beam, m.zeta);
  m.omega0 = beam.omega0.value_or(m.frequency);
  m.n11_scaled = stretching_integral_scaled(m.zeta);
  m.n11 = m.n11_scaled / beam.length;
  m.duffing_lambda0 = duffing_lambda(beam, m);
  m.duffing_coefficient = m.duffing_lambda0 * beam.rigidity_ratio * beam.rigidity_ratio /
                          (m.effective_mass * m.omega0 * m.omega0);
  return m;
}

/// Which quartic energy the Duffing coefficient multiplies.
enum class QuarticConvention {
  quarter_lambda, ///< (lambda0 / 4) X^4, as in the two-resonator Hamiltonian (default)
  full_lambda,    ///< lambda0 X^4, as in the single-beam Duffing form; equals 4x the above
};

struct EffectiveOptions {
  QuarticConvention convention = QuarticConvention::quarter_lambda;
  /// Ratios G/omega0, lambda/omega0, |Delta0|/omega0 above this produce a warning.
  double rwa_warn = 0.01;
  /// Ratios above this reject the parameter set.
  double rwa_reject = 0.1;
};

/// Intermediate quantities for one resonator.
struct ResonatorAudit {
  ModeSolution mode;
  double zero_point = 0.0;       ///< x0 = sqrt(hbar / 2 m omega0) (m)
  double lambda_tilde = 0.0;     ///< pre-RWA quartic coefficient (rad/s)
  double lambda = 0.0;           ///< effective Kerr nonlinearity, 6 lambda_tilde (rad/s)
};

struct RwaRatio {
  std::string name;
  double value = 0.0;
};

struct EffectiveParams {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  double G = 0.0;       ///< coupling rate (rad/s)
  double Delta0 = 0.0;  ///< omega02 - omega01 (rad/s)
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double N_T = 1.0;

  // Audit trail; empty when constructed directly from numbers.
  std::optional<ResonatorAudit> beam1;
  std::optional<ResonatorAudit> beam2;
  double G_tilde = 0.0;
  std::vector<RwaRatio> rwa_ratios;
  std::vector<std::string> warnings;
};

inline ResonatorAudit audit_resonator(const PhysicalBeam& beam, QuarticConvention convention) {
  ResonatorAudit a;
  a.mode = fundamental_mode(beam);
  a.zero_point = std::sqrt(hbar / (2.0 * a.mode.effective_mass * a.mode.omega0));
  const double quartic =
      convention == QuarticConvention::quarter_lambda ? a.mode.duffing_lambda0 : 4.0 * a.mode.duffing_lambda0;
  const double x4 = std::pow(a.zero_point, 4);
  a.lambda_tilde = 0.5 * quartic * x4 / hbar;
  a.lambda = 3.0 * quartic * x4 / hbar;
  return a;
}

/// Two physical resonators plus a total phonon number -> rotating-frame coefficients.
inline EffectiveParams to_effective(const PhysicalBeam& b1, const PhysicalBeam& b2, double N_T,
                                    const EffectiveOptions& opts = {}) {
  if (!(N_T > 0.0)) throw ParameterError("N_T must be positive");
  if (b1.coupling != b2.coupling && b1.coupling != 0.0 && b2.coupling != 0.0) {
    throw ParameterError("beams specify different G0; the coupling constant is shared");
  }
  const double G0 = b1.coupling != 0.0 ? b1.coupling : b2.coupling;

  EffectiveParams p;
  p.beam1 = audit_resonator(b1, opts.convention);
  p.beam2 = audit_resonator(b2, opts.convention);
  p.lambda1 = p.beam1->lambda;
  p.lambda2 = p.beam2->lambda;
  p.G_tilde = G0 * p.beam1->zero_point * p.beam2->zero_point / hbar;
  p.G = 2.0 * p.G_tilde;
  p.Delta0 = p.beam2->mode.omega0 - p.beam1->mode.omega0;
  p.kappa1 = b1.damping;
  p.kappa2 = b2.damping;
  p.N_T = N_T;

  const double w1 = p.beam1->mode.omega0;
  const double w2 = p.beam2->mode.omega0;
  const double w = std::min(w1, w2);
  p.rwa_ratios = {
      {"G/omega0", std::abs(p.G) / w},
      {"lambda1/omega01", p.lambda1 / w1},
      {"lambda2/omega02", p.lambda2 / w2},
      {"|Delta0|/omega0", std::abs(p.Delta0) / w},
  };
  std::ostringstream rejected;
  for (const auto& r : p.rwa_ratios) {
    if (r.value > opts.rwa_reject) {
      rejected << ' ' << r.name << '=' << r.value;
    } else if (r.value > opts.rwa_warn) {
      std::ostringstream os;
      os << "RWA marginal: " << r.name << '=' << r.value << " exceeds " << opts.rwa_warn;
      p.warnings.push_back(os.str());
    }
  }
  if (!rejected.str().empty()) {
    std::ostringstream os;
    os << "rotating-wave approximation violated (threshold " << opts.rwa_reject << "):"
       << rejected.str();
    throw ParameterError(os.str());
  }
  return p;
}

struct DimensionlessParams {
  double g = 0.0;
  double Delta = 0.0;
  double kappa = 0.0;
  double N_T = 1.0;
};

/// g = N_T (lambda1 + lambda2) / 4G, Delta = [-Delta0 + (N_T/2 + 1)(lambda1 - lambda2)] / 2G,
/// kappa = kappa0 / 2G.
inline DimensionlessParams to_dimensionless(const EffectiveParams& e) {
  if (e.G == 0.0) throw ParameterError("uncoupled system: G = 0, rescaled time 2Gt undefined");
  if (e.kappa1 != e.kappa2) {
    std::ostringstream os;
    os << "unequal damping rates kappa1=" << e.kappa1 << ", kappa2=" << e.kappa2
       << "; the damped junction equations assume a common loss rate";
    throw ParameterError(os.str());
  }
  DimensionlessParams d;
  d.N_T = e.N_T;
  d.g = e.N_T * (e.lambda1 + e.lambda2) / (4.0 * e.G);
  d.Delta = (-e.Delta0 + (e.N_T / 2.0 + 1.0) * (e.lambda1 - e.lambda2)) / (2.0 * e.G);
  d.kappa = e.kappa1 / (2.0 * e.G);
  return d;
}

} // namespace pjj::beam
