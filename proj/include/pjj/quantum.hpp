#pragma once

// Exact dynamics of the rotating-frame two-mode Hamiltonian at fixed total phonon number,
//   H = (Lambda/2)(Jz - n0)^2 - 2G Jx,   Lambda = lambda1 + lambda2,
// in the J_z basis of fock.hpp. Energies and rates in rad/s (hbar = 1).

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "pjj/beam.hpp"
#include "pjj/coherence.hpp"
#include "pjj/error.hpp"
#include "pjj/fock.hpp"

namespace pjj::quantum {

struct AngularHamiltonianParams {
  double lambda_sum = 0.0; ///< Lambda = lambda1 + lambda2
  double G = 0.0;
  /// Lambda * n0 = (lambda2 - lambda1)(N_T + 1)/2 + Delta0, finite even when Lambda = 0.
  double bias = 0.0;
  int n_total = 1;

  double J() const { return 0.5 * n_total; }

  /// n0 = bias / Lambda; undefined when Lambda = 0 with a nonzero bias.
  std::optional<double> n0() const {
    if (lambda_sum != 0.0) return bias / lambda_sum;
    if (bias == 0.0) return 0.0;
    return std::nullopt;
  }

  static AngularHamiltonianParams from_rates(double lambda1, double lambda2, double G,
                                             double Delta0, int n_total) {
    if (n_total < 1) throw ParameterError("N_T must be >= 1");
    AngularHamiltonianParams p;
    p.lambda_sum = lambda1 + lambda2;
    p.G = G;
    p.bias = (lambda2 - lambda1) * (n_total + 1) / 2.0 + Delta0;
    p.n_total = n_total;
    return p;
  }

  static AngularHamiltonianParams from_effective(const beam::EffectiveParams& e) {
    const double rounded = std::round(e.N_T);
    if (std::abs(e.N_T - rounded) > 1e-9) {
      throw ParameterError("exact dynamics needs an integer total phonon number");
    }
    return from_rates(e.lambda1, e.lambda2, e.G, e.Delta0, static_cast<int>(rounded));
  }

  /// Lambda from the mean-field nonlinearity, Lambda = 4 G g / N_T.
  static AngularHamiltonianParams from_nonlinearity(double g, double G, int n_total, double n0 = 0.0) {
    if (n_total < 1) throw ParameterError("N_T must be >= 1");
    AngularHamiltonianParams p;
    p.lambda_sum = 4.0 * G * g / n_total;
    p.G = G;
    p.bias = p.lambda_sum * n0;
    p.n_total = n_total;
    return p;
  }

  /// g = N_T Lambda / 4G.
  double nonlinearity() const { return n_total * lambda_sum / (4.0 * G); }
};

/// sqrt(J(J+1) - m(m+1)), the J+ matrix element from index k to k + 1.
inline double ladder(int k, int n_total) {
  const double J = 0.5 * n_total;
  const double m = FockVector::m_of(k, n_total);
  return std::sqrt(std::max(0.0, J * (J + 1.0) - m * (m + 1.0)));
}

struct Tridiagonal {
  Eigen::VectorXd diagonal;
  Eigen::VectorXd off_diagonal; ///< H(k, k+1) = H(k+1, k)

  Eigen::MatrixXd dense() const {
    const auto n = diagonal.size();
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    h.diagonal() = diagonal;
    for (Eigen::Index k = 0; k + 1 < n; ++k) h(k, k + 1) = h(k + 1, k) = off_diagonal[k];
    return h;
  }
};

/// Diagonal (Lambda/2) m^2 - bias m [+ bias^2 / 2 Lambda], off-diagonal -G sqrt(J(J+1) - m(m+1)).
/// With Lambda > 0 the diagonal is exactly (Lambda/2)(m - n0)^2.
inline Tridiagonal build_tridiagonal(const AngularHamiltonianParams& p) {
  if (p.n_total < 1) throw ParameterError("build_hamiltonian: N_T must be >= 1");
  const int n = p.n_total;
  Tridiagonal t;
  t.diagonal.resize(n + 1);
  t.off_diagonal.resize(n);
  const auto n0 = p.n0();
  for (int k = 0; k <= n; ++k) {
    const double m = FockVector::m_of(k, n);
    if (p.lambda_sum != 0.0) {
      const double d = m - *n0;
      t.diagonal[k] = 0.5 * p.lambda_sum * d * d;
    } else {
      t.diagonal[k] = -p.bias * m;
    }
  }
  for (int k = 0; k < n; ++k) t.off_diagonal[k] = -p.G * ladder(k, n);
  return t;
}

inline Eigen::MatrixXd build_hamiltonian(const AngularHamiltonianParams& p) {
  return build_tridiagonal(p).dense();
}

struct Spectrum {
  Eigen::VectorXd energies; ///< ascending
  Eigen::MatrixXd vectors;  ///< columns are eigenvectors
};

inline Spectrum diagonalize(const Eigen::MatrixXd& h) {
  if (h.rows() != h.cols()) throw DomainError("diagonalize: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h);
  if (solver.info() != Eigen::Success) throw SolverError("symmetric eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline Spectrum diagonalize(const Tridiagonal& t) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(t.diagonal, t.off_diagonal);
  if (solver.info() != Eigen::Success) throw SolverError("tridiagonal eigensolver failed");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// e^{-i H t} |psi0> through the eigenbasis; t in physical units of 1/rate.
inline FockVector evolve(const FockVector& psi0, const Spectrum& spec, double t) {
  if (psi0.amplitudes.size() != spec.energies.size()) throw DomainError("evolve: dimension mismatch");
  Eigen::VectorXcd c = spec.vectors.transpose().cast<std::complex<double>>() * psi0.amplitudes;
  for (Eigen::Index i = 0; i < c.size(); ++i) c[i] *= std::polar(1.0, -spec.energies[i] * t);
  return FockVector(Eigen::VectorXcd(spec.vectors.cast<std::complex<double>>() * c));
}

inline FockVector evolve(const FockVector& psi0, const Eigen::MatrixXd& h, double t) {
  return evolve(psi0, diagonalize(h), t);
}

struct Observables {
  double jx = 0.0;
  double jy = 0.0;
  double jz = 0.0;
  double delta_n = 0.0;    ///< standard deviation of Jz
  double visibility = 0.0; ///< 2 |<Jx>| / N_T
};

inline Observables observables(const FockVector& psi) {
  const int n = psi.n_total();
  if (n < 1) throw DomainError("observables: empty state");
  std::complex<double> jplus = 0.0;
  double jz = 0.0, jz2 = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double m = FockVector::m_of(k, n);
    const double w = std::norm(psi[k]);
    jz += w * m;
    jz2 += w * m * m;
    if (k < n) jplus += std::conj(psi[k + 1]) * psi[k] * ladder(k, n);
  }
  Observables o;
  o.jx = jplus.real();
  o.jy = jplus.imag();
  o.jz = jz;
  o.delta_n = std::sqrt(std::max(0.0, jz2 - jz * jz));
  o.visibility = 2.0 * std::abs(o.jx) / n;
  return o;
}

struct GroundState {
  double energy = 0.0;
  FockVector state;
  double gap = 0.0;
  bool degenerate = false;
};

inline GroundState ground_state(const Spectrum& spec) {
  GroundState gs;
  gs.energy = spec.energies[0];
  gs.state = FockVector(Eigen::VectorXcd(spec.vectors.col(0).cast<std::complex<double>>()));
  if (spec.energies.size() > 1) {
    gs.gap = spec.energies[1] - spec.energies[0];
    const double span = spec.energies[spec.energies.size() - 1] - spec.energies[0];
    gs.degenerate = gs.gap < 1e-12 * span;
  }
  return gs;
}

inline GroundState ground_state(const Eigen::MatrixXd& h) { return ground_state(diagonalize(h)); }

/// |<a|b>|^2
inline double fidelity(const FockVector& a, const FockVector& b) {
  return std::norm(a.amplitudes.dot(b.amplitudes));
}

struct FluctuationReport {
  double E_c = 0.0;       ///< lambda1 + lambda2
  double E_j = 0.0;       ///< G N_T
  double E_c_prime = 0.0; ///< E_c + 4 E_j / N_T^2
  double delta_n_analytic = 0.0;
  double delta_phi_analytic = 0.0;
  double delta_n_exact = 0.0;
  double delta_n_rabi = 0.0;      ///< sqrt(N_T) / 2
  double delta_n_josephson = 0.0; ///< (1/sqrt 2)(G N_T / (lambda1 + lambda2))^(1/4); inf if E_c = 0
  double g = 0.0;
};

/// Harmonic (small phase) number and phase fluctuations next to the exact ground-state width.
inline FluctuationReport fluctuation_report(const beam::EffectiveParams& e) {
  if (!(e.G > 0.0)) throw ParameterError("fluctuation_report: G must be > 0");
  if (e.N_T < 2.0) throw ParameterError("fluctuation_report: N_T must be >= 2");
  const auto p = AngularHamiltonianParams::from_effective(e);
  FluctuationReport r;
  r.E_c = e.lambda1 + e.lambda2;
  r.E_j = e.G * e.N_T;
  r.E_c_prime = r.E_c + 4.0 * r.E_j / (e.N_T * e.N_T);
  r.delta_n_analytic = std::pow(r.E_j / r.E_c_prime, 0.25) / std::sqrt(2.0);
  // Defined through the product so that delta_n * delta_phi = 1/2 holds exactly.
  r.delta_phi_analytic = 0.5 / r.delta_n_analytic;
  r.delta_n_exact = observables(ground_state(diagonalize(build_tridiagonal(p))).state).delta_n;
  r.delta_n_rabi = std::sqrt(e.N_T) / 2.0;
  r.delta_n_josephson = r.E_c > 0.0 ? std::pow(e.G * e.N_T / r.E_c, 0.25) / std::sqrt(2.0)
                                    : std::numeric_limits<double>::infinity();
  r.g = e.N_T * r.E_c / (4.0 * e.G);
  return r;
}

struct QuantumSample {
  double t = 0.0; ///< rescaled time 2Gt
  double jx = 0.0; ///< 2<Jx>/N_T
  double jy = 0.0;
  double jz = 0.0; ///< 2<Jz>/N_T, the quantum population imbalance
  double visibility = 0.0;
  double delta_n = 0.0;
};

/// Evolve an arbitrary initial state and sample observables at `samples` uniform rescaled times.
inline std::vector<QuantumSample> observable_trace(const FockVector& psi0, const AngularHamiltonianParams& p,
                                                   double t_end, int samples) {
  if (!(p.G > 0.0)) throw ParameterError("observable_trace: rescaled time needs G > 0");
  if (samples < 2) throw DomainError("observable_trace: samples must be >= 2");
  if (!(t_end > 0.0)) throw DomainError("observable_trace: t_end must be > 0");
  const Spectrum spec = diagonalize(build_tridiagonal(p));
  const Eigen::VectorXcd c0 = spec.vectors.transpose().cast<std::complex<double>>() * psi0.amplitudes;
  const Eigen::MatrixXcd v = spec.vectors.cast<std::complex<double>>();
  std::vector<QuantumSample> out;
  out.reserve(static_cast<std::size_t>(samples));
  const double scale = 2.0 / p.n_total;
  Eigen::VectorXcd c(c0.size());
  for (int i = 0; i < samples; ++i) {
    const double tau = (i + 1 == samples) ? t_end : t_end * i / (samples - 1);
    const double t_phys = tau / (2.0 * p.G);
    for (Eigen::Index j = 0; j < c.size(); ++j) c[j] = c0[j] * std::polar(1.0, -spec.energies[j] * t_phys);
    const auto o = observables(FockVector(Eigen::VectorXcd(v * c)));
    out.push_back({tau, scale * o.jx, scale * o.jy, scale * o.jz, o.visibility, o.delta_n});
  }
  return out;
}

/// Fringe visibility of the evolving (theta0, phi0) coherent state.
inline std::vector<QuantumSample> visibility_trace(double theta0, double phi0, const AngularHamiltonianParams& p,
                                                   double t_end, int samples) {
  return observable_trace(coherence::spin_coherent_coefficients(theta0, phi0, p.n_total), p, t_end, samples);
}

/// Coherent state matching a mean-field initial condition: cos(theta0) = -z0.
inline FockVector coherent_from_imbalance(double z0, double phi0, int n_total) {
  if (std::abs(z0) > 1.0) throw DomainError("coherent_from_imbalance: |z0| > 1");
  return coherence::spin_coherent_coefficients(std::acos(-z0), phi0, n_total);
}

} // namespace pjj::quantum
