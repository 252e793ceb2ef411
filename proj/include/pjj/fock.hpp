#pragma once

// Fixed-N_T two-mode basis. |m> is the J_z eigenstate with m = (n1 - n2) / 2, so
// m = -J ... J with J = N_T / 2. Storage index k = m + J = n1 runs 0 ... N_T; this is
// the only place the map is defined.

#include <cmath>
#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace pjj {

struct FockVector {
  Eigen::VectorXcd amplitudes; ///< amplitudes[k] multiplies |m = k - J>

  FockVector() = default;
  explicit FockVector(int n_total) : amplitudes(Eigen::VectorXcd::Zero(n_total + 1)) {}
  explicit FockVector(Eigen::VectorXcd a) : amplitudes(std::move(a)) {}

  int n_total() const { return static_cast<int>(amplitudes.size()) - 1; }
  double J() const { return 0.5 * n_total(); }

  /// Index k for quantum number m.
  static int index(double m, int n_total) { return static_cast<int>(std::lround(m + 0.5 * n_total)); }
  /// Quantum number m stored at index k.
  static double m_of(int k, int n_total) { return k - 0.5 * n_total; }

  std::complex<double>& operator[](int k) { return amplitudes[k]; }
  const std::complex<double>& operator[](int k) const { return amplitudes[k]; }

  double norm() const { return amplitudes.norm(); }

  /// Basis state |m>.
  static FockVector basis(int n_total, double m) {
    FockVector v(n_total);
    const int k = index(m, n_total);
    if (k < 0 || k > n_total) throw std::out_of_range("FockVector::basis: m outside [-J, J]");
    v[k] = 1.0;
    return v;
  }
};

} // namespace pjj
