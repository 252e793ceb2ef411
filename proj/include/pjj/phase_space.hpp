#pragma once

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "pjj/constants.hpp"
#include "pjj/error.hpp"
#include "pjj/mean_field.hpp"
#include "pjj/numerics/roots.hpp"

namespace pjj::phase_space {

enum class Kind { Minimum, Maximum, Saddle, Boundary };

inline const char* to_string(Kind k) {
  switch (k) {
  case Kind::Minimum: return "Minimum";
  case Kind::Maximum: return "Maximum";
  case Kind::Saddle: return "Saddle";
  case Kind::Boundary: return "Boundary";
  }
  return "?";
}

struct FixedPoint {
  double z_s = 0.0;
  double phi_s = 0.0; ///< representative in [0, 2 pi); the 2 pi n copies are implied
  Kind kind = Kind::Boundary;
  double energy = 0.0;
};

/// Analytic gradient (dH/dz, dH/dphi) of H_J.
inline std::array<double, 2> gradient(double z, double phi, double g, double Delta) {
  const double root = std::sqrt(1.0 - z * z);
  return {Delta + g * z + z * std::cos(phi) / root, root * std::sin(phi)};
}

/// Analytic Hessian [[H_zz, H_zphi], [H_zphi, H_phiphi]] of H_J.
inline std::array<double, 3> hessian(double z, double phi, double g) {
  const double one_minus = 1.0 - z * z;
  const double root = std::sqrt(one_minus);
  return {g + std::cos(phi) / (one_minus * root), -z * std::sin(phi) / root, root * std::cos(phi)};
}

inline constexpr double boundary_eigen_tol = 1e-8;
inline constexpr double stationarity_tol = 1e-8;

/// Kind of a stationary point from the signs of the Hessian eigenvalues.
inline Kind classify(double z_s, double phi_s, double g, double Delta) {
  if (!(std::abs(z_s) < 1.0)) throw DomainError("classify: |z_s| must be < 1");
  const auto grad = gradient(z_s, phi_s, g, Delta);
  if (std::hypot(grad[0], grad[1]) > stationarity_tol) {
    throw DomainError("classify: point is not stationary (|grad H| = " +
                      std::to_string(std::hypot(grad[0], grad[1])) + ")");
  }
  const auto [a, b, c] = hessian(z_s, phi_s, g);
  const double mean = 0.5 * (a + c);
  const double rad = std::hypot(0.5 * (a - c), b);
  const double e1 = mean - rad;
  const double e2 = mean + rad;
  if (std::abs(e1) < boundary_eigen_tol || std::abs(e2) < boundary_eigen_tol) return Kind::Boundary;
  if (e1 > 0.0) return Kind::Minimum;
  if (e2 < 0.0) return Kind::Maximum;
  return Kind::Saddle;
}

namespace detail {

// z (g +/- 1/sqrt(1 - z^2)) + Delta for the zero-phase (+) and pi-phase (-) branches.
inline double branch_residual(double z, double g, double Delta, double sign) {
  return z * (g + sign / std::sqrt(1.0 - z * z)) + Delta;
}

inline std::vector<double> branch_roots(double g, double Delta, double sign) {
  constexpr int scan = 1000;
  constexpr double edge = 1e-12;
  auto f = [=](double z) { return branch_residual(z, g, Delta, sign); };
  std::vector<double> roots;
  for (const auto& b : numerics::scan_brackets(f, -1.0 + edge, 1.0 - edge, scan)) {
    roots.push_back(b.lo == b.hi ? b.lo : numerics::bisect(f, b));
  }
  return roots;
}

} // namespace detail

/// All stationary points with phi_s in {0, pi}.
///
/// Delta = 0 uses the closed form (z_s = 0 on both branches, plus z_s = +/- sqrt(1 - g^-2) at
/// phi = pi when g > 1). Delta != 0 scans each branch equation for sign changes; the
/// Hessian classification in that case goes beyond the symmetric analysis.
inline std::vector<FixedPoint> fixed_points(double g, double Delta) {
  if (!std::isfinite(Delta) || !std::isfinite(g)) throw DomainError("fixed_points: non-finite input");
  std::vector<FixedPoint> out;
  auto push = [&](double z, double phi) {
    FixedPoint fp;
    fp.z_s = z;
    fp.phi_s = phi;
    fp.energy = mean_field::hamiltonian({z, phi}, g, Delta);
    fp.kind = classify(z, phi, g, Delta);
    out.push_back(fp);
  };
  if (Delta == 0.0) {
    push(0.0, 0.0);
    push(0.0, pi);
    if (g > 1.0) {
      const double zs = mean_field::pi_phase_imbalance(g);
      push(-zs, pi);
      push(zs, pi);
    }
    // Same closed form covers g < -1 on the zero-phase branch by the phi -> pi - phi symmetry.
    if (g < -1.0) {
      const double zs = std::sqrt(1.0 - 1.0 / (g * g));
      push(-zs, 0.0);
      push(zs, 0.0);
    }
    return out;
  }
  for (double z : detail::branch_roots(g, Delta, +1.0)) push(z, 0.0);
  for (double z : detail::branch_roots(g, Delta, -1.0)) push(z, pi);
  return out;
}

struct EnergyGrid {
  std::vector<double> z_axis;
  std::vector<double> phi_axis;
  std::vector<double> values; ///< row-major, values[i * phi_axis.size() + j] = H_J(z_i, phi_j)
  double g = 0.0;
  double Delta = 0.0;

  double at(std::size_t i, std::size_t j) const { return values[i * phi_axis.size() + j]; }
};

/// H_J sampled on a uniform grid over z in [-1, 1], phi in [0, 2 pi].
inline EnergyGrid energy_grid(double g, double Delta, int nz, int nphi) {
  if (nz < 2 || nphi < 2) throw DomainError("energy_grid: nz and nphi must be >= 2");
  EnergyGrid grid;
  grid.g = g;
  grid.Delta = Delta;
  grid.z_axis.resize(static_cast<std::size_t>(nz));
  grid.phi_axis.resize(static_cast<std::size_t>(nphi));
  for (int i = 0; i < nz; ++i) grid.z_axis[i] = -1.0 + 2.0 * i / (nz - 1);
  grid.z_axis.back() = 1.0;
  for (int j = 0; j < nphi; ++j) grid.phi_axis[j] = two_pi * j / (nphi - 1);
  grid.values.resize(grid.z_axis.size() * grid.phi_axis.size());
  for (std::size_t i = 0; i < grid.z_axis.size(); ++i) {
    for (std::size_t j = 0; j < grid.phi_axis.size(); ++j) {
      grid.values[i * grid.phi_axis.size() + j] =
          mean_field::hamiltonian({grid.z_axis[i], grid.phi_axis[j]}, g, Delta);
    }
  }
  return grid;
}

/// Energy of the pi-phase point (0, pi) at Delta = 0; initial data above it self-trap.
inline double separatrix_energy(double g) { return mean_field::hamiltonian({0.0, pi}, g, 0.0); }

} // namespace pjj::phase_space
