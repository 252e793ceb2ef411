#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>

#include "pjj/constants.hpp"
#include "pjj/error.hpp"
#include "pjj/mean_field.hpp"
#include "pjj/phase_space.hpp"

using namespace pjj;
using namespace pjj::phase_space;
using Catch::Approx;

namespace {

const FixedPoint* find(const std::vector<FixedPoint>& fps, double z, double phi) {
  for (const auto& f : fps) {
    if (std::abs(f.z_s - z) < 1e-8 && std::abs(f.phi_s - phi) < 1e-8) return &f;
  }
  return nullptr;
}

// Finite-difference Hessian eigenvalue signs of H_J.
Kind fd_kind(double z, double phi, double g, double D) {
  const double h = 1e-5;
  auto H = [&](double a, double b) { return mean_field::hamiltonian({a, b}, g, D); };
  const double hzz = (H(z + h, phi) - 2.0 * H(z, phi) + H(z - h, phi)) / (h * h);
  const double hpp = (H(z, phi + h) - 2.0 * H(z, phi) + H(z, phi - h)) / (h * h);
  const double hzp = (H(z + h, phi + h) - H(z + h, phi - h) - H(z - h, phi + h) + H(z - h, phi - h)) / (4.0 * h * h);
  const double det = hzz * hpp - hzp * hzp;
  if (det < 0.0) return Kind::Saddle;
  return hzz > 0.0 ? Kind::Minimum : Kind::Maximum;
}

} // namespace

TEST_CASE("Rabi-side fixed points", "[phase_space]") {
  const auto fps = fixed_points(0.9, 0.0);
  REQUIRE(fps.size() == 2);
  const auto* mn = find(fps, 0.0, 0.0);
  const auto* mx = find(fps, 0.0, pi);
  REQUIRE(mn);
  REQUIRE(mx);
  CHECK(mn->kind == Kind::Minimum);
  CHECK(mn->energy == Approx(-1.0).margin(1e-12));
  CHECK(mx->kind == Kind::Maximum);
  CHECK(mx->energy == Approx(1.0).margin(1e-12));
}

TEST_CASE("pi-phase bifurcation above g = 1", "[phase_space]") {
  const auto fps = fixed_points(2.5, 0.0);
  REQUIRE(fps.size() == 4);
  CHECK(find(fps, 0.0, 0.0)->kind == Kind::Minimum);
  CHECK(find(fps, 0.0, pi)->kind == Kind::Saddle);
  CHECK(find(fps, 0.0, pi)->energy == Approx(1.0).margin(1e-12));
  for (double s : {-1.0, 1.0}) {
    const auto* p = find(fps, s * 0.916515138991168, pi);
    REQUIRE(p);
    CHECK(p->kind == Kind::Maximum);
    CHECK(p->energy == Approx(1.45).margin(1e-12));
  }
}

TEST_CASE("classification of single points", "[phase_space]") {
  CHECK(classify(0.0, 0.0, 2.5, 0.0) == Kind::Minimum);
  CHECK(classify(0.0, pi, 0.5, 0.0) == Kind::Maximum);
  CHECK(classify(0.0, pi, 1.8, 0.0) == Kind::Saddle);
  CHECK(classify(0.0, pi, 1.0, 0.0) == Kind::Boundary);
  CHECK_THROWS_AS(classify(0.3, 0.2, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(classify(1.0, pi, 1.0, 0.0), DomainError);
}

TEST_CASE("g = 1 is flagged as the bifurcation point", "[phase_space]") {
  const auto fps = fixed_points(1.0, 0.0);
  REQUIRE(fps.size() == 2);
  CHECK(find(fps, 0.0, pi)->kind == Kind::Boundary);
}

TEST_CASE("fixed-point count flips exactly at g = 1", "[phase_space][property]") {
  for (double g : {-0.5, 0.0, 0.3, 0.99, 0.999999, 1.0}) CHECK(fixed_points(g, 0.0).size() == 2);
  for (double g : {1.000001, 1.01, 1.5, 4.0, 100.0}) CHECK(fixed_points(g, 0.0).size() == 4);
}

TEST_CASE("pi-phase branch continuity", "[phase_space][property]") {
  CHECK(mean_field::pi_phase_imbalance(1.0 + 1e-10) < 2e-5);
  double prev = 0.0;
  for (double g : {1.001, 1.01, 1.1, 2.0, 10.0, 1e3, 1e6}) {
    const double z = mean_field::pi_phase_imbalance(g);
    CHECK(z > prev);
    prev = z;
  }
  CHECK(prev == Approx(1.0).margin(1e-9));
}

TEST_CASE("every fixed point is stationary and consistently classified", "[phase_space][property]") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> ug(-3.0, 3.0), ud(-1.5, 1.5);
  int seen = 0;
  for (int i = 0; i < 200; ++i) {
    const double g = ug(rng);
    const double D = (i % 4 == 0) ? 0.0 : ud(rng);
    for (const auto& f : fixed_points(g, D)) {
      ++seen;
      const auto grad = gradient(f.z_s, f.phi_s, g, D);
      CHECK(std::hypot(grad[0], grad[1]) < 1e-10);
      CHECK(f.phi_s >= 0.0);
      CHECK(f.phi_s < two_pi);
      CHECK(f.energy == Approx(mean_field::hamiltonian({f.z_s, f.phi_s}, g, D)).margin(1e-14));
      if (f.kind != Kind::Boundary) CHECK(fd_kind(f.z_s, f.phi_s, g, D) == f.kind);
    }
  }
  CHECK(seen > 400);
}

TEST_CASE("detuned stationary points", "[phase_space]") {
  // Zero-phase branch always has exactly one root; it sits on the side opposite to Delta.
  const auto fps = fixed_points(0.5, 0.3);
  int zero_phase = 0;
  for (const auto& f : fps) {
    if (f.phi_s == 0.0) {
      ++zero_phase;
      CHECK(f.z_s < 0.0);
      CHECK(f.kind == Kind::Minimum);
    }
  }
  CHECK(zero_phase == 1);
  // Strong coupling with weak bias keeps three pi-phase points.
  int pi_phase = 0;
  for (const auto& f : fixed_points(3.0, 0.05)) pi_phase += f.phi_s == pi;
  CHECK(pi_phase == 3);
  CHECK_THROWS_AS(fixed_points(1.0, std::nan("")), DomainError);
}

TEST_CASE("analytic Hessian matches finite differences", "[phase_space]") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uz(-0.9, 0.9), uphi(0.0, two_pi), ug(-2.0, 2.0);
  const double h = 1e-5;
  for (int i = 0; i < 200; ++i) {
    const double z = uz(rng), p = uphi(rng), g = ug(rng);
    const auto a = hessian(z, p, g);
    auto grad = [&](double zz, double pp) { return gradient(zz, pp, g, 0.0); };
    CHECK(a[0] == Approx((grad(z + h, p)[0] - grad(z - h, p)[0]) / (2 * h)).margin(1e-6));
    CHECK(a[1] == Approx((grad(z, p + h)[0] - grad(z, p - h)[0]) / (2 * h)).margin(1e-6));
    CHECK(a[2] == Approx((grad(z, p + h)[1] - grad(z, p - h)[1]) / (2 * h)).margin(1e-6));
  }
}

TEST_CASE("energy grid", "[phase_space]") {
  const auto grid = energy_grid(2.5, 0.0, 201, 101);
  REQUIRE(grid.z_axis.size() == 201);
  REQUIRE(grid.phi_axis.size() == 101);
  REQUIRE(grid.values.size() == 201 * 101);
  CHECK(grid.z_axis.front() == -1.0);
  CHECK(grid.z_axis.back() == 1.0);
  CHECK(grid.phi_axis.back() == Approx(two_pi));
  for (std::size_t j = 0; j < grid.phi_axis.size(); ++j) {
    CHECK(grid.at(0, j) == Approx(1.25).margin(1e-15));
    CHECK(grid.at(200, j) == Approx(1.25).margin(1e-15));
  }
  for (std::size_t i = 0; i < grid.z_axis.size(); i += 7) {
    for (std::size_t j = 0; j < grid.phi_axis.size(); j += 3) {
      CHECK(grid.at(i, j) == mean_field::hamiltonian({grid.z_axis[i], grid.phi_axis[j]}, 2.5, 0.0));
    }
  }
  CHECK_THROWS_AS(energy_grid(1.0, 0.0, 1, 10), DomainError);

  const auto tilted = energy_grid(1.0, 0.4, 11, 5);
  CHECK(tilted.at(10, 2) == Approx(0.4 + 0.5).margin(1e-15));
  CHECK(tilted.at(0, 2) == Approx(-0.4 + 0.5).margin(1e-15));
}

TEST_CASE("grid extrema approach the stationary energies", "[phase_space]") {
  double prev_gap = 1.0;
  for (int n : {21, 81, 321}) {
    const auto grid = energy_grid(2.5, 0.0, n, n);
    const double lo = *std::min_element(grid.values.begin(), grid.values.end());
    const double hi = *std::max_element(grid.values.begin(), grid.values.end());
    CHECK(lo >= -1.0 - 1e-15);
    CHECK(hi <= 1.45 + 1e-12);
    const double gap = std::abs(hi - 1.45);
    CHECK(gap <= prev_gap);
    prev_gap = gap;
    CHECK(lo == Approx(-1.0).margin(1e-12)); // (0, 0) is a grid node for odd n
  }
  CHECK(prev_gap < 1e-3);
}

TEST_CASE("grid symmetry at zero detuning", "[phase_space][property]") {
  const auto grid = energy_grid(1.7, 0.0, 61, 73);
  const std::size_t nz = grid.z_axis.size(), np = grid.phi_axis.size();
  for (std::size_t i = 0; i < nz; ++i) {
    for (std::size_t j = 0; j < np; ++j) {
      CHECK(grid.at(i, j) == Approx(grid.at(nz - 1 - i, j)).margin(1e-14));
      CHECK(grid.at(i, j) == Approx(grid.at(i, np - 1 - j)).margin(1e-14));
    }
  }
}

TEST_CASE("separatrix energy and the simulated MST boundary", "[phase_space]") {
  for (double g : {0.1, 1.0, 2.5, 10.0}) CHECK(separatrix_energy(g) == Approx(1.0).margin(1e-15));
  const double gcr = mean_field::critical_g(0.3, pi);
  const double g = 0.995 * gcr; // periods lengthen near the separatrix, hence the longer run
  CHECK(mean_field::hamiltonian({0.3, pi}, g, 0.0) < separatrix_energy(g));
  const auto r = mean_field::detect_self_trapping(mean_field::integrate({0.3, pi}, g, 0.0, 600.0), g);
  CHECK_FALSE(r.is_mst);
}
