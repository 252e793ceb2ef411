#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "pjj/constants.hpp"
#include "pjj/error.hpp"
#include "pjj/mean_field.hpp"

using namespace pjj;
using namespace pjj::mean_field;
using Catch::Approx;

namespace {

// First-order zero crossings of z(t) - offset, linearly interpolated.
std::vector<double> crossings(const Trajectory<JunctionState>& tr, double offset = 0.0) {
  std::vector<double> out;
  for (std::size_t i = 1; i < tr.size(); ++i) {
    const double a = tr.states[i - 1].z - offset, b = tr.states[i].z - offset;
    if ((a < 0.0) != (b < 0.0)) out.push_back(tr.times[i - 1] + (tr.times[i] - tr.times[i - 1]) * a / (a - b));
  }
  return out;
}

double measured_frequency(const Trajectory<JunctionState>& tr) {
  const auto c = crossings(tr);
  REQUIRE(c.size() >= 4);
  return pi * (c.size() - 1) / (c.back() - c.front());
}

} // namespace

TEST_CASE("conservative right-hand side", "[mean_field]") {
  for (double g : {0.0, 0.9, 2.5}) {
    const auto a = rhs_conservative({0.0, 0.0}, g, 0.0);
    CHECK(a.dz == 0.0);
    CHECK(a.dphi == 0.0);
    const auto b = rhs_conservative({0.0, pi}, g, 0.0);
    CHECK(std::abs(b.dz) < 1e-15);
    CHECK(b.dphi == 0.0);
  }
  const auto r = rhs_conservative({0.3, 0.5 * pi}, 1.0, 0.0);
  CHECK(r.dz == Approx(-0.9539392014169457).epsilon(1e-14));
  CHECK(r.dphi == Approx(0.3).epsilon(1e-14));
  CHECK_THROWS_AS(rhs_conservative({1.0, 0.0}, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(rhs_conservative({-1.2, 0.0}, 1.0, 0.0), DomainError);
}

TEST_CASE("junction energy", "[mean_field]") {
  CHECK(hamiltonian({0.0, 0.0}, 1.3, 0.0) == -1.0);
  CHECK(hamiltonian({0.0, pi}, 1.3, 0.0) == Approx(1.0).epsilon(1e-15));
  const double zs = std::sqrt(1.0 - 1.0 / 6.25);
  CHECK(hamiltonian({zs, pi}, 2.5, 0.0) == Approx(1.45).epsilon(1e-14));
  CHECK(hamiltonian({-zs, pi}, 2.5, 0.0) == Approx(1.45).epsilon(1e-14));
  CHECK(hamiltonian({1.0, 0.3}, 2.0, 0.5) == Approx(1.5).epsilon(1e-15));
  CHECK_THROWS_AS(hamiltonian({1.01, 0.0}, 1.0, 0.0), DomainError);
}

TEST_CASE("tunnelling current", "[mean_field]") {
  CHECK(tunneling_current({0.4, 0.0}, 2.0, 100.0) == 0.0);
  CHECK(tunneling_current({1.0, 1.0}, 2.0, 100.0) == 0.0);
  CHECK(tunneling_current({-1.0, 1.0}, 2.0, 100.0) == 0.0);
  CHECK(tunneling_current({0.0, 0.5 * pi}, 1.0, 100.0) == Approx(100.0).epsilon(1e-15));
}

TEST_CASE("wrap_phase", "[mean_field]") {
  CHECK(wrap_phase(0.0) == 0.0);
  CHECK(wrap_phase(-0.5) == Approx(two_pi - 0.5));
  CHECK(wrap_phase(7.0) == Approx(7.0 - two_pi));
  CHECK(wrap_phase(-two_pi) == 0.0);
}

TEST_CASE("equations of motion are Hamiltonian", "[mean_field][property]") {
  std::mt19937_64 rng(20261014);
  std::uniform_real_distribution<double> uz(-0.99, 0.99), uphi(-pi, 3.0 * pi), ug(-3.0, 3.0), ud(-1.0, 1.0);
  const double h = 1e-6;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const JunctionState s{uz(rng), uphi(rng)};
    const double g = ug(rng), D = ud(rng);
    const auto r = rhs_conservative(s, g, D);
    const double dH_dphi = (hamiltonian({s.z, s.phi + h}, g, D) - hamiltonian({s.z, s.phi - h}, g, D)) / (2.0 * h);
    const double dH_dz = (hamiltonian({s.z + h, s.phi}, g, D) - hamiltonian({s.z - h, s.phi}, g, D)) / (2.0 * h);
    worst = std::max({worst, std::abs(r.dz + dH_dphi), std::abs(r.dphi - dH_dz)});
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("energy is conserved by the default integrator", "[mean_field][property]") {
  // The self-trapping family from (0.3, pi) and the contour-plot couplings.
  for (double g : {0.0, 0.5, 0.9, 1.0, 1.02357, 1.04, 1.04828, 1.056, 1.8, 2.5}) {
    const auto tr = integrate({0.3, pi}, g, 0.0, 100.0);
    CHECK(tr.diagnostics.max_energy_drift < 1e-8);
    CHECK(tr.diagnostics.energy_within_tol);
    CHECK_FALSE(tr.diagnostics.guard.has_value());
  }
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> uz(-0.9, 0.9), uphi(0.0, two_pi), ug(0.0, 1.2);
  for (int i = 0; i < 20; ++i) {
    const double z = uz(rng), p = uphi(rng), g = ug(rng);
    const auto tr = integrate({z, p}, g, 0.0, 100.0);
    CHECK(tr.diagnostics.max_energy_drift < 1e-8);
  }
}

TEST_CASE("running-phase orbits at strong coupling drift slightly more", "[mean_field]") {
  // Error per step is held at 1e-10, so the drift grows with the number of steps; at g = 3
  // it reaches the 1e-8 scale over t = 100. Tighter tolerances restore it.
  const auto loose = integrate({0.6, 0.0}, 3.0, 0.1, 100.0);
  CHECK(loose.diagnostics.max_energy_drift < 5e-8);
  IntegrateOptions tight;
  tight.ode.rtol = tight.ode.atol = 1e-12;
  const auto fine = integrate({0.6, 0.0}, 3.0, 0.1, 100.0, tight);
  CHECK(fine.diagnostics.max_energy_drift < 1e-9);
}

TEST_CASE("g = 0 gives exact Rabi oscillation", "[mean_field]") {
  const auto tr = integrate({0.3, pi}, 0.0, 0.0, 30.0);
  double worst = 0.0;
  for (std::size_t i = 0; i < tr.size(); ++i) worst = std::max(worst, std::abs(tr.states[i].z - 0.3 * std::cos(tr.times[i])));
  CHECK(worst < 1e-8);
}

TEST_CASE("trajectory sampling", "[mean_field]") {
  IntegrateOptions opts;
  opts.ode.output_dt = 0.1;
  const auto tr = integrate({0.3, pi}, 0.9, 0.0, 5.05, opts);
  REQUIRE(tr.size() == tr.states.size());
  REQUIRE(tr.size() == tr.diagnostics.energy.size());
  CHECK(tr.times.back() == 5.05);
  for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);
  CHECK_THROWS_AS(integrate({0.3, pi}, 0.9, 0.0, 0.0), DomainError);
}

TEST_CASE("plasma frequency of small pi-phase oscillations", "[mean_field][property]") {
  for (double g : {0.0, 0.3, 0.5, 0.8}) {
    const auto tr = integrate({0.01, pi}, g, 0.0, 200.0);
    CHECK(measured_frequency(tr) == Approx(std::sqrt(1.0 - g)).epsilon(0.01));
  }
}

TEST_CASE("symmetry (phi -> pi - phi, Delta -> -Delta, g -> -g)", "[mean_field][property]") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> uz(-0.8, 0.8), uphi(0.0, two_pi), ug(-2.0, 2.0), ud(-0.5, 0.5);
  for (int i = 0; i < 10; ++i) {
    const double z0 = uz(rng), p0 = uphi(rng), g = ug(rng), D = ud(rng);
    const auto a = integrate({z0, p0}, g, D, 40.0);
    const auto b = integrate({z0, pi - p0}, -g, -D, 40.0);
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      worst = std::max(worst, std::abs(a.states[k].z - b.states[k].z));
      worst = std::max(worst, std::abs(std::sin(a.states[k].phi + b.states[k].phi)));
    }
    CHECK(worst < 1e-6);
  }
}

TEST_CASE("integrated current obeys the population balance", "[mean_field][property]") {
  // Physical time t = tau / 2G; (N_T/2) dz/dt = -I with positive I running from resonator 1 to 2.
  const double G = 3.0, N_T = 200.0;
  IntegrateOptions opts;
  opts.ode.output_dt = 1e-3;
  const auto tr = integrate({0.4, 0.7}, 1.7, 0.2, 10.0, opts);
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < tr.size(); ++i) {
    const double dz_dtau = (tr.states[i + 1].z - tr.states[i - 1].z) / (tr.times[i + 1] - tr.times[i - 1]);
    const double lhs = 0.5 * N_T * 2.0 * G * dz_dtau;
    worst = std::max(worst, std::abs(lhs + tunneling_current(tr.states[i], G, N_T)) / (G * N_T));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("damped right-hand side", "[mean_field]") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uz(-0.95, 0.95), uphi(-pi, pi);
  for (int i = 0; i < 100; ++i) {
    const double z = uz(rng), p = uphi(rng);
    const auto c = rhs_conservative({z, p}, 1.3, 0.2);
    const auto d = rhs_damped({z, p, 1.0}, 1.3, 0.2, 0.0);
    CHECK(d.dz == c.dz);
    CHECK(d.dphi == c.dphi);
    CHECK(d.dN == 0.0);
  }
  const auto r = rhs_damped({0.2, 0.5, 0.5}, 1.0, 0.0, 0.1);
  CHECK(r.dN == Approx(-0.05));
  CHECK(r.dz == Approx(-std::sqrt(0.25 - 0.04) * std::sin(0.5) - 0.02));
  CHECK_THROWS_AS(rhs_damped({0.6, 0.0, 0.5}, 1.0, 0.0, 0.1), DomainError);
  CHECK_THROWS_AS(rhs_damped({0.0, 0.0, 0.0}, 1.0, 0.0, 0.1), DomainError);
}

TEST_CASE("time-dependent damped detuning", "[mean_field]") {
  beam::EffectiveParams e;
  e.G = 2.0;
  e.Delta0 = 0.4;
  e.lambda1 = 0.03;
  e.lambda2 = 0.01;
  e.N_T = 100.0;
  const auto d = Detuning::from_effective(e);
  CHECK(d.time_dependent());
  CHECK(d.at(0.0, 0.01) == Approx(beam::to_dimensionless(e).Delta).epsilon(1e-14));
  CHECK(d.at(50.0, 0.01) == Approx((-0.4 + (50.0 * std::exp(-0.5) + 1.0) * 0.02) / 4.0).epsilon(1e-14));
  e.lambda2 = e.lambda1;
  const auto flat = Detuning::from_effective(e);
  CHECK_FALSE(flat.time_dependent());
  CHECK(flat.at(123.0, 0.5) == Approx(-0.4 / 4.0).epsilon(1e-14));
  CHECK(Detuning::constant(0.3).at(10.0, 1.0) == 0.3);
}

TEST_CASE("damped total number decays exponentially", "[mean_field][property]") {
  for (double g : {0.0, 0.9, 1.04828, 3.0}) {
    for (double kappa : {1e-3, 0.05}) {
      const auto tr = integrate_damped({0.3, pi, 1.0}, DampedParams{g, kappa, Detuning::constant(0.0)}, 300.0);
      double worst = 0.0;
      for (std::size_t i = 0; i < tr.size(); ++i) {
        const double ref = std::exp(-kappa * tr.times[i]);
        worst = std::max(worst, std::abs(tr.states[i].N - ref) / ref);
        CHECK(std::abs(tr.states[i].z) <= tr.states[i].N);
        if (i > 0) CHECK(tr.states[i].N <= tr.states[i - 1].N);
      }
      CHECK(worst < 1e-9);
    }
  }
}

TEST_CASE("zero damping reproduces the conservative trajectory", "[mean_field]") {
  const auto a = integrate({0.3, pi}, 1.04, 0.1, 50.0);
  const auto b = integrate_damped({0.3, pi, 1.0}, DampedParams{1.04, 0.0, Detuning::constant(0.1)}, 50.0);
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a.states[i].z - b.states[i].z));
  CHECK(worst < 1e-8);
  CHECK(b.diagnostics.max_energy_drift < 1e-8);
}

TEST_CASE("guard stops the run instead of regularising", "[mean_field]") {
  IntegrateOptions opts;
  std::optional<GuardEvent> ev;
  double z = 1.0 - 1e-13;
  CHECK_FALSE(detail::apply_guard(2.5, z, 1.0, opts, ev));
  REQUIRE(ev.has_value());
  CHECK(ev->time == 2.5);
  CHECK(z == 1.0 * (1.0 - opts.guard));
  double escaped = 1.0 + 1e-6;
  CHECK_THROWS_AS(detail::apply_guard(1.0, escaped, 1.0, opts, ev), IntegrationError);
  double inside = 0.5;
  CHECK(detail::apply_guard(1.0, inside, 1.0, opts, ev));
}

TEST_CASE("self-trapping thresholds", "[mean_field]") {
  CHECK(critical_g(0.3, pi) == Approx(1.023573301845652).epsilon(1e-14));
  CHECK(std::abs(critical_g(0.3, pi) - 1.02357) < 1e-5);
  CHECK(critical_g(1.0, pi) == Approx(2.0).epsilon(1e-15));
  CHECK(critical_g(0.3, 0.0) == Approx(43.42087114259879).epsilon(1e-14));
  CHECK(std::isinf(critical_g(0.0, pi)));
  CHECK(stationary_g_s(0.3) == Approx(1.0482848367219182).epsilon(1e-14));
  CHECK(std::abs(stationary_g_s(0.3) - 1.04828) < 1e-5);
  CHECK(stationary_g_s(0.0) == 1.0);
  CHECK(stationary_g_s(0.6) == Approx(1.25).epsilon(1e-15));
  CHECK_THROWS_AS(stationary_g_s(1.0), DomainError);
  CHECK(pi_phase_imbalance(0.8) == 0.0);
  CHECK(pi_phase_imbalance(stationary_g_s(0.3)) == Approx(0.3).epsilon(1e-14));
  // H_J(z0, phi0; g_cr) sits on the separatrix energy.
  for (double z0 : {0.1, 0.3, 0.7}) {
    for (double p0 : {pi, 2.5, 1.0}) {
      CHECK(std::abs(hamiltonian({z0, p0}, critical_g(z0, p0), 0.0) - 1.0) < 1e-10);
    }
  }
}

TEST_CASE("self-trapping detection on the Rabi side", "[mean_field]") {
  const auto tr = integrate({0.3, pi}, 0.9, 0.0, 200.0);
  const auto r = detect_self_trapping(tr, 0.9);
  CHECK(std::abs(r.mean_z) < 0.02);
  CHECK_FALSE(r.is_mst);
  CHECK(r.type == MstType::None);
  CHECK(r.periods >= 5.0);
}

TEST_CASE("type I self-trapping between g_cr and g_s", "[mean_field]") {
  const auto tr = integrate({0.3, pi}, 1.04, 0.0, 200.0);
  const auto r = detect_self_trapping(tr, 1.04);
  CHECK(r.is_mst);
  CHECK(r.type == MstType::TypeI);
  CHECK(r.mean_z > 0.02);
  CHECK(r.mean_z < r.z_s);
}

TEST_CASE("the g_s run sits on the stationary point", "[mean_field]") {
  const double gs = stationary_g_s(0.3);
  const auto tr = integrate({0.3, pi}, gs, 0.0, 200.0);
  const auto r = detect_self_trapping(tr, gs);
  CHECK(r.variance_z < 1e-4);
  CHECK(r.mean_z == Approx(0.3).margin(1e-6));
  CHECK(r.type == MstType::Boundary);
}

TEST_CASE("MST verdict flips across g_cr", "[mean_field][property]") {
  const double gcr = critical_g(0.3, pi);
  const auto below = detect_self_trapping(integrate({0.3, pi}, 0.98 * gcr, 0.0, 200.0), 0.98 * gcr);
  const auto above = detect_self_trapping(integrate({0.3, pi}, 1.02 * gcr, 0.0, 200.0), 1.02 * gcr);
  CHECK_FALSE(below.is_mst);
  CHECK(above.is_mst);
  // Energetic criterion agrees with the simulation.
  CHECK(hamiltonian({0.3, pi}, 0.98 * gcr, 0.0) < 1.0);
  CHECK(hamiltonian({0.3, pi}, 1.02 * gcr, 0.0) > 1.0);
}

TEST_CASE("type labels on synthetic trajectories", "[mean_field]") {
  auto flat = [](double z) {
    Trajectory<JunctionState> t;
    for (int i = 0; i <= 100; ++i) {
      t.times.push_back(i);
      t.states.push_back({z, pi});
    }
    return t;
  };
  const double g = 2.0, zs = pi_phase_imbalance(2.0);
  CHECK(detect_self_trapping(flat(zs + 0.01), g).type == MstType::TypeII);
  CHECK(detect_self_trapping(flat(zs - 0.01), g).type == MstType::TypeI);
  CHECK(detect_self_trapping(flat(-zs - 0.01), g).type == MstType::TypeII);
  CHECK(detect_self_trapping(flat(zs), g).type == MstType::Boundary);
  CHECK(detect_self_trapping(flat(0.0), g).type == MstType::None);

  Trajectory<JunctionState> short_run;
  for (int i = 0; i < 10; ++i) {
    short_run.times.push_back(i);
    short_run.states.push_back({0.1, 0.0});
  }
  CHECK_THROWS_WITH(detect_self_trapping(short_run, g), Catch::Matchers::ContainsSubstring("too short"));

  // One slow oscillation is not enough to average.
  Trajectory<JunctionState> slow;
  for (int i = 0; i <= 200; ++i) {
    slow.times.push_back(0.1 * i);
    slow.states.push_back({0.3 * std::cos(0.1 * i * 0.2), pi});
  }
  CHECK_THROWS_WITH(detect_self_trapping(slow, g), Catch::Matchers::ContainsSubstring("too short"));
}

TEST_CASE("damped g_s run relaxes to balance", "[mean_field]") {
  IntegrateOptions opts;
  opts.ode.output_dt = 1.0;
  const auto tr = integrate_damped({0.3, pi, 1.0}, DampedParams{stationary_g_s(0.3), 0.001, Detuning::constant(0.0)},
                                   5000.0, opts);
  CHECK(std::abs(tr.states.back().z) < 0.01);
}
