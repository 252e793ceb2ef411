#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "pjj/constants.hpp"
#include "pjj/error.hpp"
#include "pjj/numerics/ode.hpp"
#include "pjj/numerics/quadrature.hpp"
#include "pjj/numerics/roots.hpp"

using namespace pjj;
using namespace pjj::numerics;
using Catch::Approx;

namespace {

// y'' = -y as a first-order system; exact solution (cos t, -sin t).
Vec<2> oscillator(double, const Vec<2>& y) { return {y[1], -y[0]}; }

} // namespace

TEST_CASE("dense output reproduces the harmonic oscillator on the sample grid", "[ode]") {
  OdeOptions opts;
  opts.output_dt = 0.05;
  std::vector<double> ts;
  double worst = 0.0;
  integrate_ode<2>(oscillator, Vec<2>{1.0, 0.0}, 0.0, 20.0, opts, [&](double t, const Vec<2>& y) {
    ts.push_back(t);
    worst = std::max({worst, std::abs(y[0] - std::cos(t)), std::abs(y[1] + std::sin(t))});
  });
  REQUIRE(ts.size() == 401);
  CHECK(ts.front() == 0.0);
  CHECK(ts.back() == 20.0);
  for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] > ts[i - 1]);
  CHECK(worst < 1e-8);
}

TEST_CASE("adaptive steps grow past the output spacing", "[ode]") {
  OdeOptions opts;
  opts.rtol = opts.atol = 1e-6;
  opts.output_dt = 1e-3;
  const auto stats = integrate_ode<2>(oscillator, Vec<2>{1.0, 0.0}, 0.0, 10.0, opts, [](double, const Vec<2>&) {});
  CHECK(stats.h_largest > 1e-2);
  CHECK(stats.accepted < 2000);
}

TEST_CASE("fixed-step RK4 converges at fourth order", "[ode]") {
  auto error_at = [](double dt) {
    OdeOptions opts;
    opts.stepper = Stepper::rk4_fixed;
    opts.dt = dt;
    opts.output_dt = 1.0;
    double err = 0.0;
    integrate_ode<2>(oscillator, Vec<2>{1.0, 0.0}, 0.0, 5.0, opts,
                     [&](double t, const Vec<2>& y) { err = std::max(err, std::abs(y[0] - std::cos(t))); });
    return err;
  };
  const double ratio = error_at(0.02) / error_at(0.01);
  CHECK(ratio == Approx(16.0).epsilon(0.05));
}

TEST_CASE("fixed-step RK4 is bit-reproducible", "[ode]") {
  OdeOptions opts;
  opts.stepper = Stepper::rk4_fixed;
  opts.dt = 0.01;
  auto run = [&] {
    std::vector<double> out;
    integrate_ode<2>(oscillator, Vec<2>{0.3, 0.1}, 0.0, 7.0, opts,
                     [&](double, const Vec<2>& y) { out.push_back(y[0]); });
    return out;
  };
  CHECK(run() == run());
}

TEST_CASE("after_step can stop the integration", "[ode]") {
  double last = -1.0;
  integrate_ode<2>(
      oscillator, Vec<2>{1.0, 0.0}, 0.0, 10.0, OdeOptions{}, [&](double t, const Vec<2>&) { last = t; },
      [](double t, Vec<2>&) { return t < 2.0; });
  CHECK(last < 2.5);
}

TEST_CASE("step-size underflow reports the offending time", "[ode]") {
  // y' = 1/(1 - t) blows up at t = 1.
  auto rhs = [](double t, const Vec<1>&) -> Vec<1> { return {1.0 / (1.0 - t)}; };
  try {
    integrate_ode<1>(rhs, Vec<1>{0.0}, 0.0, 2.0, OdeOptions{}, [](double, const Vec<1>&) {});
    FAIL("expected an IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.time() == Approx(1.0).margin(1e-3));
  }
}

TEST_CASE("adaptive Simpson integrates smooth functions", "[quadrature]") {
  CHECK(integrate([](double x) { return std::sin(x); }, 0.0, pi) == Approx(2.0).epsilon(1e-10));
  CHECK(integrate([](double x) { return std::exp(x); }, 0.0, 1.0) == Approx(std::exp(1.0) - 1.0).epsilon(1e-10));
  CHECK(integrate([](double x) { return x * x * x; }, -1.0, 2.0) == Approx(3.75).epsilon(1e-12));
  CHECK(integrate([](double) { return 0.0; }, 0.0, 1.0) == 0.0);
}

TEST_CASE("newton_bisect finds roots and rejects non-brackets", "[roots]") {
  auto f = [](double x) { return x * x - 2.0; };
  auto df = [](double x) { return 2.0 * x; };
  CHECK(newton_bisect(f, df, Bracket{0.0, 2.0}, 1.0) == Approx(std::sqrt(2.0)).epsilon(1e-15));
  // A seed at the bracket edge with zero derivative falls back to bisection.
  CHECK(newton_bisect(f, df, Bracket{0.0, 2.0}, 0.0) == Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(newton_bisect(f, df, Bracket{2.0, 3.0}, 2.5), SolverError);
  CHECK(bisect([](double x) { return std::cos(x); }, Bracket{1.0, 2.0}) == Approx(0.5 * pi).epsilon(1e-14));
}

TEST_CASE("scan_brackets isolates every sign change", "[roots]") {
  const auto b = scan_brackets([](double x) { return std::sin(x); }, 0.5, 10.0, 1000);
  REQUIRE(b.size() == 3);
  for (std::size_t i = 0; i < b.size(); ++i) {
    CHECK(b[i].lo <= (i + 1) * pi);
    CHECK(b[i].hi >= (i + 1) * pi);
  }
}
