#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "pjj/error.hpp"

namespace pjj::numerics {

template <std::size_t N>
using Vec = std::array<double, N>;

enum class Stepper {
  dormand_prince, ///< adaptive embedded 5(4) pair with dense output
  rk4_fixed,      ///< classical fixed-step fourth order, bit-reproducible
};

struct OdeOptions {
  Stepper stepper = Stepper::dormand_prince;
  double rtol = 1e-10;
  double atol = 1e-10;
  /// Step size of the fixed-step scheme.
  double dt = 1e-3;
  /// Spacing of the sampled output grid. For rk4_fixed it is rounded to a multiple of dt.
  double output_dt = 1e-2;
  double h_max = 1.0;
  /// Steps smaller than h_min_rel * max(1, |t|) abort the run.
  double h_min_rel = 1e-13;
  long max_steps = 100'000'000;
  /// Per-component multiplier on rtol; empty means 1 everywhere. A zero weight gives pure
  /// absolute control, for components such as unwrapped phases whose magnitude carries no scale.
  std::vector<double> rtol_weights;
};

struct StepStats {
  long accepted = 0;
  long rejected = 0;
  long rhs_evals = 0;
  double h_smallest = std::numeric_limits<double>::infinity();
  double h_largest = 0.0;
};

namespace detail {

template <std::size_t N>
Vec<N> axpy(const Vec<N>& y, double h, std::initializer_list<std::pair<double, const Vec<N>*>> terms) {
  Vec<N> out = y;
  for (const auto& [coef, k] : terms) {
    if (coef == 0.0) continue;
    for (std::size_t i = 0; i < N; ++i) out[i] += h * coef * (*k)[i];
  }
  return out;
}

} // namespace detail

/// Integrate y' = rhs(t, y) from t0 to t_end.
///
/// `observe(t, y)` receives the solution on the uniform output grid t0, t0 + output_dt, ...,
/// always ending exactly at t_end. `after_step(t, y)` runs after every accepted step and may
/// modify y in place (projection, clamping); returning false stops the integration early.
template <std::size_t N, class Rhs, class Observe, class AfterStep>
StepStats integrate_ode(Rhs&& rhs, Vec<N> y, double t0, double t_end, const OdeOptions& opts,
                        Observe&& observe, AfterStep&& after_step) {
  StepStats stats;
  if (!(t_end > t0)) {
    observe(t0, y);
    return stats;
  }
  const double span = t_end - t0;
  const long n_out = std::max(1L, std::lround(std::ceil(span / opts.output_dt - 1e-9)));

  if (opts.stepper == Stepper::rk4_fixed) {
    const long n_steps = std::max(1L, std::lround(std::ceil(span / opts.dt - 1e-9)));
    const long stride = std::max(1L, std::lround(opts.output_dt / opts.dt));
    const double h = span / static_cast<double>(n_steps);
    observe(t0, y);
    for (long i = 0; i < n_steps; ++i) {
      const double t = t0 + h * static_cast<double>(i);
      const Vec<N> k1 = rhs(t, y);
      const Vec<N> k2 = rhs(t + 0.5 * h, detail::axpy<N>(y, h, {{0.5, &k1}}));
      const Vec<N> k3 = rhs(t + 0.5 * h, detail::axpy<N>(y, h, {{0.5, &k2}}));
      const Vec<N> k4 = rhs(t + h, detail::axpy<N>(y, h, {{1.0, &k3}}));
      for (std::size_t j = 0; j < N; ++j) {
        y[j] += h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
      }
      stats.rhs_evals += 4;
      ++stats.accepted;
      stats.h_smallest = stats.h_largest = h;
      const double t_next = (i + 1 == n_steps) ? t_end : t0 + h * static_cast<double>(i + 1);
      const bool go_on = after_step(t_next, y);
      if ((i + 1) % stride == 0 || i + 1 == n_steps || !go_on) observe(t_next, y);
      if (!go_on) break;
    }
    return stats;
  }

  // Dormand–Prince 5(4) coefficients.
  constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  constexpr double a21 = 1.0 / 5;
  constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                   a54 = -212.0 / 729;
  constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                   a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                   b6 = 11.0 / 84;
  constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                   e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
  constexpr double d1 = -12715105075.0 / 11282082432, d3 = 87487479700.0 / 32700410799,
                   d4 = -10690763975.0 / 1880347072, d5 = 701980252875.0 / 199316789632,
                   d6 = -1453857185.0 / 822651844, d7 = 69997945.0 / 29380423;

  if (!opts.rtol_weights.empty() && opts.rtol_weights.size() != N) {
    throw DomainError("integrate_ode: rtol_weights must have one entry per component");
  }
  auto rtol_of = [&](std::size_t i) { return opts.rtol_weights.empty() ? opts.rtol : opts.rtol * opts.rtol_weights[i]; };
  auto err_norm = [&](const Vec<N>& y0, const Vec<N>& y1, const Vec<N>& e) {
    double acc = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opts.atol + rtol_of(i) * std::max(std::abs(y0[i]), std::abs(y1[i]));
      acc += (e[i] / sc) * (e[i] / sc);
    }
    return std::sqrt(acc / static_cast<double>(N));
  };

  double t = t0;
  Vec<N> k1 = rhs(t, y);
  stats.rhs_evals = 1;

  double h;
  {
    double yn = 0.0, fn = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double sc = opts.atol + rtol_of(i) * std::abs(y[i]);
      yn += (y[i] / sc) * (y[i] / sc);
      fn += (k1[i] / sc) * (k1[i] / sc);
    }
    yn = std::sqrt(yn / N);
    fn = std::sqrt(fn / N);
    h = (yn < 1e-5 || fn < 1e-5) ? 1e-6 : 0.01 * yn / fn;
    h = std::min({h, opts.h_max, span, opts.output_dt});
  }

  long next_out = 1;
  observe(t0, y);
  auto out_time = [&](long k) { return k == n_out ? t_end : t0 + opts.output_dt * k; };

  while (t < t_end) {
    if (stats.accepted + stats.rejected >= opts.max_steps) {
      throw IntegrationError("maximum number of steps exceeded", t);
    }
    bool last = false;
    if (t + h >= t_end) {
      h = t_end - t;
      last = true;
    }
    if (h < opts.h_min_rel * std::max(1.0, std::abs(t))) {
      throw IntegrationError("step-size underflow (h=" + std::to_string(h) + ")", t);
    }

    const Vec<N> k2 = rhs(t + c2 * h, detail::axpy<N>(y, h, {{a21, &k1}}));
    const Vec<N> k3 = rhs(t + c3 * h, detail::axpy<N>(y, h, {{a31, &k1}, {a32, &k2}}));
    const Vec<N> k4 = rhs(t + c4 * h, detail::axpy<N>(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const Vec<N> k5 = rhs(t + c5 * h,
                          detail::axpy<N>(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const Vec<N> k6 = rhs(t + h, detail::axpy<N>(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3},
                                                        {a64, &k4}, {a65, &k5}}));
    const Vec<N> y1 =
        detail::axpy<N>(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    const double t1 = last ? t_end : t + h;
    const Vec<N> k7 = rhs(t1, y1);
    stats.rhs_evals += 6;

    Vec<N> e{};
    for (std::size_t i = 0; i < N; ++i) {
      e[i] = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    }
    bool finite = true;
    for (double v : y1) finite = finite && std::isfinite(v);
    const double err = finite ? err_norm(y, y1, e) : std::numeric_limits<double>::infinity();

    if (err <= 1.0) {
      ++stats.accepted;
      stats.h_smallest = std::min(stats.h_smallest, h);
      stats.h_largest = std::max(stats.h_largest, h);

      // Dense output on [t, t1] for all grid points that fall inside the step.
      while (next_out <= n_out && out_time(next_out) <= t1) {
        const double to = out_time(next_out);
        if (to == t1) break;
        const double th = (to - t) / h;
        const double th1 = 1.0 - th;
        Vec<N> yo{};
        for (std::size_t i = 0; i < N; ++i) {
          const double ydiff = y1[i] - y[i];
          const double bspl = h * k1[i] - ydiff;
          const double r4 = ydiff - h * k7[i] - bspl;
          const double r5 =
              h * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
          yo[i] = y[i] + th * (ydiff + th1 * (bspl + th * (r4 + th1 * r5)));
        }
        observe(to, yo);
        ++next_out;
      }

      t = t1;
      y = y1;
      const bool go_on = after_step(t, y);
      if (next_out <= n_out && out_time(next_out) == t) {
        observe(t, y);
        ++next_out;
      } else if (!go_on) {
        observe(t, y);
      }
      if (!go_on) break;
      // FSAL reuse is only valid while after_step leaves y untouched.
      k1 = (y == y1) ? k7 : rhs(t, y);
      if (y != y1) ++stats.rhs_evals;

      const double fac = (err == 0.0) ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      h = std::min(h * fac, opts.h_max);
    } else {
      ++stats.rejected;
      const double fac = std::isfinite(err) ? std::clamp(0.9 * std::pow(err, -0.2), 0.1, 0.9) : 0.1;
      h *= fac;
    }
  }
  return stats;
}

template <std::size_t N, class Rhs, class Observe>
StepStats integrate_ode(Rhs&& rhs, Vec<N> y, double t0, double t_end, const OdeOptions& opts,
                        Observe&& observe) {
  return integrate_ode<N>(std::forward<Rhs>(rhs), y, t0, t_end, opts,
                          std::forward<Observe>(observe), [](double, Vec<N>&) { return true; });
}

} // namespace pjj::numerics
