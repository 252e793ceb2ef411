#pragma once

#include <cmath>
#include <sstream>

#include "pjj/error.hpp"

namespace pjj::numerics {

struct QuadratureOptions {
  double rel_tol = 1e-8;
  double abs_floor = 1e-300;
  int max_depth = 40;
};

namespace detail {

template <class F>
double simpson_step(F& f, double a, double b, double fa, double fm, double fb, double whole,
                    double tol, int depth, const QuadratureOptions& opts, int& failures) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth >= opts.max_depth) {
    if (std::abs(delta) > 15.0 * tol) ++failures;
    return left + right + delta / 15.0;
  }
  if (depth > 3 && std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, opts, failures) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, opts, failures);
}

} // namespace detail

/// Adaptive Simpson quadrature with Richardson correction.
///
/// The absolute target is rel_tol times a coarse estimate of the integral of |f|, so the
/// tolerance is relative for sign-definite integrands and stays meaningful when the
/// integral itself is near zero (orthogonality overlaps).
template <class F>
double integrate(F&& f, double a, double b, QuadratureOptions opts = {}) {
  constexpr int coarse = 64;
  double scale = 0.0;
  for (int i = 0; i <= coarse; ++i) {
    scale += std::abs(f(a + (b - a) * i / coarse));
  }
  scale *= std::abs(b - a) / (coarse + 1);
  const double tol = std::max(opts.rel_tol * scale, opts.abs_floor);

  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  int failures = 0;
  const double result = detail::simpson_step(f, a, b, fa, fm, fb, whole, tol, 0, opts, failures);
  if (failures > 0 || !std::isfinite(result)) {
    std::ostringstream os;
    os << "adaptive quadrature on [" << a << ", " << b << "] did not reach tolerance " << tol
       << " (" << failures << " unresolved panels)";
    throw SolverError(os.str());
  }
  return result;
}

} // namespace pjj::numerics
