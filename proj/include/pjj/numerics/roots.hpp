#pragma once

#include <cmath>
#include <sstream>
#include <vector>

#include "pjj/error.hpp"

namespace pjj::numerics {

struct Bracket {
  double lo;
  double hi;
};

struct RootOptions {
  double x_tol = 1e-14;
  double f_tol = 0.0;
  int max_iter = 200;
};

/// Safeguarded Newton iteration inside a sign-changing bracket.
///
/// Newton steps that leave the current bracket (or fail to shrink it fast enough)
/// are replaced by bisection, so convergence is guaranteed for continuous f.
template <class F, class DF>
double newton_bisect(F&& f, DF&& df, Bracket b, double seed, RootOptions opts = {}) {
  double flo = f(b.lo);
  double fhi = f(b.hi);
  if (flo == 0.0) return b.lo;
  if (fhi == 0.0) return b.hi;
  if ((flo > 0.0) == (fhi > 0.0)) {
    std::ostringstream os;
    os << "no sign change on bracket [" << b.lo << ", " << b.hi << "]: f(lo)=" << flo
       << ", f(hi)=" << fhi;
    throw SolverError(os.str());
  }
  double x = (seed > b.lo && seed < b.hi) ? seed : 0.5 * (b.lo + b.hi);
  for (int it = 0; it < opts.max_iter; ++it) {
    const double fx = f(x);
    if (fx == 0.0 || std::abs(fx) < opts.f_tol) return x;
    if ((fx > 0.0) == (flo > 0.0)) {
      b.lo = x;
      flo = fx;
    } else {
      b.hi = x;
    }
    if (b.hi - b.lo < opts.x_tol * std::max(1.0, std::abs(x))) return 0.5 * (b.lo + b.hi);
    const double d = df(x);
    double next = (d != 0.0) ? x - fx / d : b.lo - 1.0;
    if (!(next > b.lo && next < b.hi)) next = 0.5 * (b.lo + b.hi);
    x = next;
  }
  std::ostringstream os;
  os << "Newton/bisection did not converge in " << opts.max_iter << " iterations; final bracket ["
     << b.lo << ", " << b.hi << "]";
  throw SolverError(os.str());
}

/// Plain bisection to machine resolution.
template <class F>
double bisect(F&& f, Bracket b, RootOptions opts = {}) {
  auto no_derivative = [](double) { return 0.0; };
  return newton_bisect(f, no_derivative, b, 0.5 * (b.lo + b.hi), opts);
}

/// Scan [lo, hi] on a uniform grid and return every sub-interval with a sign change.
template <class F>
std::vector<Bracket> scan_brackets(F&& f, double lo, double hi, int samples) {
  std::vector<Bracket> out;
  double x_prev = lo;
  double f_prev = f(lo);
  for (int i = 1; i <= samples; ++i) {
    const double x = lo + (hi - lo) * static_cast<double>(i) / samples;
    const double fx = f(x);
    if (f_prev == 0.0) {
      out.push_back({x_prev, x_prev});
    } else if ((f_prev > 0.0) != (fx > 0.0) && fx != 0.0) {
      out.push_back({x_prev, x});
    }
    x_prev = x;
    f_prev = fx;
  }
  if (f_prev == 0.0) out.push_back({x_prev, x_prev});
  return out;
}

} // namespace pjj::numerics
