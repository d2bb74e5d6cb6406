#pragma once

#include <cmath>
#include <limits>
#include <utility>

namespace hssalt {

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  int evaluations = 0;
  /// Stopped on |f| <= f_tol or a bracket narrower than x_tol (plus rounding).
  bool converged = false;
};

/// Brent's method on a bracket [lo, hi] with f(lo), f(hi) of opposite sign
/// (or one of them zero). Inverse quadratic / secant steps are accepted only
/// while they stay inside the bracket and shrink it fast enough; otherwise
/// the step is a bisection, so convergence is never slower than bisection.
template <typename F>
RootResult brent_root(F&& f, double lo, double hi, double f_lo, double f_hi, double x_tol,
                      double f_tol, int max_evaluations = 200) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  RootResult out;
  if (f_lo == 0.0) return {lo, 0.0, 0, true};
  if (f_hi == 0.0) return {hi, 0.0, 0, true};

  double a = lo, b = hi, c = hi;
  double fa = f_lo, fb = f_hi, fc = f_hi;
  double d = b - a, e = d;
  for (int it = 0; it < max_evaluations; ++it) {
    if ((fb > 0.0 && fc > 0.0) || (fb < 0.0 && fc < 0.0)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol = 2.0 * eps * std::abs(b) + 0.5 * x_tol;
    const double mid = 0.5 * (c - b);
    if (std::abs(mid) <= tol || std::abs(fb) <= f_tol) {
      return {b, fb, out.evaluations, true};
    }
    if (std::abs(e) >= tol && std::abs(fa) > std::abs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * mid * s;
        q = 1.0 - s;
      } else {
        const double qa = fa / fc;
        const double rb = fb / fc;
        p = s * (2.0 * mid * qa * (qa - rb) - (b - a) * (rb - 1.0));
        q = (qa - 1.0) * (rb - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double bound1 = 3.0 * mid * q - std::abs(tol * q);
      const double bound2 = std::abs(e * q);
      if (2.0 * p < std::min(bound1, bound2)) {
        e = d;
        d = p / q;
      } else {
        d = mid;
        e = d;
      }
    } else {
      d = mid;
      e = d;
    }
    a = b;
    fa = fb;
    b += std::abs(d) > tol ? d : std::copysign(tol, mid);
    fb = f(b);
    ++out.evaluations;
    if (std::isnan(fb)) return {b, fb, out.evaluations, false};
  }
  return {b, fb, out.evaluations, false};
}

}  // namespace hssalt
