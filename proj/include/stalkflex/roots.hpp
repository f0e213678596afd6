#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

namespace stalkflex::roots {

struct RootResult {
  double x = 0.0;
  double fx = 0.0;
  int iterations = 0;
};

inline bool same_sign(double a, double b) { return (a < 0.0) == (b < 0.0); }

/// Scalar root on a sign-changing bracket [lo, hi].
///
/// Bisects until the bracket is narrower than `bisect_width`, then polishes
/// with secant steps that fall back to bisection whenever a step would leave
/// the current bracket. Polishing stops once |f| <= stop_tolerance or the
/// iterate stops moving at machine precision. The returned point is the best
/// iterate seen; callers decide whether its residual is acceptable.
template <class F>
RootResult bisect_then_secant(F&& f, double lo, double f_lo, double hi, double f_hi, double bisect_width,
                              double stop_tolerance, int max_iterations) {
  RootResult best{lo, f_lo, 0};
  if (std::abs(f_hi) < std::abs(f_lo)) best = {hi, f_hi, 0};
  if (f_lo == 0.0 || f_hi == 0.0) return best;

  int it = 0;
  auto consider = [&](double x, double fx) {
    if (std::abs(fx) < std::abs(best.fx)) best = {x, fx, it};
  };

  while (hi - lo > bisect_width && it < max_iterations) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    ++it;
    consider(mid, f_mid);
    if (f_mid == 0.0) {
      best.iterations = it;
      return best;
    }
    if (same_sign(f_mid, f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }

  const double eps = std::numeric_limits<double>::epsilon();
  double x0 = lo, f0 = f_lo, x1 = hi, f1 = f_hi;
  while (it < max_iterations) {
    if (std::abs(best.fx) <= stop_tolerance) break;
    double x2 = (f1 != f0) ? x1 - f1 * (x1 - x0) / (f1 - f0) : 0.5 * (lo + hi);
    if (!(x2 > lo && x2 < hi)) x2 = 0.5 * (lo + hi);
    const double f2 = f(x2);
    ++it;
    consider(x2, f2);
    if (f2 == 0.0) break;
    if (same_sign(f2, f_lo)) {
      lo = x2;
      f_lo = f2;
    } else {
      hi = x2;
      f_hi = f2;
    }
    const double scale = std::max(1.0, std::abs(x2));
    if (std::abs(x2 - x1) <= 4.0 * eps * scale || hi - lo <= 4.0 * eps * scale) break;
    x0 = x1;
    f0 = f1;
    x1 = x2;
    f1 = f2;
  }
  best.iterations = it;
  return best;
}

}  // namespace stalkflex::roots
