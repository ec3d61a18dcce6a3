#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace localdelay {

class NoSignChange : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MaxIterationsExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RootBracket {
  double lo = 0.0;
  double hi = 1.0;
  double tol = 1e-12;
  int max_iter = 200;
};

/// Principal branch W0 on x >= 0, by Halley iteration.
double lambert_w0(double x);

/// Gamma(1+delta) Gamma(1-delta) = pi delta / sin(pi delta), delta in (0, 1).
double inv_sinc_c(double delta);

/// Brent's method on a sign-changing bracket. Falls back to bisection
/// whenever the interpolated step leaves the bracket or converges slowly,
/// so convergence is never worse than bisection. The result always lies
/// in [lo, hi].
template <class F>
double find_root(F&& f, const RootBracket& bracket) {
  double a = bracket.lo;
  double b = bracket.hi;
  if (!(a < b)) throw std::invalid_argument("find_root: need lo < hi");
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (std::signbit(fa) == std::signbit(fb) || std::isnan(fa) || std::isnan(fb))
    throw NoSignChange("find_root: function does not change sign on bracket");

  double c = b, fc = fb;
  double d = 0.0, e = 0.0;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (int iter = 0; iter < bracket.max_iter; ++iter) {
    if (std::signbit(fb) == std::signbit(fc)) {
      c = a;
      fc = fa;
      d = e = b - a;
    }
    if (std::abs(fc) < std::abs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * eps * std::abs(b) + 0.5 * bracket.tol;
    const double xm = 0.5 * (c - b);
    if (std::abs(xm) <= tol1 || fb == 0.0) return b;
    if (std::abs(e) >= tol1 && std::abs(fa) > std::abs(fb)) {
      double p, q, r;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        q = fa / fc;
        r = fb / fc;
        p = s * (2.0 * xm * q * (q - r) - (b - a) * (r - 1.0));
        q = (q - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::abs(p);
      const double min1 = 3.0 * xm * q - std::abs(tol1 * q);
      const double min2 = std::abs(e * q);
      if (2.0 * p < std::min(min1, min2)) {
        e = d;
        d = p / q;
      } else {
        d = xm;
        e = d;
      }
    } else {
      d = xm;
      e = d;
    }
    a = b;
    fa = fb;
    b += (std::abs(d) > tol1) ? d : std::copysign(tol1, xm);
    fb = f(b);
  }
  throw MaxIterationsExceeded("find_root: iteration limit reached");
}

} // namespace localdelay
