#include "localdelay/numerics.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace localdelay {

double lambert_w0(double x) {
  if (std::isnan(x) || x < 0.0) throw std::domain_error("lambert_w0: x must be >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return x;

  const double scale = std::max(1.0, x);
  double w;
  if (x < std::numbers::e) {
    w = std::log1p(x);
  } else {
    const double lx = std::log(x);
    w = lx - std::log(lx);
  }

  // Halley: w <- w - f / (f' - f f'' / (2 f')), f = w e^w - x.
  for (int iter = 0; iter < 100; ++iter) {
    const double ew = std::exp(w);
    const double f = w * ew - x;
    if (std::abs(f) <= 1e-12 * scale) break;
    const double wp1 = w + 1.0;
    const double step = f / (ew * wp1 - (w + 2.0) * f / (2.0 * wp1));
    w -= step;
    if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::abs(w)) break;
  }
  return w;
}

double inv_sinc_c(double delta) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("inv_sinc_c: delta in (0,1)");
  constexpr double pi = std::numbers::pi;
  if (delta < 1e-8) return 1.0 + pi * pi * delta * delta / 6.0;
  // sin(pi d) = sin(pi (1-d)); the smaller argument keeps full relative accuracy near 1.
  const double reduced = delta > 0.5 ? 1.0 - delta : delta;
  return pi * delta / std::sin(pi * reduced);
}

} // namespace localdelay
