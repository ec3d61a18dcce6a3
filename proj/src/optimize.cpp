#include "localdelay/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <variant>

#include "localdelay/analytic.hpp"
#include "localdelay/numerics.hpp"

namespace localdelay {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_signal(const DerivedConstants& k) {
  if (!(k.a_const > 0.0) && !(k.b_const > 0.0))
    throw DegenerateConfig("no interference and no noise: mean delay is monotone");
}

double noise_product(const NetworkConfig& c) {
  return std::pow(c.r0, c.alpha) * c.bandwidth * c.noise_psd;
}

} // namespace

IntBounds nopt_bounds(const DerivedConstants& k) {
  require_signal(k);
  const double t0 = k.a_const + k.b_const;
  // D(1) is infinite, so N = 1 is never optimal.
  return {std::max(2, static_cast<int>(std::floor(t0))), static_cast<int>(std::ceil(t0)) + 2};
}

int nopt_exact(const DerivedConstants& k) {
  require_signal(k);
  const int last = static_cast<int>(std::ceil(k.a_const + k.b_const)) + 3;
  int best = 2;
  double best_delay = mean_delay_fhma(k, 2);
  for (int n = 3; n <= last; ++n) {
    const double d = mean_delay_fhma(k, n);
    if (d < best_delay) { // ties keep the smaller N
      best = n;
      best_delay = d;
    }
  }
  return best;
}

double nopt_two_lambda_threshold(const NetworkConfig& config) {
  const DerivedConstants k = derive_constants(config);
  const double numer = std::log(1.5) - config.theta * noise_product(config) / 6.0;
  const double denom = k.c_d * std::pow(config.r0, config.dim) * std::pow(config.theta, k.delta) *
                       k.c_delta *
                       (std::pow(2.0, -k.delta) - std::pow(2.0, k.delta - 1.0) * std::pow(3.0, -k.delta));
  return numer / denom;
}

bool nopt_is_two(const NetworkConfig& config) {
  const double numer = std::log(1.5) - config.theta * noise_product(config) / 6.0;
  if (numer <= 0.0) return false;
  return config.lambda < nopt_two_lambda_threshold(config);
}

Interval popt_bounds(const DerivedConstants& k) {
  require_signal(k);
  if (k.a_const == 0.0) return {1.0, 1.0};
  return {1.0 / (k.a_const + 2.0), std::min(1.0, 1.0 / k.a_const)};
}

double popt_exact(const DerivedConstants& k) {
  const Interval br = popt_bounds(k);
  if (k.a_const == 0.0) return 1.0;
  const double a = k.a_const;
  const double delta = k.delta;
  // p * d/dp ln D~(p) = A p (1-p)^(delta-2) (1 - delta p) - 1, increasing in p.
  auto g = [a, delta](double p) {
    return a * p * std::pow(1.0 - p, delta - 2.0) * (1.0 - delta * p) - 1.0;
  };
  constexpr double kEdge = 1e-15;
  double lo = br.lo;
  double hi = std::min(br.hi, 1.0 - kEdge);
  if (!(g(lo) < 0.0)) lo = kEdge;
  if (!(g(hi) > 0.0)) hi = 1.0 - kEdge;
  return find_root(g, RootBracket{lo, hi, 1e-16, 400});
}

double theta_noise_coefficient(const NetworkConfig& config, const MacScheme& scheme) {
  validate(scheme);
  const double c = noise_product(config);
  if (const auto* f = std::get_if<Fhma>(&scheme)) return c / f->n_subbands;
  return c;
}

double theta_interference_coefficient(const NetworkConfig& config, const MacScheme& scheme) {
  validate(scheme);
  const DerivedConstants k = derive_constants(config);
  const double base = config.lambda * k.c_d * std::pow(config.r0, config.dim) * k.delta * k.c_delta;
  if (base == 0.0) return 0.0;
  if (const auto* f = std::get_if<Fhma>(&scheme)) {
    const double n = f->n_subbands;
    if (f->n_subbands == 1) return kInf;
    return base * std::pow(n - 1.0, k.delta - 1.0) * std::pow(n, -k.delta);
  }
  const double p = std::get<Aloha>(scheme).p;
  if (p == 1.0) return kInf;
  return base * p * std::pow(1.0 - p, k.delta - 1.0);
}

double theta_stationarity(double theta, double delta, double b0, double c) {
  const double t1 = std::pow(theta, 1.0 - delta);
  return b0 + c * t1 - t1 / ((1.0 + theta) * std::log1p(theta));
}

double theta_opt_noise_limited_fhma(const NetworkConfig& config, int n) {
  const double c = theta_noise_coefficient(config, Fhma{n});
  if (!(c > 0.0)) throw std::domain_error("theta_opt_noise_limited_fhma: noise term is zero");
  // (1+theta) ln(1+theta) = N / (r0^alpha W N0)  <=>  ln(1+theta) = W(N / (r0^alpha W N0))
  return std::expm1(lambert_w0(1.0 / c));
}

namespace {

double solve_xlogx(double z) {
  // (1+t) ln(1+t) = z on t > 0
  auto f = [z](double t) { return (1.0 + t) * std::log1p(t) - z; };
  const double hi = std::max(1.0, z);
  return find_root(f, RootBracket{0.0, hi, 1e-15 * std::min(1.0, z), 500});
}

double xlogx_residual(double t, double z) {
  return std::abs((1.0 + t) * std::log1p(t) - z) / z;
}

} // namespace

AlohaNoiseThetaReport theta_opt_noise_limited_aloha_report(const NetworkConfig& config) {
  const double c = theta_noise_coefficient(config, Aloha{1.0});
  if (!(c > 0.0)) throw std::domain_error("theta_opt_noise_limited_aloha: noise term is zero");
  const double z = 1.0 / c;
  AlohaNoiseThetaReport r;
  r.root = solve_xlogx(z);
  r.printed_form = lambert_w0(std::exp(z)) - 1.0;
  r.root_residual = xlogx_residual(r.root, z);
  r.printed_residual = r.printed_form > -1.0 ? xlogx_residual(r.printed_form, z) : kInf;
  return r;
}

double theta_opt_noise_limited_aloha(const NetworkConfig& config) {
  return theta_opt_noise_limited_aloha_report(config).root;
}

Interval theta_opt_bounds_interference(const NetworkConfig& config, const MacScheme& scheme) {
  const double b0 = theta_interference_coefficient(config, scheme);
  if (!(b0 > 0.0)) throw DegenerateConfig("theta bounds: no interference (lambda = 0)");
  if (std::isinf(b0)) throw DegenerateConfig("theta bounds: mean delay infinite for every theta");
  const double delta = config.dim / config.alpha;
  return {std::max(0.0, std::pow(b0, -1.0 / (delta + 1.0)) - 1.0), std::pow(b0, -1.0 / delta)};
}

double theta_opt_exact(const NetworkConfig& config, const MacScheme& scheme, ThetaRegime regime) {
  const double delta = config.dim / config.alpha;
  double b0 = theta_interference_coefficient(config, scheme);
  double c = theta_noise_coefficient(config, scheme);
  if (std::isinf(b0) && regime != ThetaRegime::NoiseLimited)
    throw DegenerateConfig("theta_opt: mean delay infinite for every theta");
  switch (regime) {
    case ThetaRegime::InterferenceLimited:
      if (!(b0 > 0.0)) throw DegenerateConfig("theta_opt: interference-limited needs lambda > 0");
      c = 0.0;
      break;
    case ThetaRegime::NoiseLimited:
      if (!(c > 0.0)) throw DegenerateConfig("theta_opt: noise-limited needs W N0 > 0");
      b0 = 0.0;
      break;
    case ThetaRegime::General:
      if (!(b0 > 0.0) && !(c > 0.0)) throw DegenerateConfig("theta_opt: no interference or noise");
      break;
  }

  // Initial bracket from the closed forms; h is increasing, so the root of
  // the combined equation is below both single-term roots.
  double lo = kInf, hi = kInf;
  if (b0 > 0.0) {
    const double lb = std::max(0.0, std::pow(b0, -1.0 / (delta + 1.0)) - 1.0);
    hi = std::pow(b0, -1.0 / delta);
    lo = lb;
  }
  if (c > 0.0) {
    const double t = std::expm1(lambert_w0(1.0 / c));
    hi = std::min(hi, t);
    lo = std::min(lo, t);
  }
  auto h = [=](double t) { return theta_stationarity(t, delta, b0, c); };
  hi *= 1.0 + 1e-9;
  if (!(lo > 0.0) || lo >= hi) lo = 0.5 * hi;
  for (int i = 0; i < 200 && !(h(lo) < 0.0); ++i) lo *= 0.25;
  for (int i = 0; i < 200 && !(h(hi) > 0.0); ++i) hi *= 4.0;
  return find_root(h, RootBracket{lo, hi, 1e-15 * hi, 500});
}

} // namespace localdelay
