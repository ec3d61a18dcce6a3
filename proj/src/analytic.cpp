#include "localdelay/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <variant>

namespace localdelay {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_n(int n) {
  if (n < 1) throw std::invalid_argument("FHMA needs n >= 1");
}

void require_p(double p) {
  if (!(p > 0.0 && p <= 1.0)) throw std::invalid_argument("ALOHA needs p in (0, 1]");
}

// V = M2 - D - D^2 with M2 = E[second moment], computed as
// D^2 expm1(ln(M2 / D^2)) - D so the O(N^2) terms cancel analytically.
double variance_from_logs(double log_mean, double log_ratio) {
  if (std::isinf(log_mean) || std::isinf(log_ratio)) return kInf;
  const double d = std::exp(log_mean);
  if (std::isinf(d)) return kInf;
  const double v = d * d * std::expm1(log_ratio) - d;
  if (std::isnan(v)) return kInf;
  return std::max(0.0, v); // rounding can leave -1e-16 when the delay is deterministic
}

} // namespace

double mean_delay_fhma(const DerivedConstants& k, int n) {
  require_n(n);
  const double nn = n;
  if (n == 1) return k.a_const > 0.0 ? kInf : std::exp(k.b_const);
  const double x = k.a_const * std::pow(nn - 1.0, k.delta - 1.0) * std::pow(nn, -k.delta) +
                   k.b_const / nn;
  return nn * std::exp(x);
}

double var_delay_fhma(const DerivedConstants& k, int n) {
  require_n(n);
  const double nn = n;
  if (n == 1 && k.a_const > 0.0) return kInf;
  double x1 = k.b_const / nn;
  double x2 = 2.0 * k.b_const / nn;
  if (n > 1) {
    x1 += k.a_const * std::pow(nn - 1.0, k.delta - 1.0) * std::pow(nn, -k.delta);
    x2 += (2.0 * nn - 1.0 - k.delta) * k.a_const * std::pow(nn, -k.delta) *
          std::pow(nn - 1.0, k.delta - 2.0);
  }
  // M2 = N (N+1) e^{x2}, D = N e^{x1}
  return variance_from_logs(std::log(nn) + x1, std::log1p(1.0 / nn) + x2 - 2.0 * x1);
}

double mean_delay_aloha(const DerivedConstants& k, double p) {
  require_p(p);
  if (p == 1.0) return k.a_const > 0.0 ? kInf : std::exp(k.b_const);
  const double x = p * k.a_const * std::pow(1.0 - p, k.delta - 1.0) + k.b_const;
  return std::exp(x) / p;
}

double var_delay_aloha(const DerivedConstants& k, double p) {
  require_p(p);
  if (p == 1.0 && k.a_const > 0.0) return kInf;
  double x1 = k.b_const;
  double x2 = 2.0 * k.b_const;
  if (p < 1.0) {
    x1 += p * k.a_const * std::pow(1.0 - p, k.delta - 1.0);
    x2 += (2.0 - p - k.delta * p) * p * k.a_const * std::pow(1.0 - p, k.delta - 2.0);
  }
  // M2 = (2/p^2) e^{x2}, D = e^{x1} / p
  return variance_from_logs(x1 - std::log(p), std::numbers::ln2 + x2 - 2.0 * x1);
}

namespace {

struct BoundedTerms {
  double delta, c_delta, c_d;
  double shifted_gain; // theta (r0^alpha + eps)
  double kernel;       // N eps + (N-1) theta (r0^alpha + eps)
};

BoundedTerms bounded_terms(const NetworkConfig& c, int n) {
  require_n(n);
  const DerivedConstants k = derive_constants(c);
  BoundedTerms t;
  t.delta = k.delta;
  t.c_d = k.c_d;
  t.c_delta = k.c_delta;
  t.shifted_gain = c.theta * (std::pow(c.r0, c.alpha) + c.epsilon);
  t.kernel = n * c.epsilon + (n - 1.0) * t.shifted_gain;
  return t;
}

} // namespace

double log_mean_delay_fhma_bounded(const NetworkConfig& c, int n) {
  const BoundedTerms t = bounded_terms(c, n);
  const double nn = n;
  const double noise = t.shifted_gain * c.bandwidth * c.noise_psd / nn;
  if (c.lambda == 0.0) return std::log(nn) + noise;
  if (t.kernel == 0.0) return kInf;
  const double interf = c.lambda * t.c_d * t.shifted_gain * t.c_delta *
                        std::pow(t.kernel, t.delta - 1.0) * std::pow(nn, -t.delta);
  return std::log(nn) + noise + interf;
}

double mean_delay_fhma_bounded(const NetworkConfig& c, int n) {
  return std::exp(log_mean_delay_fhma_bounded(c, n));
}

double var_delay_fhma_bounded(const NetworkConfig& c, int n) {
  const BoundedTerms t = bounded_terms(c, n);
  const double nn = n;
  const double r0a = std::pow(c.r0, c.alpha);
  const double mean_noise = t.shifted_gain * c.bandwidth * c.noise_psd / nn;
  // As published: no epsilon shift in the second-moment noise exponent.
  const double second_noise = 2.0 * c.theta * r0a * c.bandwidth * c.noise_psd / nn;
  if (c.lambda == 0.0)
    return variance_from_logs(std::log(nn) + mean_noise,
                              std::log1p(1.0 / nn) + second_noise - 2.0 * mean_noise);
  if (t.kernel == 0.0) return kInf;
  const double x1 = mean_noise + c.lambda * t.c_d * t.shifted_gain * t.c_delta *
                                     std::pow(t.kernel, t.delta - 1.0) * std::pow(nn, -t.delta);
  const double x2 = second_noise +
                    (2.0 * nn * c.epsilon + (2.0 * nn - 1.0 - t.delta) * t.shifted_gain) *
                        c.lambda * t.c_d * t.shifted_gain * t.c_delta * std::pow(nn, -t.delta) *
                        std::pow(t.kernel, t.delta - 2.0);
  return variance_from_logs(std::log(nn) + x1, std::log1p(1.0 / nn) + x2 - 2.0 * x1);
}

double asymptotic_mean_fhma(const DerivedConstants& k, int n) {
  if (n < 2) throw std::invalid_argument("asymptotic_mean_fhma: n >= 2");
  return n + k.a_const + k.b_const;
}

double asymptotic_var_limit(const DerivedConstants& k) {
  return (2.0 - k.delta) * k.a_const + k.b_const;
}

double ccdf_lower_bound_n1(const DerivedConstants& k, double t) {
  if (!(t > 1.0)) throw std::domain_error("ccdf_lower_bound_n1: t must exceed 1");
  // C0 = c_d lambda theta^delta r0^d = A / C(delta)
  const double c0 = k.a_const / k.c_delta;
  return -std::expm1(-c0 * std::pow(t, -k.delta));
}

TailBound cantelli_tail_bound(const DelayStats& stats, double t0) {
  if (!std::isfinite(stats.mean) || !std::isfinite(stats.variance))
    throw std::invalid_argument("cantelli_tail_bound: stats must be finite");
  TailBound b;
  b.valid = t0 > stats.mean;
  const double gap = t0 - stats.mean;
  const double denom = stats.variance + gap * gap;
  if (denom == 0.0) {
    b.value = 1.0;
    b.valid = false;
    return b;
  }
  b.value = stats.variance / denom;
  return b;
}

DelayStats normalize(const DelayStats& stats, double theta) {
  if (!(theta > 0.0)) throw std::invalid_argument("normalize: theta must be > 0");
  const double ell = std::log2(1.0 + theta);
  return {stats.mean / ell, stats.variance / (ell * ell)};
}

DelayStats delay_stats(const DerivedConstants& k, const MacScheme& scheme) {
  validate(scheme);
  if (const auto* f = std::get_if<Fhma>(&scheme))
    return {mean_delay_fhma(k, f->n_subbands), var_delay_fhma(k, f->n_subbands)};
  const double p = std::get<Aloha>(scheme).p;
  return {mean_delay_aloha(k, p), var_delay_aloha(k, p)};
}

DelayStats delay_stats(const NetworkConfig& config, const MacScheme& scheme) {
  validate(scheme);
  if (config.epsilon > 0.0) {
    const auto* f = std::get_if<Fhma>(&scheme);
    if (f == nullptr)
      throw std::domain_error("delay_stats: bounded path loss closed forms exist for FHMA only");
    return {mean_delay_fhma_bounded(config, f->n_subbands),
            var_delay_fhma_bounded(config, f->n_subbands)};
  }
  return delay_stats(derive_constants(config), scheme);
}

} // namespace localdelay
