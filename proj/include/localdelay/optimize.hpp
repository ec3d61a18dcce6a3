#pragma once

#include <stdexcept>

#include "localdelay/model.hpp"

namespace localdelay {

/// Raised when neither interference nor noise is present, so the
/// objective is monotone and no interior optimum exists.
class DegenerateConfig : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct IntBounds {
  int lo = 1;
  int hi = 1;
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return lo < x && x < hi; }
};

enum class ThetaRegime { NoiseLimited, InterferenceLimited, General };

// Sub-band count.
IntBounds nopt_bounds(const DerivedConstants& k);
int nopt_exact(const DerivedConstants& k);
/// Threshold intensity below which N_opt = 2; nonpositive when unreachable.
double nopt_two_lambda_threshold(const NetworkConfig& config);
bool nopt_is_two(const NetworkConfig& config);

// ALOHA transmit probability.
Interval popt_bounds(const DerivedConstants& k);
double popt_exact(const DerivedConstants& k);

// SINR threshold minimizing the normalized mean delay D / log2(1+theta).
double theta_opt_noise_limited_fhma(const NetworkConfig& config, int n);

struct AlohaNoiseThetaReport {
  double root = 0.0;             // exp(W(1/(r0^a W N0))) - 1, via root finding
  double printed_form = 0.0;     // W(exp(1/(r0^a W N0))) - 1
  double root_residual = 0.0;    // relative residual of (1+t)ln(1+t) = 1/(r0^a W N0)
  double printed_residual = 0.0;
};

double theta_opt_noise_limited_aloha(const NetworkConfig& config);
AlohaNoiseThetaReport theta_opt_noise_limited_aloha_report(const NetworkConfig& config);

/// Interference coefficient b0 of the stationarity equation h(theta) = 0.
double theta_interference_coefficient(const NetworkConfig& config, const MacScheme& scheme);
/// Noise coefficient: r0^alpha W N0 / N (FHMA) or r0^alpha W N0 (ALOHA).
double theta_noise_coefficient(const NetworkConfig& config, const MacScheme& scheme);

/// h(theta) = b0 + c theta^(1-delta) - theta^(1-delta) / ((1+theta) ln(1+theta)).
double theta_stationarity(double theta, double delta, double b0, double c);

/// (b0^(-1/(delta+1)) - 1, b0^(-1/delta)), lower end clamped at 0.
Interval theta_opt_bounds_interference(const NetworkConfig& config, const MacScheme& scheme);

double theta_opt_exact(const NetworkConfig& config, const MacScheme& scheme, ThetaRegime regime);

} // namespace localdelay
