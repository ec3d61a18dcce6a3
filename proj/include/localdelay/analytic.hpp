#pragma once

#include "localdelay/model.hpp"

namespace localdelay {

/// Mean and variance of the local delay in time slots. Divergent
/// quantities are +infinity.
struct DelayStats {
  double mean = 0.0;
  double variance = 0.0;
};

struct TailBound {
  double value = 1.0; // in [0, 1]
  bool valid = false; // the one-sided bound only holds when t0 > mean
};

// FHMA with n sub-bands, unbounded path loss.
double mean_delay_fhma(const DerivedConstants& k, int n);
double var_delay_fhma(const DerivedConstants& k, int n);

// ALOHA with transmit probability p in (0, 1].
double mean_delay_aloha(const DerivedConstants& k, double p);
double var_delay_aloha(const DerivedConstants& k, double p);

// FHMA with bounded path loss 1/(r^alpha + epsilon). The variance keeps
// the noise exponent 2 theta r0^alpha W N0 / N exactly as published, which
// lacks the epsilon shift present in the mean.
double mean_delay_fhma_bounded(const NetworkConfig& config, int n);
// Natural log of mean_delay_fhma_bounded; finite where the mean overflows.
double log_mean_delay_fhma_bounded(const NetworkConfig& config, int n);
double var_delay_fhma_bounded(const NetworkConfig& config, int n);

/// D(N) ~ N + A + B for large N.
double asymptotic_mean_fhma(const DerivedConstants& k, int n);
/// lim V(N) = (2 - delta) A + B.
double asymptotic_var_limit(const DerivedConstants& k);

/// Lower bound 1 - exp(-C0 t^-delta) on P(1/P(C|Phi) > t) without MAC
/// randomness (N = 1), C0 = c_d lambda theta^delta r0^d. Requires t > 1.
double ccdf_lower_bound_n1(const DerivedConstants& k, double t);

/// One-sided Chebyshev (Cantelli) bound V / (V + (t0 - D)^2).
TailBound cantelli_tail_bound(const DelayStats& stats, double t0);

/// Slot durations scale as 1/log2(1+theta).
DelayStats normalize(const DelayStats& stats, double theta);

DelayStats delay_stats(const DerivedConstants& k, const MacScheme& scheme);
/// Uses the bounded-path-loss forms when config.epsilon > 0 (FHMA only).
DelayStats delay_stats(const NetworkConfig& config, const MacScheme& scheme);

} // namespace localdelay
