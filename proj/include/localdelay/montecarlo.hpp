#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "localdelay/model.hpp"

namespace localdelay {

/// Interferer distances from the receiver at the origin. Only |x| is kept:
/// the Rayleigh-faded SINR depends on each interferer through its distance
/// alone.
struct PppRealization {
  std::vector<double> distances; // each in (0, radius]
  double radius = 0.0;
};

struct McEstimate {
  double mean = 0.0;
  double variance = 0.0;
  double se_mean = 0.0;
  double se_variance = 0.0;
  std::int64_t n_realizations = 0;
  double censored_fraction = 0.0;         // slot-level only
  double truncation_exponent_error = 0.0; // far-field exponent omitted beyond R
  bool divergent = false;                 // true mean is infinite (Fhma{1}/Aloha{1}, lambda>0)
};

struct SlotSimOutcome {
  std::int64_t delay = 0;
  bool censored = false;
};

struct CcdfPoint {
  double t = 0.0;
  double fraction = 0.0;
  double se = 0.0;
};

struct McOptions {
  std::int64_t n_realizations = 1'000'000;
  double radius = 500.0;
  std::uint64_t seed = 1;
  int workers = 0; // 0: hardware concurrency
};

/// Per-(seed, index) generator. Streams for different indices are
/// independent, so realizations can be processed in any order.
std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t domain = 0);

PppRealization sample_ppp(const NetworkConfig& config, double radius, std::mt19937_64& rng);
PppRealization sample_ppp(const NetworkConfig& config, double radius, std::uint64_t seed,
                          std::uint64_t index = 0);

/// P(SINR > theta | Phi) for the typical link.
double cond_success_prob(const PppRealization& realization, const NetworkConfig& config,
                         const MacScheme& scheme);

/// Semi-analytic estimator: samples Phi only, integrating fading and MAC
/// exactly through the conditional success probability.
McEstimate estimate_delay_stats(const NetworkConfig& config, const MacScheme& scheme,
                                const McOptions& options);

/// One (config, scheme) pair in a batch.
struct McCell {
  NetworkConfig config;
  MacScheme scheme;
};

/// Evaluates several cells on common realizations. All cells must share
/// lambda, dim, alpha and r0. Each result equals the single-cell estimate
/// for the same options.
std::vector<McEstimate> estimate_delay_stats(std::span<const McCell> cells,
                                             const McOptions& options);

/// Slot-by-slot simulation of one packet over a fixed realization.
SlotSimOutcome simulate_slots(const NetworkConfig& config, const MacScheme& scheme,
                              const PppRealization& realization, std::mt19937_64& rng,
                              std::int64_t cap);
SlotSimOutcome simulate_slots(const NetworkConfig& config, const MacScheme& scheme,
                              const PppRealization& realization, std::uint64_t seed,
                              std::int64_t cap);

/// One slot-level run per realization; mean and variance are taken over
/// runs, censored runs counted at `cap`.
McEstimate estimate_slot_level(const NetworkConfig& config, const MacScheme& scheme,
                               const McOptions& options, std::int64_t cap);

/// Fraction of realizations with 1/P(C|Phi) > t under Fhma{1}.
std::vector<CcdfPoint> empirical_ccdf_reciprocal(const NetworkConfig& config,
                                                 std::span<const double> t_grid,
                                                 const McOptions& options);

/// Upper bound on the interference exponent lost by truncating Phi at radius.
double truncation_bias(const NetworkConfig& config, const MacScheme& scheme, double radius);

} // namespace localdelay
