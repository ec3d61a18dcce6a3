#pragma once

#include <string>
#include <string_view>
#include <variant>

namespace localdelay {

/// Physical and network parameters of a Poisson bipolar network.
///
/// Transmit power is unity and the path-loss constant is folded into
/// `noise_psd`, so the path loss seen by every formula is r^-alpha
/// (or 1/(r^alpha + epsilon) when `epsilon > 0`).
struct NetworkConfig {
  double lambda = 0.01;   // transmitters per unit d-volume
  double alpha = 4.0;     // path loss exponent, alpha > dim
  int dim = 2;            // 1, 2 or 3
  double r0 = 5.0;        // desired link distance
  double theta = 1.0;     // SINR threshold
  double bandwidth = 1.0; // total band W
  double noise_psd = 0.0; // normalized noise PSD; 0 is interference-limited
  double epsilon = 0.0;   // bounded path loss offset; 0 is r^-alpha

  /// Throws std::invalid_argument (or std::domain_error for alpha <= dim).
  void validate() const;

  /// Defaults used throughout: lambda = 0.01, alpha = 4, d = 2, r0 = 5, N0 = 0.
  static NetworkConfig defaults() { return {}; }

  NetworkConfig with_theta(double t) const {
    NetworkConfig c = *this;
    c.theta = t;
    return c;
  }
  NetworkConfig with_lambda(double l) const {
    NetworkConfig c = *this;
    c.lambda = l;
    return c;
  }
  NetworkConfig with_alpha(double a) const {
    NetworkConfig c = *this;
    c.alpha = a;
    return c;
  }
  NetworkConfig with_epsilon(double e) const {
    NetworkConfig c = *this;
    c.epsilon = e;
    return c;
  }

  bool operator==(const NetworkConfig&) const = default;
};

/// FHMA: the band is split into `n_subbands` and each node hops uniformly per slot.
struct Fhma {
  int n_subbands = 2;
  bool operator==(const Fhma&) const = default;
};

/// ALOHA: each node transmits over the full band with probability `p` per slot.
struct Aloha {
  double p = 0.5;
  bool operator==(const Aloha&) const = default;
};

using MacScheme = std::variant<Fhma, Aloha>;

void validate(const MacScheme& scheme);

/// "fhma:N" or "aloha:P".
MacScheme parse_scheme(std::string_view text);
std::string to_string(const MacScheme& scheme);

inline bool is_fhma(const MacScheme& s) { return std::holds_alternative<Fhma>(s); }

struct DerivedConstants {
  double delta = 0.0;   // d / alpha
  double c_d = 0.0;     // volume of the unit d-ball
  double c_delta = 0.0; // Gamma(1+delta) Gamma(1-delta) = 1 / sinc(delta)
  double a_const = 0.0; // lambda c_d r0^d theta^delta C(delta)
  double b_const = 0.0; // theta r0^alpha W N0
};

double unit_ball_volume(int dim);

DerivedConstants derive_constants(const NetworkConfig& config);

/// Constants built directly from (delta, A, B); used where only those enter.
DerivedConstants make_constants(double delta, double a_const, double b_const);

// JSON I/O. The object carries exactly the NetworkConfig field names;
// unknown keys are rejected and missing keys keep their default.
NetworkConfig config_from_json(std::string_view json_text);
std::string config_to_json(const NetworkConfig& config);
NetworkConfig load_config(const std::string& path);

} // namespace localdelay
