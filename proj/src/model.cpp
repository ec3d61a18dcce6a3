#include "localdelay/model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "localdelay/numerics.hpp"

namespace localdelay {

namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

bool finite(double x) { return std::isfinite(x); }

} // namespace

void NetworkConfig::validate() const {
  require(dim >= 1 && dim <= 3, "config: dim must be 1, 2 or 3");
  require(finite(lambda) && lambda >= 0.0, "config: lambda must be >= 0");
  require(finite(alpha), "config: alpha must be finite");
  if (!(alpha > dim)) throw std::domain_error("config: alpha must exceed dim");
  require(finite(r0) && r0 > 0.0, "config: r0 must be > 0");
  require(finite(theta) && theta > 0.0, "config: theta must be > 0");
  require(finite(bandwidth) && bandwidth >= 0.0, "config: bandwidth must be >= 0");
  require(finite(noise_psd) && noise_psd >= 0.0, "config: noise_psd must be >= 0");
  require(finite(epsilon) && epsilon >= 0.0, "config: epsilon must be >= 0");
}

void validate(const MacScheme& scheme) {
  if (const auto* f = std::get_if<Fhma>(&scheme)) {
    require(f->n_subbands >= 1, "scheme: FHMA needs n_subbands >= 1");
  } else {
    const double p = std::get<Aloha>(scheme).p;
    require(p > 0.0 && p <= 1.0, "scheme: ALOHA needs p in (0, 1]");
  }
}

MacScheme parse_scheme(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos)
    throw std::invalid_argument("scheme: expected fhma:N or aloha:P");
  const std::string_view kind = text.substr(0, colon);
  const std::string value(text.substr(colon + 1));
  std::size_t used = 0;
  MacScheme scheme;
  try {
    if (kind == "fhma") {
      scheme = Fhma{std::stoi(value, &used)};
    } else if (kind == "aloha") {
      scheme = Aloha{std::stod(value, &used)};
    } else {
      throw std::invalid_argument("scheme: unknown kind");
    }
  } catch (const std::logic_error&) {
    throw std::invalid_argument("scheme: cannot parse '" + std::string(text) + "'");
  }
  if (used != value.size())
    throw std::invalid_argument("scheme: trailing characters in '" + std::string(text) + "'");
  validate(scheme);
  return scheme;
}

std::string to_string(const MacScheme& scheme) {
  if (const auto* f = std::get_if<Fhma>(&scheme)) return "fhma:" + std::to_string(f->n_subbands);
  std::ostringstream os;
  os.precision(12);
  os << "aloha:" << std::get<Aloha>(scheme).p;
  return os.str();
}

double unit_ball_volume(int dim) {
  switch (dim) {
    case 1: return 2.0;
    case 2: return std::numbers::pi;
    case 3: return 4.0 * std::numbers::pi / 3.0;
    default: throw std::invalid_argument("unit_ball_volume: dim must be 1, 2 or 3");
  }
}

DerivedConstants derive_constants(const NetworkConfig& config) {
  config.validate();
  DerivedConstants k;
  k.delta = config.dim / config.alpha;
  k.c_d = unit_ball_volume(config.dim);
  k.c_delta = inv_sinc_c(k.delta);
  k.a_const = config.lambda * k.c_d * std::pow(config.r0, config.dim) *
              std::pow(config.theta, k.delta) * k.c_delta;
  k.b_const = config.theta * std::pow(config.r0, config.alpha) * config.bandwidth * config.noise_psd;
  return k;
}

DerivedConstants make_constants(double delta, double a_const, double b_const) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("make_constants: delta in (0,1)");
  if (!(a_const >= 0.0) || !(b_const >= 0.0))
    throw std::invalid_argument("make_constants: A and B must be >= 0");
  DerivedConstants k;
  k.delta = delta;
  k.c_d = 0.0;
  k.c_delta = inv_sinc_c(delta);
  k.a_const = a_const;
  k.b_const = b_const;
  return k;
}

NetworkConfig config_from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");

  NetworkConfig c;
  for (const auto& [key, value] : j.items()) {
    if (key == "dim") {
      if (!value.is_number_integer()) throw std::invalid_argument("config: dim must be an integer");
      c.dim = value.get<int>();
      continue;
    }
    double* field = nullptr;
    if (key == "lambda") field = &c.lambda;
    else if (key == "alpha") field = &c.alpha;
    else if (key == "r0") field = &c.r0;
    else if (key == "theta") field = &c.theta;
    else if (key == "bandwidth") field = &c.bandwidth;
    else if (key == "noise_psd") field = &c.noise_psd;
    else if (key == "epsilon") field = &c.epsilon;
    else throw std::invalid_argument("config: unknown key '" + key + "'");
    if (!value.is_number()) throw std::invalid_argument("config: '" + key + "' must be a number");
    *field = value.get<double>();
  }
  c.validate();
  return c;
}

std::string config_to_json(const NetworkConfig& c) {
  nlohmann::ordered_json j;
  j["lambda"] = c.lambda;
  j["alpha"] = c.alpha;
  j["dim"] = c.dim;
  j["r0"] = c.r0;
  j["theta"] = c.theta;
  j["bandwidth"] = c.bandwidth;
  j["noise_psd"] = c.noise_psd;
  j["epsilon"] = c.epsilon;
  return j.dump();
}

NetworkConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

} // namespace localdelay
