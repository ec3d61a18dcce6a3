// localdelay: closed-form local delay of Poisson bipolar networks under
// FHMA and ALOHA, with a Monte Carlo cross-check.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "localdelay/commands.hpp"

namespace {

using localdelay::SweepSpec;

struct RawOptions {
  std::string config_path;
  std::string scheme = "fhma:2";
};

void add_common(CLI::App& sub, SweepSpec& spec, RawOptions& raw) {
  sub.add_option("--config", raw.config_path, "JSON network configuration");
  sub.add_option("--out", spec.out_path, "Output file (default: stdout)");
  sub.add_option("--seed", spec.mc.seed, "Monte Carlo seed");
  sub.add_option("--realizations", spec.mc.n_realizations, "Monte Carlo realizations");
  sub.add_option("--radius", spec.mc.radius, "Simulation disk radius");
  sub.add_option("--workers", spec.mc.workers, "Worker threads (0: all cores)");
  sub.add_option("--n-min", spec.n_min, "Smallest number of sub-bands");
  sub.add_option("--n-max", spec.n_max, "Largest number of sub-bands");
  sub.add_option("--p-grid", spec.p_grid, "ALOHA transmit probabilities")->delimiter(',');
  sub.add_option("--theta-list", spec.theta_list, "SINR thresholds")->delimiter(',');
  sub.add_option("--alpha-grid", spec.alpha_grid, "Path loss exponents")->delimiter(',');
  sub.add_option("--t0", spec.t0, "Delay level for the tail bound");
  sub.add_option("--t-grid", spec.t_grid, "Thresholds for the ccdf")->delimiter(',');
  sub.add_option("--scheme", raw.scheme, "fhma:N or aloha:P");
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Local delay of Poisson bipolar networks under FHMA and ALOHA"};
  app.require_subcommand(1);

  SweepSpec spec;
  RawOptions raw;
  const std::pair<const char*, const char*> commands[] = {
      {"sweep-fhma", "Mean and variance of the FHMA delay over N"},
      {"sweep-aloha", "Mean and variance of the ALOHA delay over p"},
      {"optimal", "Optimal N, p and theta (JSON)"},
      {"tail", "Cantelli tail bound over N"},
      {"validate", "Monte Carlo validation report"},
      {"tradeoff", "Normalized mean against normalized variance"},
      {"ccdf", "Empirical ccdf of 1/P(C|Phi) against its lower bound"}};
  for (const auto& [name, help] : commands) add_common(*app.add_subcommand(name, help), spec, raw);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return localdelay::kExitUsage;
  }

  try {
    spec.command = app.get_subcommands().front()->get_name();
    if (!raw.config_path.empty()) spec.config = localdelay::load_config(raw.config_path);
    spec.scheme = localdelay::parse_scheme(raw.scheme);

    std::ostringstream buffer;
    const int status = localdelay::run_command(spec, buffer);
    if (spec.out_path.empty()) {
      std::cout << buffer.str();
    } else {
      std::ofstream out(spec.out_path, std::ios::binary);
      if (!(out << buffer.str())) {
        std::cerr << "error: cannot write '" << spec.out_path << "'\n";
        return localdelay::kExitUsage;
      }
    }
    return status;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return localdelay::kExitUsage;
  }
}
