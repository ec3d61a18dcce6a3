#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "localdelay/analytic.hpp"
#include "localdelay/model.hpp"
#include "localdelay/montecarlo.hpp"
#include "localdelay/optimize.hpp"

namespace localdelay {

/// Exit statuses shared by every command.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitValidation = 2 };

/// Inputs of one command invocation. Empty grids fall back to the
/// command's defaults (see the accessors).
struct SweepSpec {
  std::string command;
  NetworkConfig config;
  int n_min = 1;
  int n_max = 30;
  std::vector<double> p_grid;
  std::vector<double> theta_list;
  std::vector<double> alpha_grid;
  double t0 = 10.0;
  std::vector<double> t_grid;
  MacScheme scheme = Fhma{2};
  McOptions mc;
  std::string out_path;

  /// Throws std::invalid_argument on an unusable spec.
  void validate() const;

  std::vector<double> thetas() const;     // default: config.theta
  std::vector<double> p_values() const;   // default: 1/N for N in [n_min, n_max]
  std::vector<double> alphas() const;     // default: 3, 3.5, 4, 4.5, 5
  std::vector<double> t_values() const;   // default: 20-point log grid on [2, 1000]
};

/// "%.12g" with "inf" / "-inf" / "nan" sentinels.
std::string format_number(double x);

/// Smallest N in [n_min, n_max] whose Cantelli bound at t0 is <= level,
/// or -1. With `normalized`, mean and variance are scaled by log2(1+theta).
int smallest_n_for_tail(const NetworkConfig& config, double t0, double level, bool normalized,
                        int n_min, int n_max);

struct ValidationRow {
  double theta = 0.0;
  double lambda = 0.0;
  MacScheme scheme;
  DelayStats closed;
  McEstimate mc;
  double z_mean = 0.0;
  double z_variance = 0.0;
  bool checked = true; // false for divergent or unsupported rows
  bool pass = true;
  std::string note;
};

struct CcdfCheckPoint {
  CcdfPoint empirical;
  double lower_bound = 0.0;
  bool dominates = true;
};

struct ValidationReport {
  McOptions options;
  std::vector<ValidationRow> rows;
  std::vector<CcdfCheckPoint> ccdf;
  bool ccdf_checked = false;
  AlohaNoiseThetaReport aloha_theta;
  bool passed = true;
};

/// Semi-analytic MC against the closed forms for theta in spec.thetas()
/// (default 1 and 10) and the schemes Fhma{2,5,10}, Aloha{0.5,0.2,0.1},
/// plus a divergent Fhma{1} row, a lambda = 0 row and the ccdf check.
ValidationReport run_validation(const SweepSpec& spec);
void write_validation_report(const ValidationReport& report, std::ostream& out);

// Each command writes its CSV/JSON/text output to `out` and returns an
// ExitCode. Invalid specs raise std::invalid_argument.
int cmd_sweep_fhma(const SweepSpec& spec, std::ostream& out);
int cmd_sweep_aloha(const SweepSpec& spec, std::ostream& out);
int cmd_optimal(const SweepSpec& spec, std::ostream& out);
int cmd_tail(const SweepSpec& spec, std::ostream& out);
int cmd_validate(const SweepSpec& spec, std::ostream& out);
int cmd_tradeoff(const SweepSpec& spec, std::ostream& out);
int cmd_ccdf(const SweepSpec& spec, std::ostream& out);

/// Dispatches on spec.command.
int run_command(const SweepSpec& spec, std::ostream& out);

} // namespace localdelay
