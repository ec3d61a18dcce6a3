#include "localdelay/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <variant>

#include "json.hpp"

namespace localdelay {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr double kZLimit = 3.0;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("spec: " + what);
}

std::string join(std::initializer_list<std::string> cells) {
  std::string line;
  for (const auto& c : cells) {
    if (!line.empty()) line += ',';
    line += c;
  }
  return line;
}

std::string fmt(double x) { return format_number(x); }
std::string fmt(int x) { return std::to_string(x); }
std::string fmt_bool(bool b) { return b ? "true" : "false"; }

std::vector<MacScheme> validation_schemes() {
  return {Fhma{2}, Fhma{5}, Fhma{10}, Aloha{0.5}, Aloha{0.2}, Aloha{0.1}};
}

double z_score(double estimate, double truth, double se) {
  const double diff = estimate - truth;
  if (se > 0.0) return diff / se;
  return std::abs(diff) <= 1e-12 * std::max(1.0, std::abs(truth))
             ? 0.0
             : std::copysign(std::numeric_limits<double>::infinity(), diff);
}

// Truncation is certified when its exponent bias is this small a share of
// the delay exponent ln(D/N) (FHMA) or ln(pD) (ALOHA).
constexpr double kBiasShare = 1e-3;

double delay_exponent(const ValidationRow& row) {
  if (const auto* f = std::get_if<Fhma>(&row.scheme)) return std::log(row.closed.mean / f->n_subbands);
  return std::log(row.closed.mean * std::get<Aloha>(row.scheme).p);
}

ordered_json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_number(x);
}

template <class F>
void guarded(ordered_json& row, const char* key, F&& fill) {
  try {
    fill(row[key]);
  } catch (const std::exception& e) {
    row[key] = ordered_json{{"error", e.what()}};
  }
}

} // namespace

void SweepSpec::validate() const {
  config.validate();
  localdelay::validate(scheme);
  require(n_min >= 1, "n_min must be >= 1");
  require(n_max >= n_min, "n_max must be >= n_min");
  for (const double p : p_values()) require(p > 0.0 && p <= 1.0, "p grid values must be in (0, 1]");
  for (const double t : thetas()) require(std::isfinite(t) && t > 0.0, "theta values must be > 0");
  for (const double a : alphas()) require(std::isfinite(a) && a > config.dim, "alpha values must exceed dim");
  for (const double t : t_values()) require(std::isfinite(t) && t > 1.0, "t grid values must exceed 1");
  require(std::isfinite(t0) && t0 > 0.0, "t0 must be > 0");
  require(mc.n_realizations >= 1, "realizations must be >= 1");
  require(std::isfinite(mc.radius) && mc.radius > config.r0, "radius must exceed r0");
}

std::vector<double> SweepSpec::thetas() const {
  return theta_list.empty() ? std::vector<double>{config.theta} : theta_list;
}

std::vector<double> SweepSpec::p_values() const {
  if (!p_grid.empty()) return p_grid;
  std::vector<double> out;
  for (int n = std::max(1, n_min); n <= n_max; ++n) out.push_back(1.0 / n);
  return out;
}

std::vector<double> SweepSpec::alphas() const {
  return alpha_grid.empty() ? std::vector<double>{3.0, 3.5, 4.0, 4.5, 5.0} : alpha_grid;
}

std::vector<double> SweepSpec::t_values() const {
  if (!t_grid.empty()) return t_grid;
  constexpr int kPoints = 20;
  std::vector<double> out;
  const double lo = std::log(2.0), hi = std::log(1000.0);
  for (int i = 0; i < kPoints; ++i) out.push_back(std::exp(lo + (hi - lo) * i / (kPoints - 1)));
  return out;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

int smallest_n_for_tail(const NetworkConfig& config, double t0, double level, bool normalized,
                        int n_min, int n_max) {
  const DerivedConstants k = derive_constants(config);
  for (int n = std::max(2, n_min); n <= n_max; ++n) {
    DelayStats s = delay_stats(k, Fhma{n});
    if (normalized) s = normalize(s, config.theta);
    if (cantelli_tail_bound(s, t0).value <= level) return n;
  }
  return -1;
}

int cmd_sweep_fhma(const SweepSpec& spec, std::ostream& out) {
  spec.validate();
  out << "theta,N,D,D_normalized,V,V_normalized\n";
  for (const double theta : spec.thetas()) {
    const NetworkConfig c = spec.config.with_theta(theta);
    for (int n = spec.n_min; n <= spec.n_max; ++n) {
      const DelayStats s = delay_stats(c, Fhma{n});
      const DelayStats sn = normalize(s, theta);
      out << join({fmt(theta), fmt(n), fmt(s.mean), fmt(sn.mean), fmt(s.variance), fmt(sn.variance)})
          << '\n';
    }
  }
  return kExitOk;
}

int cmd_sweep_aloha(const SweepSpec& spec, std::ostream& out) {
  spec.validate();
  out << "theta,p,D,D_normalized,V,V_normalized\n";
  for (const double theta : spec.thetas()) {
    const NetworkConfig c = spec.config.with_theta(theta);
    for (const double p : spec.p_values()) {
      const DelayStats s = delay_stats(c, Aloha{p});
      const DelayStats sn = normalize(s, theta);
      out << join({fmt(theta), fmt(p), fmt(s.mean), fmt(sn.mean), fmt(s.variance), fmt(sn.variance)})
          << '\n';
    }
  }
  return kExitOk;
}

int cmd_optimal(const SweepSpec& spec, std::ostream& out) {
  spec.validate();
  ordered_json rows = ordered_json::array();
  for (const double alpha : spec.alphas()) {
    for (const double theta : spec.thetas()) {
      const NetworkConfig c = spec.config.with_alpha(alpha).with_theta(theta);
      const DerivedConstants k = derive_constants(c);
      ordered_json row;
      row["alpha"] = alpha;
      row["theta"] = theta;
      row["t0"] = k.a_const + k.b_const;
      guarded(row, "fhma", [&](ordered_json& r) {
        const IntBounds b = nopt_bounds(k);
        const int n = nopt_exact(k);
        const double d = mean_delay_fhma(k, n);
        r["nopt_bounds"] = {b.lo, b.hi};
        r["nopt"] = n;
        r["mean_at_nopt"] = json_number(d);
        r["normalized_mean_at_nopt"] = json_number(d / std::log2(1.0 + theta));
        r["nopt_is_two"] = nopt_is_two(c);
        r["lambda_star"] = json_number(nopt_two_lambda_threshold(c));
      });
      guarded(row, "aloha", [&](ordered_json& r) {
        const Interval b = popt_bounds(k);
        const double p = popt_exact(k);
        const double d = mean_delay_aloha(k, p);
        r["popt_bounds"] = {b.lo, b.hi};
        r["popt"] = p;
        r["mean_at_popt"] = json_number(d);
        r["normalized_mean_at_popt"] = json_number(d / std::log2(1.0 + theta));
      });

      ordered_json t;
      t["scheme"] = to_string(spec.scheme);
      const double delta = c.dim / c.alpha;
      const double b0 = theta_interference_coefficient(c, spec.scheme);
      const double cn = theta_noise_coefficient(c, spec.scheme);
      auto solve = [&](ordered_json& r, ThetaRegime regime, double rb0, double rc) {
        const double th = theta_opt_exact(c, spec.scheme, regime);
        r["theta_opt"] = th;
        r["residual"] = theta_stationarity(th, delta, rb0, rc);
        const DelayStats s = delay_stats(derive_constants(c.with_theta(th)), spec.scheme);
        r["normalized_mean"] = json_number(s.mean / std::log2(1.0 + th));
        if (regime == ThetaRegime::InterferenceLimited) {
          const Interval bi = theta_opt_bounds_interference(c, spec.scheme);
          r["bounds"] = {bi.lo, bi.hi};
        }
      };
      guarded(t, "interference_limited",
              [&](ordered_json& r) { solve(r, ThetaRegime::InterferenceLimited, b0, 0.0); });
      guarded(t, "noise_limited", [&](ordered_json& r) {
        solve(r, ThetaRegime::NoiseLimited, 0.0, cn);
        if (const auto* f = std::get_if<Fhma>(&spec.scheme)) {
          r["closed_form"] = theta_opt_noise_limited_fhma(c, f->n_subbands);
        } else {
          const AlohaNoiseThetaReport a = theta_opt_noise_limited_aloha_report(c);
          r["closed_form"] = a.root;
          r["closed_form_residual"] = a.root_residual;
          r["printed_form"] = json_number(a.printed_form);
          r["printed_form_residual"] = json_number(a.printed_residual);
        }
      });
      guarded(t, "general", [&](ordered_json& r) { solve(r, ThetaRegime::General, b0, cn); });
      row["theta_opt"] = std::move(t);
      rows.push_back(std::move(row));
    }
  }
  out << rows.dump(2) << '\n';
  return kExitOk;
}

int cmd_tail(const SweepSpec& spec, std::ostream& out) {
  spec.validate();
  out << "theta,N,D,V,bound_raw,valid_raw,bound_normalized,valid_normalized\n";
  for (const double theta : spec.thetas()) {
    const NetworkConfig c = spec.config.with_theta(theta);
    for (int n = spec.n_min; n <= spec.n_max; ++n) {
      const DelayStats s = delay_stats(c, Fhma{n});
      TailBound raw, norm;
      if (std::isfinite(s.mean) && std::isfinite(s.variance)) {
        raw = cantelli_tail_bound(s, spec.t0);
        norm = cantelli_tail_bound(normalize(s, theta), spec.t0);
      }
      out << join({fmt(theta), fmt(n), fmt(s.mean), fmt(s.variance), fmt(raw.value),
                   fmt_bool(raw.valid), fmt(norm.value), fmt_bool(norm.valid)})
          << '\n';
    }
  }
  return kExitOk;
}

int cmd_tradeoff(const SweepSpec& spec, std::ostream& out) {
  spec.validate();
  out << "theta,scheme,parameter,mean_normalized,variance_normalized\n";
  for (const double theta : spec.thetas()) {
    const NetworkConfig c = spec.config.with_theta(theta);
    for (int n = spec.n_min; n <= spec.n_max; ++n) {
      const DelayStats s = normalize(delay_stats(c, Fhma{n}), theta);
      out << join({fmt(theta), "fhma", fmt(n), fmt(s.mean), fmt(s.variance)}) << '\n';
    }
    for (const double p : spec.p_values()) {
      const DelayStats s = normalize(delay_stats(c, Aloha{p}), theta);
      out << join({fmt(theta), "aloha", fmt(p), fmt(s.mean), fmt(s.variance)}) << '\n';
    }
  }
  return kExitOk;
}

namespace {

std::vector<CcdfCheckPoint> ccdf_check(const SweepSpec& spec) {
  const std::vector<double> grid = spec.t_values();
  const auto emp = empirical_ccdf_reciprocal(spec.config, grid, spec.mc);
  const DerivedConstants k = derive_constants(spec.config);
  std::vector<CcdfCheckPoint> out;
  for (const CcdfPoint& e : emp) {
    CcdfCheckPoint pt;
    pt.empirical = e;
    pt.lower_bound = ccdf_lower_bound_n1(k, e.t);
    pt.dominates = e.fraction >= pt.lower_bound - kZLimit * e.se;
    out.push_back(pt);
  }
  return out;
}

} // namespace

int cmd_ccdf(const SweepSpec& spec, std::ostream& out) {
  spec.validate();
  if (spec.config.epsilon > 0.0)
    throw std::invalid_argument("spec: ccdf lower bound needs unbounded path loss (epsilon = 0)");
  out << "t,lower_bound,empirical,se,dominates\n";
  for (const CcdfCheckPoint& p : ccdf_check(spec))
    out << join({fmt(p.empirical.t), fmt(p.lower_bound), fmt(p.empirical.fraction),
                 fmt(p.empirical.se), fmt_bool(p.dominates)})
        << '\n';
  return kExitOk;
}

ValidationReport run_validation(const SweepSpec& spec) {
  spec.validate();
  ValidationReport report;
  report.options = spec.mc;
  const std::vector<double> thetas =
      spec.theta_list.empty() ? std::vector<double>{1.0, 10.0} : spec.theta_list;

  std::vector<McCell> cells;
  for (const double theta : thetas) {
    cells.push_back({spec.config.with_theta(theta), Fhma{1}});
    for (const MacScheme& scheme : validation_schemes())
      cells.push_back({spec.config.with_theta(theta), scheme});
  }
  const std::vector<McEstimate> estimates = estimate_delay_stats(cells, spec.mc);

  NetworkConfig empty = spec.config.with_lambda(0.0);
  const std::vector<McCell> empty_cells{{empty, Fhma{2}}, {empty, Aloha{0.5}}};
  const std::vector<McEstimate> empty_estimates = estimate_delay_stats(empty_cells, spec.mc);

  auto add_row = [&](const McCell& cell, const McEstimate& mc) {
    ValidationRow row;
    row.theta = cell.config.theta;
    row.lambda = cell.config.lambda;
    row.scheme = cell.scheme;
    row.mc = mc;
    if (mc.divergent) {
      row.checked = false;
      row.closed = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
      row.note = "divergent: mean check skipped, ccdf dominance only";
    } else {
      try {
        row.closed = delay_stats(cell.config, cell.scheme);
      } catch (const std::domain_error& e) {
        row.checked = false;
        row.note = std::string("no closed form: ") + e.what();
      }
    }
    if (row.checked) {
      row.z_mean = z_score(mc.mean, row.closed.mean, mc.se_mean);
      row.z_variance = z_score(mc.variance, row.closed.variance, mc.se_variance);
      row.pass = std::abs(row.z_mean) <= kZLimit && std::abs(row.z_variance) <= kZLimit;
      if (row.lambda == 0.0) {
        row.note = "exact";
      } else if (mc.truncation_exponent_error >= kBiasShare * delay_exponent(row)) {
        row.pass = false;
        row.note = "truncation bias not certified";
      }
    }
    report.passed = report.passed && row.pass;
    report.rows.push_back(std::move(row));
  };
  for (std::size_t i = 0; i < cells.size(); ++i) add_row(cells[i], estimates[i]);
  for (std::size_t i = 0; i < empty_cells.size(); ++i) add_row(empty_cells[i], empty_estimates[i]);

  if (spec.config.epsilon == 0.0 && spec.config.lambda > 0.0) {
    report.ccdf_checked = true;
    report.ccdf = ccdf_check(spec);
    for (const auto& p : report.ccdf) report.passed = report.passed && p.dominates;
  }

  // Noise-limited ALOHA threshold at r0^alpha W N0 = 1.
  NetworkConfig noisy = spec.config;
  noisy.bandwidth = 1.0;
  noisy.noise_psd = 1.0 / std::pow(noisy.r0, noisy.alpha);
  report.aloha_theta = theta_opt_noise_limited_aloha_report(noisy);
  report.passed = report.passed && report.aloha_theta.root_residual <= 1e-9;
  return report;
}

void write_validation_report(const ValidationReport& r, std::ostream& out) {
  out << "# semi-analytic Monte Carlo vs closed forms\n";
  out << "# realizations=" << r.options.n_realizations << " radius=" << fmt(r.options.radius)
      << " seed=" << r.options.seed << '\n';
  out << "scheme,theta,lambda,D_closed,D_mc,D_se,D_z,V_closed,V_mc,V_se,V_z,truncation_bias,status,"
         "note\n";
  for (const ValidationRow& row : r.rows) {
    const std::string status = !row.checked ? "skip" : (row.pass ? "pass" : "fail");
    out << join({to_string(row.scheme), fmt(row.theta), fmt(row.lambda), fmt(row.closed.mean),
                 fmt(row.mc.mean), fmt(row.mc.se_mean), row.checked ? fmt(row.z_mean) : "",
                 fmt(row.closed.variance), fmt(row.mc.variance), fmt(row.mc.se_variance),
                 row.checked ? fmt(row.z_variance) : "", fmt(row.mc.truncation_exponent_error),
                 status, row.note})
        << '\n';
  }
  out << "# ccdf of 1/P(C|Phi) at N=1 vs lower bound 1-exp(-C0 t^-delta)\n";
  if (!r.ccdf_checked) {
    out << "skipped\n";
  } else {
    out << "t,lower_bound,empirical,se,dominates\n";
    for (const auto& p : r.ccdf)
      out << join({fmt(p.empirical.t), fmt(p.lower_bound), fmt(p.empirical.fraction),
                   fmt(p.empirical.se), fmt_bool(p.dominates)})
          << '\n';
  }
  const AlohaNoiseThetaReport& a = r.aloha_theta;
  out << "# noise-limited ALOHA theta_opt at r0^alpha W N0 = 1\n";
  out << "form,theta,relative_residual\n";
  out << join({"exp(W(z))-1", fmt(a.root), fmt(a.root_residual)}) << '\n';
  out << join({"W(exp(z))-1", fmt(a.printed_form), fmt(a.printed_residual)}) << '\n';
  out << "result," << (r.passed ? "pass" : "fail") << '\n';
}

int cmd_validate(const SweepSpec& spec, std::ostream& out) {
  const ValidationReport report = run_validation(spec);
  write_validation_report(report, out);
  return report.passed ? kExitOk : kExitValidation;
}

int run_command(const SweepSpec& spec, std::ostream& out) {
  using Command = int (*)(const SweepSpec&, std::ostream&);
  static const std::pair<const char*, Command> table[] = {
      {"sweep-fhma", cmd_sweep_fhma}, {"sweep-aloha", cmd_sweep_aloha},
      {"optimal", cmd_optimal},       {"tail", cmd_tail},
      {"validate", cmd_validate},     {"tradeoff", cmd_tradeoff},
      {"ccdf", cmd_ccdf}};
  for (const auto& [name, fn] : table)
    if (spec.command == name) return fn(spec, out);
  throw std::invalid_argument("unknown command '" + spec.command + "'");
}

} // namespace localdelay
