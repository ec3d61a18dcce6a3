#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "localdelay/commands.hpp"

using namespace localdelay;

namespace {

using Row = std::vector<std::string>;

std::vector<Row> parse_csv(const std::string& text) {
  std::vector<Row> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    Row row;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

std::string run(SweepSpec spec, const std::string& command, int* status = nullptr) {
  spec.command = command;
  std::ostringstream out;
  const int s = run_command(spec, out);
  if (status) *status = s;
  return out.str();
}

double num(const std::string& s) { return s == "inf" ? INFINITY : std::stod(s); }

} // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(4.785091780100) == "4.7850917801");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(1e-20) == "1e-20");
  CHECK(format_number(INFINITY) == "inf");
  CHECK(format_number(-INFINITY) == "-inf");
  CHECK(format_number(NAN) == "nan");
  CHECK(format_number(0.1 + 0.2) == "0.3");
}

TEST_CASE("spec validation and defaults") {
  SweepSpec spec;
  CHECK_NOTHROW(spec.validate());
  CHECK(spec.thetas() == std::vector<double>{1.0});
  CHECK(spec.p_values().size() == 30);
  CHECK(spec.p_values().front() == 1.0);
  CHECK(spec.alphas().size() == 5);
  CHECK(spec.t_values().front() == doctest::Approx(2.0));
  CHECK(spec.t_values().back() == doctest::Approx(1000.0));
  SweepSpec bad = spec;
  bad.n_min = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.n_max = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.p_grid = {0.5, 1.2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.t_grid = {1.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.alpha_grid = {2.0};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.t0 = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = spec;
  bad.command = "plot";
  std::ostringstream sink;
  CHECK_THROWS_AS(run_command(bad, sink), std::invalid_argument);
}

TEST_CASE("FHMA sweep") {
  SweepSpec spec;
  spec.n_max = 30;
  const std::string text = run(spec, "sweep-fhma");
  CHECK(text.rfind("theta,N,D,D_normalized,V,V_normalized\n", 0) == 0);
  CHECK(text.find('\r') == std::string::npos);
  const auto rows = parse_csv(text);
  REQUIRE(rows.size() == 31);
  CHECK(rows[1] == Row{"1", "1", "inf", "inf", "inf", "inf"});
  int argmin = 0;
  double best = INFINITY;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (num(rows[i][2]) < best) {
      best = num(rows[i][2]);
      argmin = std::stoi(rows[i][1]);
    }
  CHECK(argmin == 2);
  CHECK(best == doctest::Approx(4.78509).epsilon(1e-5));

  spec.theta_list = {10.0};
  const auto rows10 = parse_csv(run(spec, "sweep-fhma"));
  argmin = 0;
  best = INFINITY;
  for (std::size_t i = 1; i < rows10.size(); ++i)
    if (num(rows10[i][2]) < best) {
      best = num(rows10[i][2]);
      argmin = std::stoi(rows10[i][1]);
    }
  CHECK(argmin == 5);

  SweepSpec quiet;
  quiet.config = quiet.config.with_lambda(0.0);
  for (const Row& r : parse_csv(run(quiet, "sweep-fhma"))) {
    if (r[0] == "theta") continue;
    CHECK(r[2] == r[1]);
  }
}

TEST_CASE("one block per threshold") {
  SweepSpec spec;
  spec.n_min = 2;
  spec.n_max = 5;
  spec.theta_list = {1.0, 3.0, 10.0};
  const auto rows = parse_csv(run(spec, "sweep-fhma"));
  CHECK(rows.size() == 13);
  CHECK(rows[5][0] == "3");
  CHECK(num(rows[5][3]) == doctest::Approx(num(rows[5][2]) / 2));
}

TEST_CASE("ALOHA sweep") {
  SweepSpec spec;
  spec.p_grid = {0.5};
  const auto rows = parse_csv(run(spec, "sweep-aloha"));
  CHECK(rows[0] == Row{"theta", "p", "D", "D_normalized", "V", "V_normalized"});
  CHECK(num(rows[1][2]) == doctest::Approx(4.78509).epsilon(1e-5));
  CHECK(num(rows[1][4]) == doctest::Approx(43.15163).epsilon(1e-6));

  SweepSpec quiet;
  quiet.config = quiet.config.with_lambda(0.0);
  quiet.p_grid = {1.0};
  const auto q = parse_csv(run(quiet, "sweep-aloha"));
  CHECK(q[1][2] == "1");
  CHECK(std::abs(num(q[1][4])) < 1e-12);

  // V~(1/N) grows like N^2 while the FHMA variance flattens
  SweepSpec grid;
  grid.n_min = 2;
  grid.n_max = 100;
  const auto aloha = parse_csv(run(grid, "sweep-aloha"));
  const auto fhma = parse_csv(run(grid, "sweep-fhma"));
  CHECK(num(aloha.back()[4]) / (100.0 * 100.0) == doctest::Approx(1.0).epsilon(0.1));
  CHECK(num(fhma.back()[4]) == doctest::Approx(1.85).epsilon(0.05));
  for (std::size_t i = 1; i < fhma.size(); ++i) CHECK(num(fhma[i][4]) < num(aloha[i][4]));
}

TEST_CASE("optimal report") {
  SweepSpec spec;
  spec.theta_list = {1.0, 10.0};
  spec.alpha_grid = {3.0, 3.5, 4.0, 4.5, 5.0};
  const auto j = nlohmann::json::parse(run(spec, "optimal"));
  REQUIRE(j.size() == 10);
  for (const auto& row : j) {
    if (row["alpha"] != 4.0) continue;
    if (row["theta"] == 10.0) {
      CHECK(row["fhma"]["nopt"] == 5);
      CHECK(row["fhma"]["nopt_bounds"] == nlohmann::json::array({3, 6}));
    } else {
      CHECK(row["fhma"]["nopt"] == 2);
      CHECK(row["fhma"]["nopt_is_two"] == true);
      CHECK(row["fhma"]["lambda_star"].get<double>() == doctest::Approx(0.010997).epsilon(1e-4));
      CHECK(row["theta_opt"]["interference_limited"]["theta_opt"].get<double>() == doctest::Approx(1.958).epsilon(1e-3));
    }
    CHECK(row["theta_opt"]["noise_limited"].contains("error"));
  }
  for (const double theta : {1.0, 10.0}) {
    int prev = 1 << 30;
    for (const auto& row : j) {
      if (row["theta"] != theta) continue;
      const int n = row["fhma"]["nopt"];
      CHECK(n <= prev);
      prev = n;
    }
  }
}

TEST_CASE("optimal report reports degenerate rows without failing") {
  SweepSpec spec;
  spec.config = spec.config.with_lambda(0.0);
  spec.alpha_grid = {4.0};
  int status = -1;
  const auto j = nlohmann::json::parse(run(spec, "optimal", &status));
  CHECK(status == kExitOk);
  CHECK(j[0]["fhma"].contains("error"));
  CHECK(j[0]["aloha"].contains("error"));

  SweepSpec noisy;
  noisy.config.noise_psd = 1.0 / 625.0;
  noisy.alpha_grid = {4.0};
  noisy.scheme = Aloha{0.5};
  const auto k = nlohmann::json::parse(run(noisy, "optimal"));
  const auto& nl = k[0]["theta_opt"]["noise_limited"];
  CHECK(nl["closed_form"].get<double>() == doctest::Approx(0.763223).epsilon(1e-6));
  CHECK(nl["printed_form_residual"].get<double>() > 0.5);
}

TEST_CASE("tail bound table") {
  SweepSpec spec;
  spec.t0 = 10.0;
  const auto rows = parse_csv(run(spec, "tail"));
  CHECK(rows[0] == Row{"theta", "N", "D", "V", "bound_raw", "valid_raw", "bound_normalized", "valid_normalized"});
  CHECK(rows[1][5] == "false");
  int first_raw = -1, first_norm = -1;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const int n = std::stoi(rows[i][1]);
    if (first_raw < 0 && num(rows[i][4]) <= 0.05) first_raw = n;
    if (first_norm < 0 && num(rows[i][6]) <= 0.05) first_norm = n;
    if (num(rows[i][2]) >= 10.0) CHECK(rows[i][5] == "false");
  }
  CHECK(first_raw == 16);
  CHECK(first_norm == 16);
  CHECK(smallest_n_for_tail(spec.config, 10.0, 0.05, false, 1, 30) == 16);
  CHECK(smallest_n_for_tail(spec.config, 10.0, 0.05, true, 1, 30) == 16);

  SweepSpec quiet;
  quiet.config = quiet.config.with_lambda(0.0);
  quiet.n_min = 2;
  quiet.n_max = 4;
  quiet.t0 = 10.0;
  for (const Row& r : parse_csv(run(quiet, "tail"))) {
    if (r[0] == "theta") continue;
    CHECK(num(r[4]) < 1e-12);
    CHECK(r[5] == "true");
  }
}

TEST_CASE("tradeoff table") {
  SweepSpec spec;
  spec.n_min = 2;
  spec.n_max = 50;
  spec.p_grid = {0.5, 0.1, 0.01, 0.001};
  const auto rows = parse_csv(run(spec, "tradeoff"));
  CHECK(rows[0] == Row{"theta", "scheme", "parameter", "mean_normalized", "variance_normalized"});
  REQUIRE(rows.size() == 1 + 49 + 4);
  // variance column approaches (2 - delta) A from above
  const double limit = 1.5 * std::numbers::pi * std::numbers::pi / 8;
  CHECK(num(rows[49][4]) - limit < num(rows[9][4]) - limit);
  CHECK(num(rows[49][4]) == doctest::Approx(limit).epsilon(0.1));
  CHECK(num(rows[49][4]) == doctest::Approx(var_delay_fhma(derive_constants(spec.config), 50)).epsilon(1e-9));
  CHECK(num(rows[49][3]) > num(rows[10][3]));
  CHECK(num(rows.back()[3]) > 999.0);
  CHECK(num(rows.back()[4]) > 1e5);
}

TEST_CASE("ccdf table") {
  SweepSpec spec;
  spec.mc.n_realizations = 4000;
  spec.mc.radius = 200.0;
  spec.t_grid = {2.0, 10.0, 1000.0};
  const auto rows = parse_csv(run(spec, "ccdf"));
  CHECK(rows[0] == Row{"t", "lower_bound", "empirical", "se", "dominates"});
  REQUIRE(rows.size() == 4);
  CHECK(num(rows[2][1]) == doctest::Approx(0.21992).epsilon(1e-4));
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][4] == "true");
  spec.config = spec.config.with_epsilon(1.0);
  std::ostringstream sink;
  spec.command = "ccdf";
  CHECK_THROWS_AS(run_command(spec, sink), std::invalid_argument);
}

TEST_CASE("validation report") {
  SweepSpec spec;
  spec.mc.n_realizations = 3000;
  spec.mc.radius = 200.0;
  spec.t_grid = {2.0, 10.0};
  const ValidationReport r = run_validation(spec);
  REQUIRE(r.rows.size() == 2 * 7 + 2);
  CHECK(r.rows[0].note.find("divergent") != std::string::npos);
  CHECK_FALSE(r.rows[0].checked);
  for (const ValidationRow& row : r.rows) {
    if (row.lambda != 0.0) continue;
    CHECK(row.checked);
    CHECK(row.pass);
    CHECK(row.mc.se_mean == 0.0);
    CHECK(row.mc.mean == doctest::Approx(row.closed.mean).epsilon(1e-14));
  }
  CHECK(r.ccdf.size() == 2);
  CHECK(r.aloha_theta.root == doctest::Approx(0.763223).epsilon(1e-6));

  std::ostringstream a;
  write_validation_report(r, a);
  const std::string text = a.str();
  CHECK(text.find("fhma:1,1,0.01,inf") != std::string::npos);
  CHECK(text.find("divergent: mean check skipped, ccdf dominance only") != std::string::npos);
  CHECK(text.find("W(exp(z))-1,0,1") != std::string::npos);
  CHECK(text.find("result,") != std::string::npos);

  SweepSpec again = spec;
  again.mc.workers = 3;
  int status = -1;
  CHECK(run(again, "validate", &status) == text);
  CHECK((status == kExitOk) == r.passed);
}
