#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "gravdec/cli.hpp"
#include "gravdec/experiment.hpp"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string tag = std::to_string(counter++);
  const fs::path out_file = "cli_stdout_" + tag + ".txt";
  const fs::path err_file = "cli_stderr_" + tag + ".txt";

  const std::string command = std::string(GRAVDEC_BIN) + " " + args + " >" +
                              out_file.string() + " 2>" + err_file.string();
  const int status = std::system(command.c_str());

  CliResult result;
  result.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_file);
  result.err = slurp(err_file);
  fs::remove(out_file);
  fs::remove(err_file);
  return result;
}

double field(const std::string& text, const std::string& key) {
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.rfind(key, 0) != 0) continue;
    const auto eq = line.find('=');
    REQUIRE(eq != std::string::npos);
    return std::stod(line.substr(eq + 1));
  }
  FAIL("missing field ", key, " in:\n", text);
  return 0.0;
}

struct Csv {
  std::vector<std::string> manifest;
  std::string header;
  std::vector<std::vector<double>> rows;
};

Csv parse_csv(const std::string& text) {
  Csv csv;
  std::istringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    if (line.front() == '#') {
      csv.manifest.push_back(line);
    } else if (csv.header.empty()) {
      csv.header = line;
    } else {
      std::vector<double> row;
      std::istringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
      csv.rows.push_back(std::move(row));
    }
  }
  return csv;
}

std::string manifest_value(const Csv& csv, const std::string& key) {
  const std::string prefix = "# " + key + " = ";
  for (const std::string& line : csv.manifest) {
    if (line.rfind(prefix, 0) == 0) return line.substr(prefix.size());
  }
  return "";
}

std::string body_without_timestamp(const std::string& text) {
  std::istringstream ss(text);
  std::ostringstream out;
  std::string line;
  while (std::getline(ss, line)) {
    if (line.rfind("# timestamp", 0) == 0) continue;
    out << line << "\n";
  }
  return out.str();
}

fs::path write_temp(const std::string& name, const std::string& contents) {
  const fs::path path = name;
  std::ofstream(path) << contents;
  return path;
}

}  // namespace

TEST_CASE("delta command prints both intervals and the delay") {
  const CliResult r = run_cli("delta --height 4e5 --method weak");
  CHECK(r.code == 0);
  CHECK(std::fabs(field(r.out, "delta_m") - (-1.7421e-5)) < 1.0e-9);
  CHECK(field(r.out, "sigma_c_m") > 4.0e5);
  CHECK(field(r.out, "sigma_sd_m") > 4.0e5);

  // 12 significant digits: mantissa carries 11 decimals.
  const auto pos = r.out.find("delta_m");
  const auto eq = r.out.find('=', pos);
  const std::string token = r.out.substr(eq + 2, r.out.find('\n', eq) - eq - 2);
  CHECK(token.find('e') != std::string::npos);
  CHECK(token.find('.') + 12 == token.find('e'));
}

TEST_CASE("delta at zero height is all zeros") {
  const CliResult r = run_cli("delta --height 0");
  CHECK(r.code == 0);
  CHECK(field(r.out, "sigma_c_m") == 0.0);
  CHECK(field(r.out, "sigma_sd_m") == 0.0);
  CHECK(field(r.out, "delta_m") == 0.0);
}

TEST_CASE("delta --method both reports consistent values") {
  const CliResult r = run_cli("delta --height 4e5 --method both");
  CHECK(r.code == 0);
  const double exact = field(r.out, "delta_exact_m");
  const double weak = field(r.out, "delta_weak_m");
  CHECK(std::fabs(exact - weak) / std::fabs(weak) < 0.10);
}

TEST_CASE("run reproduces the curve points") {
  SUBCASE("weak-field method at 400 km") {
    const CliResult r = run_cli("run --height 4e5 --source pdc --chi 0.01 --method weak");
    CHECK(r.code == 0);
    CHECK(field(r.out, "C_N") == doctest::Approx(0.048).epsilon(0.01));
  }
  SUBCASE("default method is exact") {
    const CliResult r = run_cli("run --height 4e5 --source pdc --chi 0.01");
    CHECK(r.code == 0);
    CHECK(field(r.out, "C_N") == doctest::Approx(0.0609466181254).epsilon(1e-9));
  }
  SUBCASE("coherent pulses stay correlated") {
    const CliResult r = run_cli("run --height 4e5 --source coherent --alpha 1");
    CHECK(r.code == 0);
    CHECK(field(r.out, "C") == 1.0);
    CHECK(field(r.out, "C_N") == 1.0);
  }
  SUBCASE("swapped paths cancel the decoherence") {
    const CliResult r = run_cli("run --height 4e5 --source pdc --chi 0.01 --swap");
    CHECK(r.code == 0);
    CHECK(field(r.out, "C_N") == 1.0);
  }
}

TEST_CASE("sweep writes the documented CSV") {
  const fs::path out = "sweep_small.csv";
  const CliResult r = run_cli("sweep --steps 2 --out " + out.string());
  CHECK(r.code == 0);
  const Csv csv = parse_csv(slurp(out));
  CHECK(csv.header == "h_m,sigma_c_m,sigma_sd_m,delta_m,overlap,C,C_N");
  CHECK(csv.rows.size() == 2);
  CHECK(csv.rows[0].size() == 7);
  CHECK(manifest_value(csv, "re") == "6.38000000000e+06");
  CHECK(manifest_value(csv, "source") == "pdc");
  CHECK(!manifest_value(csv, "timestamp").empty());
  fs::remove(out);
}

TEST_CASE("default sweep reproduces the reference curve") {
  const fs::path out = "sweep_curve.csv";
  const CliResult r = run_cli("sweep --method weak --out " + out.string());
  CHECK(r.code == 0);
  const Csv csv = parse_csv(slurp(out));
  REQUIRE(csv.rows.size() == 201);
  CHECK(csv.rows.front()[0] == 0.0);
  CHECK(csv.rows.front()[6] == 1.0);
  CHECK(csv.rows[100][0] == 4.0e5);
  CHECK(csv.rows[100][6] == doctest::Approx(0.048).epsilon(0.01));
  CHECK(csv.rows.back()[6] < 1.0e-20);
  for (std::size_t i = 1; i < csv.rows.size(); ++i) {
    CHECK(csv.rows[i][6] <= csv.rows[i - 1][6]);
  }
  fs::remove(out);
}

TEST_CASE("coherent sweep keeps C_N at one") {
  const fs::path out = "sweep_coherent.csv";
  const CliResult r =
      run_cli("sweep --source coherent --alpha 0.7 --steps 21 --out " + out.string());
  CHECK(r.code == 0);
  const Csv csv = parse_csv(slurp(out));
  for (const auto& row : csv.rows) CHECK(row[6] == 1.0);
  fs::remove(out);
}

TEST_CASE("identical invocations produce identical bodies") {
  const fs::path a = "sweep_a.csv";
  const fs::path b = "sweep_b.csv";
  CHECK(run_cli("sweep --steps 41 --out " + a.string()).code == 0);
  CHECK(run_cli("sweep --steps 41 --out " + b.string()).code == 0);
  CHECK(body_without_timestamp(slurp(a)) == body_without_timestamp(slurp(b)));
  fs::remove(a);
  fs::remove(b);
}

TEST_CASE("a parsed CSV re-evaluates to the same C_N") {
  const fs::path out = "sweep_roundtrip.csv";
  CHECK(run_cli("sweep --method weak --steps 81 --out " + out.string()).code == 0);
  const Csv csv = parse_csv(slurp(out));
  fs::remove(out);

  using namespace gravdec;
  experiment::ExperimentConfig config{
      geometry::MetricContext{std::stod(manifest_value(csv, "M")),
                              std::stod(manifest_value(csv, "re"))},
      geometry::PathGeometry{0.0},
      modes::gaussian_mode(std::stod(manifest_value(csv, "dt")),
                           std::stod(manifest_value(csv, "dx"))),
      opalg::pdc_source(std::stod(manifest_value(csv, "chi"))),
      manifest_value(csv, "delta-method") == "weak" ? experiment::DeltaMethod::WeakField
                                                    : experiment::DeltaMethod::Exact,
      manifest_value(csv, "swap") == "1"};

  for (const auto& row : csv.rows) {
    config.path.height = row[0];
    const double recomputed = experiment::run(config).normalized;
    CHECK(std::fabs(row[6] - recomputed) <= 1.0e-12 * std::max(1.0, std::fabs(recomputed)));
  }
}

TEST_CASE("svg output is a plausible line plot") {
  const fs::path out = "sweep_svg.csv";
  const fs::path svg = "sweep_plot.svg";
  const CliResult r =
      run_cli("sweep --steps 41 --out " + out.string() + " --svg " + svg.string());
  CHECK(r.code == 0);
  const std::string body = slurp(svg);
  CHECK(body.rfind("<?xml", 0) == 0);
  CHECK(body.find("<svg") != std::string::npos);
  CHECK(body.find("<polyline") != std::string::npos);
  CHECK(body.find("C_N") != std::string::npos);
  fs::remove(out);
  fs::remove(svg);
}

TEST_CASE("parallel sweep matches the serial body") {
  const fs::path a = "sweep_serial.csv";
  const fs::path b = "sweep_jobs.csv";
  CHECK(run_cli("sweep --steps 41 --out " + a.string()).code == 0);
  CHECK(run_cli("sweep --steps 41 --jobs 4 --out " + b.string()).code == 0);
  CHECK(body_without_timestamp(slurp(a)) == body_without_timestamp(slurp(b)));
  fs::remove(a);
  fs::remove(b);
}

TEST_CASE("exit codes follow the contract") {
  CHECK(run_cli("delta").code == 2);                              // missing --height
  CHECK(run_cli("delta --height banana").code == 2);              // malformed value
  CHECK(run_cli("delta --height 1 --frobnicate 2").code == 2);    // unknown flag
  CHECK(run_cli("frobnicate").code == 2);                         // unknown command
  CHECK(run_cli("run --height -5 --source pdc --chi 0.01").code == 3);   // domain
  CHECK(run_cli("run --height 1 --source pdc --chi 0.5").code == 3);     // chi cap
  CHECK(run_cli("sweep --steps 1 --out x.csv").code == 3);               // bad grid
  CHECK(run_cli("sweep --out /nonexistent/dir/x.csv").code == 4);        // I/O
  CHECK(!fs::exists("/nonexistent/dir/x.csv"));
  CHECK(run_cli("--help").code == 0);
}

TEST_CASE("config files supply defaults that flags override") {
  const fs::path config = write_temp("cli_config_a.cfg",
                                     "# reference shell\n"
                                     "re = 6.38e6\n"
                                     "chi = 0.02\n"
                                     "method = weak\n");
  const fs::path out = "sweep_config.csv";
  const CliResult r = run_cli("sweep --config " + config.string() +
                              " --chi 0.01 --steps 2 --out " + out.string());
  CHECK(r.code == 0);
  const Csv csv = parse_csv(slurp(out));
  CHECK(manifest_value(csv, "chi") == "1.00000000000e-02");  // flag wins
  CHECK(manifest_value(csv, "delta-method") == "weak");      // file survives
  fs::remove(config);
  fs::remove(out);
}

TEST_CASE("config file errors") {
  const fs::path unknown = write_temp("cli_config_b.cfg", "frequency = 12\n");
  const CliResult r1 = run_cli("run --height 0 --config " + unknown.string());
  CHECK(r1.code == 2);
  CHECK(r1.err.find("cli_config_b.cfg:1") != std::string::npos);

  const fs::path bad_chi = write_temp("cli_config_c.cfg", "chi = 0.5\n");
  CHECK(run_cli("run --height 0 --config " + bad_chi.string()).code == 3);

  const fs::path horizon = write_temp("cli_config_d.cfg", "re = 1e-3\n");
  CHECK(run_cli("run --height 0 --config " + horizon.string()).code == 3);

  fs::remove(unknown);
  fs::remove(bad_chi);
  fs::remove(horizon);
}

TEST_CASE("load_config applies defaults and validation") {
  using namespace gravdec;

  const fs::path empty = write_temp("cli_config_e.cfg", "\n# nothing here\n");
  const experiment::ExperimentConfig config = cli::load_config(empty);
  CHECK(config.metric.reference_radius == 6.38e6);
  CHECK(config.metric.mass_parameter == 4.432e-3);
  CHECK(config.mode.gaussian().width_t == 1.0e-5);
  CHECK(config.mode.gaussian().width_x == 1.0e-3);
  CHECK(std::get<opalg::PdcSource>(config.source).chi == 0.01);
  CHECK(config.delta_method == experiment::DeltaMethod::Exact);
  CHECK_FALSE(config.swap_paths);
  fs::remove(empty);

  const fs::path coherent = write_temp("cli_config_f.cfg",
                                       "source = coherent\n"
                                       "alpha = 0.5\n"
                                       "swap = true\n");
  const experiment::ExperimentConfig with_file = cli::load_config(coherent);
  CHECK(std::get<opalg::CoherentSource>(with_file.source).alpha ==
        std::complex<double>{0.5, 0.0});
  CHECK(with_file.swap_paths);
  fs::remove(coherent);

  const fs::path bad = write_temp("cli_config_g.cfg", "re 6.38e6\n");
  CHECK_THROWS_AS(cli::load_config(bad), std::invalid_argument);
  fs::remove(bad);
}
