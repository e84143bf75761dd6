#include "gravdec/cli.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace gravdec::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

struct UsageError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

const char* kUsage =
    "usage: gravdec <delta|run|sweep> [--config FILE] [flags]\n"
    "\n"
    "common flags   --re M  --M M  --dt M  --dx M  --method exact|weak\n"
    "               --source pdc|coherent  --chi X  --alpha X  --swap\n"
    "delta          --height M  [--method exact|weak|both]\n"
    "run            --height M\n"
    "sweep          --out FILE  [--h-min M] [--h-max M] [--steps N]\n"
    "               [--svg FILE] [--jobs N]\n";

// Fig. 2-style defaults; sweep with no flags reproduces the reference curve.
struct Params {
  double re = 6.38e6;
  double mass = 4.432e-3;
  double dt = 1.0e-5;
  double dx = 1.0e-3;
  std::string source = "pdc";
  double alpha = 1.0;
  double chi = 0.01;
  std::string method = "exact";
  bool swap = false;
};

std::string format_value(double v) {
  if (v == 0.0) v = 0.0;  // normalise -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  return buf;
}

double parse_double(const std::string& text, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
    throw UsageError("invalid number for " + what + ": '" + text + "'");
  }
  return v;
}

long parse_long(const std::string& text, const std::string& what) {
  errno = 0;
  char* end = nullptr;
  const long v = std::strtol(text.c_str(), &end, 10);
  if (end == text.c_str() || *end != '\0' || errno == ERANGE) {
    throw UsageError("invalid integer for " + what + ": '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& text, const std::string& what) {
  if (text == "1" || text == "true") return true;
  if (text == "0" || text == "false") return false;
  throw UsageError("invalid boolean for " + what + ": '" + text + "'");
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

void apply_key(Params& params, const std::string& key, const std::string& value,
               const std::string& where) {
  if (key == "re") {
    params.re = parse_double(value, where);
  } else if (key == "M") {
    params.mass = parse_double(value, where);
  } else if (key == "dt") {
    params.dt = parse_double(value, where);
  } else if (key == "dx") {
    params.dx = parse_double(value, where);
  } else if (key == "source") {
    if (value != "pdc" && value != "coherent") {
      throw UsageError(where + ": source must be 'pdc' or 'coherent'");
    }
    params.source = value;
  } else if (key == "alpha") {
    params.alpha = parse_double(value, where);
  } else if (key == "chi") {
    params.chi = parse_double(value, where);
  } else if (key == "method") {
    if (value != "exact" && value != "weak") {
      throw UsageError(where + ": method must be 'exact' or 'weak'");
    }
    params.method = value;
  } else if (key == "swap") {
    params.swap = parse_bool(value, where);
  } else {
    throw UsageError(where + ": unknown key '" + key + "'");
  }
}

void apply_config_file(Params& params, const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open config file: " + file.string());

  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto comment = line.find('#');
    if (comment != std::string::npos) line.erase(comment);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    const std::string where = file.string() + ":" + std::to_string(line_number);
    if (eq == std::string::npos) {
      throw UsageError(where + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw UsageError(where + ": expected 'key = value'");
    }
    apply_key(params, key, value, where);
  }
}

experiment::ExperimentConfig make_config(const Params& params, double height) {
  geometry::MetricContext metric{params.mass, params.re};
  geometry::PathGeometry path{height};
  // Validate the metric and path eagerly so config errors surface here.
  geometry::shell_time_climb(metric, path);

  opalg::SourceModel source = params.source == "pdc"
                                  ? opalg::pdc_source(params.chi)
                                  : opalg::coherent_source({params.alpha, 0.0});
  return experiment::ExperimentConfig{
      metric,
      path,
      modes::gaussian_mode(params.dt, params.dx),
      std::move(source),
      params.method == "weak" ? experiment::DeltaMethod::WeakField
                              : experiment::DeltaMethod::Exact,
      params.swap};
}

// --- flag handling ----------------------------------------------------------

struct FlagSet {
  std::map<std::string, std::string> values;
  std::set<std::string> switches;

  bool has(const std::string& name) const {
    return values.count(name) != 0 || switches.count(name) != 0;
  }
  std::optional<std::string> get(const std::string& name) const {
    auto it = values.find(name);
    if (it == values.end()) return std::nullopt;
    return it->second;
  }
};

FlagSet parse_flags(const std::vector<std::string>& args,
                    const std::set<std::string>& value_flags,
                    const std::set<std::string>& switch_flags) {
  FlagSet flags;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const std::string& arg = args[i];
    if (arg.rfind("--", 0) != 0) {
      throw UsageError("unexpected argument '" + arg + "'");
    }
    const std::string name = arg.substr(2);
    if (switch_flags.count(name) != 0) {
      flags.switches.insert(name);
      continue;
    }
    if (value_flags.count(name) == 0) {
      throw UsageError("unknown flag '--" + name + "'");
    }
    if (i + 1 >= args.size()) {
      throw UsageError("flag '--" + name + "' needs a value");
    }
    flags.values[name] = args[++i];
  }
  return flags;
}

const std::set<std::string> kParamValueFlags = {"config", "re",    "M",     "dt",
                                                "dx",     "source", "alpha", "chi",
                                                "method"};

Params params_from_flags(const FlagSet& flags, bool allow_both_method) {
  Params params;
  if (auto config = flags.get("config")) apply_config_file(params, *config);
  for (const char* key : {"re", "M", "dt", "dx", "source", "alpha", "chi"}) {
    if (auto v = flags.get(key)) apply_key(params, key, *v, std::string("--") + key);
  }
  if (auto v = flags.get("method")) {
    if (allow_both_method && *v == "both") {
      params.method = "both";
    } else {
      apply_key(params, "method", *v, "--method");
    }
  }
  if (flags.has("swap")) params.swap = true;
  return params;
}

double required_height(const FlagSet& flags) {
  auto height = flags.get("height");
  if (!height) throw UsageError("--height is required");
  return parse_double(*height, "--height");
}

// --- output -----------------------------------------------------------------

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm_utc{};
  gmtime_r(&now, &tm_utc);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
  return buf;
}

void write_manifest(std::ostream& os, const Params& params,
                    const std::vector<std::pair<std::string, std::string>>& extras) {
  os << "# version = " << kVersion << "\n";
  os << "# timestamp = " << utc_timestamp() << "\n";
  os << "# re = " << format_value(params.re) << "\n";
  os << "# M = " << format_value(params.mass) << "\n";
  os << "# dt = " << format_value(params.dt) << "\n";
  os << "# dx = " << format_value(params.dx) << "\n";
  os << "# source = " << params.source << "\n";
  if (params.source == "pdc") {
    os << "# chi = " << format_value(params.chi) << "\n";
  } else {
    os << "# alpha = " << format_value(params.alpha) << "\n";
  }
  os << "# delta-method = " << params.method << "\n";
  os << "# swap = " << (params.swap ? 1 : 0) << "\n";
  for (const auto& [key, value] : extras) {
    os << "# " << key << " = " << value << "\n";
  }
}

void print_result(double height, const experiment::ScenarioResult& result) {
  std::cout << "h_m        = " << format_value(height) << "\n"
            << "sigma_c_m  = " << format_value(result.sigma_c) << "\n"
            << "sigma_sd_m = " << format_value(result.sigma_sd) << "\n"
            << "delta_m    = " << format_value(result.delta) << "\n"
            << "overlap    = " << format_value(result.overlap) << "\n"
            << "C          = " << format_value(result.coincidence) << "\n"
            << "C_N        = " << format_value(result.normalized) << "\n";
}

void write_svg(std::ostream& os, const std::vector<std::pair<double, experiment::ScenarioResult>>& rows,
               double h_min, double h_max) {
  constexpr int kWidth = 800, kHeight = 500;
  constexpr int kLeft = 80, kRight = 760, kTop = 40, kBottom = 440;

  auto x_of = [&](double h) {
    return kLeft + (h - h_min) / (h_max - h_min) * (kRight - kLeft);
  };
  auto y_of = [&](double cn) { return kBottom - cn * (kBottom - kTop); };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
     << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n"
     << "  <rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n"
     << "  <line x1=\"" << kLeft << "\" y1=\"" << kBottom << "\" x2=\"" << kRight
     << "\" y2=\"" << kBottom << "\" stroke=\"black\"/>\n"
     << "  <line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
     << kBottom << "\" stroke=\"black\"/>\n";

  for (int i = 0; i <= 4; ++i) {
    const double frac = i / 4.0;
    const double h = h_min + frac * (h_max - h_min);
    const double x = x_of(h);
    os << "  <line x1=\"" << x << "\" y1=\"" << kBottom << "\" x2=\"" << x << "\" y2=\""
       << kBottom + 6 << "\" stroke=\"black\"/>\n"
       << "  <text x=\"" << x << "\" y=\"" << kBottom + 24
       << "\" font-size=\"13\" text-anchor=\"middle\">" << std::defaultfloat << h
       << "</text>\n";
    const double cn = frac;
    const double y = y_of(cn);
    os << "  <line x1=\"" << kLeft - 6 << "\" y1=\"" << y << "\" x2=\"" << kLeft
       << "\" y2=\"" << y << "\" stroke=\"black\"/>\n"
       << "  <text x=\"" << kLeft - 10 << "\" y=\"" << y + 4
       << "\" font-size=\"13\" text-anchor=\"end\">" << cn << "</text>\n";
  }
  os << "  <text x=\"" << (kLeft + kRight) / 2 << "\" y=\"" << kBottom + 48
     << "\" font-size=\"15\" text-anchor=\"middle\">h (m)</text>\n"
     << "  <text x=\"22\" y=\"" << (kTop + kBottom) / 2
     << "\" font-size=\"15\" text-anchor=\"middle\" transform=\"rotate(-90 22 "
     << (kTop + kBottom) / 2 << ")\">C_N</text>\n"
     << "  <polyline fill=\"none\" stroke=\"#1661a8\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (i != 0) os << " ";
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f,%.2f", x_of(rows[i].first),
                  y_of(rows[i].second.normalized));
    os << buf;
  }
  os << "\"/>\n</svg>\n";
}

template <class WriteBody>
void write_file_or_clean_up(const std::filesystem::path& path, WriteBody&& body) {
  {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path.string());
    body(out);
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      std::filesystem::remove(path, ec);
      throw IoError("failed while writing: " + path.string());
    }
  }
}

// --- commands ---------------------------------------------------------------

int cmd_delta(const std::vector<std::string>& args) {
  auto value_flags = kParamValueFlags;
  value_flags.insert("height");
  const FlagSet flags = parse_flags(args, value_flags, {"swap"});
  const Params params = params_from_flags(flags, /*allow_both_method=*/true);
  const double height = required_height(flags);

  const geometry::MetricContext metric{params.mass, params.re};
  const geometry::PathGeometry path{height};
  const double sigma_c = geometry::shell_time_climb(metric, path);
  const double sigma_sd = geometry::sd_shell_time_climb(metric, path);

  std::cout << "h_m        = " << format_value(height) << "\n"
            << "sigma_c_m  = " << format_value(sigma_c) << "\n"
            << "sigma_sd_m = " << format_value(sigma_sd) << "\n";
  if (params.method == "both") {
    std::cout << "delta_exact_m = " << format_value(geometry::delta_exact(metric, path))
              << "\n"
              << "delta_weak_m  = "
              << format_value(geometry::delta_weak_field(metric, path)) << "\n";
  } else if (params.method == "weak") {
    std::cout << "delta_m    = " << format_value(geometry::delta_weak_field(metric, path))
              << "\n";
  } else {
    std::cout << "delta_m    = " << format_value(geometry::delta_exact(metric, path))
              << "\n";
  }
  return 0;
}

int cmd_run(const std::vector<std::string>& args) {
  auto value_flags = kParamValueFlags;
  value_flags.insert("height");
  const FlagSet flags = parse_flags(args, value_flags, {"swap"});
  const Params params = params_from_flags(flags, /*allow_both_method=*/false);
  const double height = required_height(flags);

  const auto config = make_config(params, height);
  print_result(height, experiment::run(config));
  return 0;
}

int cmd_sweep(const std::vector<std::string>& args) {
  auto value_flags = kParamValueFlags;
  for (const char* extra : {"h-min", "h-max", "steps", "out", "svg", "jobs"}) {
    value_flags.insert(extra);
  }
  const FlagSet flags = parse_flags(args, value_flags, {"swap"});
  const Params params = params_from_flags(flags, /*allow_both_method=*/false);

  const double h_min = flags.get("h-min") ? parse_double(*flags.get("h-min"), "--h-min") : 0.0;
  const double h_max = flags.get("h-max") ? parse_double(*flags.get("h-max"), "--h-max") : 8.0e5;
  const long steps = flags.get("steps") ? parse_long(*flags.get("steps"), "--steps") : 201;
  const long jobs = flags.get("jobs") ? parse_long(*flags.get("jobs"), "--jobs") : 1;
  if (jobs < 1) throw UsageError("--jobs must be at least 1");
  auto out_path = flags.get("out");
  if (!out_path) throw UsageError("--out is required");

  const auto config = make_config(params, 0.0);
  const auto rows = experiment::sweep_heights(config, h_min, h_max, static_cast<int>(steps),
                                              static_cast<unsigned>(jobs));

  const std::vector<std::pair<std::string, std::string>> extras = {
      {"h-min", format_value(h_min)},
      {"h-max", format_value(h_max)},
      {"steps", std::to_string(steps)}};

  write_file_or_clean_up(*out_path, [&](std::ostream& os) {
    write_manifest(os, params, extras);
    os << "h_m,sigma_c_m,sigma_sd_m,delta_m,overlap,C,C_N\n";
    for (const auto& [h, result] : rows) {
      os << format_value(h) << ',' << format_value(result.sigma_c) << ','
         << format_value(result.sigma_sd) << ',' << format_value(result.delta) << ','
         << format_value(result.overlap) << ',' << format_value(result.coincidence) << ','
         << format_value(result.normalized) << "\n";
    }
  });
  std::cout << "wrote " << *out_path << " (" << rows.size() << " rows)\n";

  if (auto svg_path = flags.get("svg")) {
    write_file_or_clean_up(*svg_path,
                           [&](std::ostream& os) { write_svg(os, rows, h_min, h_max); });
    std::cout << "wrote " << *svg_path << "\n";
  }
  return 0;
}

}  // namespace

experiment::ExperimentConfig load_config(const std::filesystem::path& file) {
  Params params;
  apply_config_file(params, file);
  return make_config(params, 0.0);
}

int run_main(int argc, char** argv) {
  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    if (args.empty()) throw UsageError("missing command");
    const std::string command = args.front();
    args.erase(args.begin());

    if (command == "--help" || command == "help") {
      std::cout << kUsage;
      return 0;
    }
    if (command == "delta") return cmd_delta(args);
    if (command == "run") return cmd_run(args);
    if (command == "sweep") return cmd_sweep(args);
    throw UsageError("unknown command '" + command + "'");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << kUsage;
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace gravdec::cli
