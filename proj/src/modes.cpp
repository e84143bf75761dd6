#include "gravdec/modes.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>
#include <string>

#include "gravdec/quadrature.hpp"

namespace gravdec::modes {

namespace {

constexpr double kUnderflowClamp = 1.0e-300;

void check_label(const SpaceTimeLabel& label) {
  if (!std::isfinite(label.s) || !std::isfinite(label.l)) {
    throw std::invalid_argument("space-time label must be finite");
  }
}

double clamp_underflow(double k) { return k < kUnderflowClamp ? 0.0 : k; }

// Trapezoidal edge weight.
double edge_weight(std::size_t i, std::size_t count) {
  return (i == 0 || i + 1 == count) ? 0.5 : 1.0;
}

double gaussian_overlap_closed_form(const GaussianEnvelope& g, const SpaceTimeLabel& a,
                                    const SpaceTimeLabel& b) {
  const double ds = a.s - b.s;
  const double dl = a.l - b.l;
  const double arg = ds * ds / (2.0 * g.width_t * g.width_t) +
                     dl * dl / (2.0 * g.width_x * g.width_x);
  return clamp_underflow(std::exp(-arg));
}

// Nested adaptive quadrature in coordinates scaled by the widths and centred
// on the midpoint of the two labels, where the product of the displaced
// copies always concentrates.
double gaussian_overlap_quadrature(const GaussianEnvelope& g, const SpaceTimeLabel& a,
                                   const SpaceTimeLabel& b) {
  const double us = (a.s - b.s) / (2.0 * g.width_t);
  const double vx = (a.l - b.l) / (2.0 * g.width_x);
  constexpr double kBox = 8.0;

  auto profile = [](double u, double offset) {
    return std::exp(-(u - offset) * (u - offset) - (u + offset) * (u + offset));
  };

  auto inner_integral = [&](double u) {
    const double row = profile(u, us);
    auto res = quad::integrate([&](double v) { return row * profile(v, vx); }, -kBox,
                               kBox, 1.0e-16, 1.0e-13);
    if (!res.converged) throw std::runtime_error("overlap quadrature (inner) did not converge");
    return res.value;
  };

  auto res = quad::integrate(inner_integral, -kBox, kBox, 1.0e-15, 1.0e-13);
  if (!res.converged) throw std::runtime_error("overlap quadrature (outer) did not converge");
  return clamp_underflow(2.0 / std::numbers::pi * res.value);
}

double tabulated_overlap(const TabulatedEnvelope& g, const SpaceTimeLabel& a,
                         const SpaceTimeLabel& b) {
  for (const SpaceTimeLabel& label : {a, b}) {
    const bool covered = std::fabs(label.s) + 6.0 * g.width_t <= g.half_extent_t() &&
                         std::fabs(label.l) + 6.0 * g.width_x <= g.half_extent_x();
    if (!covered) {
      throw GridCoverageError(
          "tabulated grid does not extend six widths beyond the requested labels");
    }
  }

  const double t0 = -g.half_extent_t();
  const double x0 = -g.half_extent_x();
  double acc = 0.0;
  for (std::size_t i = 0; i < g.count_t; ++i) {
    const double t = t0 + g.spacing_t * static_cast<double>(i);
    const double wt = edge_weight(i, g.count_t);
    double row = 0.0;
    for (std::size_t j = 0; j < g.count_x; ++j) {
      const double x = x0 + g.spacing_x * static_cast<double>(j);
      const double va = g.value(t - a.s, x - a.l);
      if (va == 0.0) continue;
      const double vb = g.value(t - b.s, x - b.l);
      row += edge_weight(j, g.count_x) * va * vb;
    }
    acc += wt * row;
  }
  return clamp_underflow(acc * g.spacing_t * g.spacing_x);
}

}  // namespace

double TabulatedEnvelope::value(double t, double x) const {
  const double fi = t / spacing_t + 0.5 * static_cast<double>(count_t - 1);
  const double fj = x / spacing_x + 0.5 * static_cast<double>(count_x - 1);
  if (fi < 0.0 || fj < 0.0 || fi > static_cast<double>(count_t - 1) ||
      fj > static_cast<double>(count_x - 1)) {
    return 0.0;
  }
  std::size_t i = static_cast<std::size_t>(fi);
  std::size_t j = static_cast<std::size_t>(fj);
  if (i + 1 >= count_t) i = count_t - 2;
  if (j + 1 >= count_x) j = count_x - 2;
  const double ft = fi - static_cast<double>(i);
  const double fx = fj - static_cast<double>(j);

  const double a00 = amplitude[i * count_x + j];
  const double a01 = amplitude[i * count_x + j + 1];
  const double a10 = amplitude[(i + 1) * count_x + j];
  const double a11 = amplitude[(i + 1) * count_x + j + 1];
  return (1.0 - ft) * ((1.0 - fx) * a00 + fx * a01) + ft * ((1.0 - fx) * a10 + fx * a11);
}

double ModeFunction::value(double t, double x) const {
  if (is_gaussian()) {
    const GaussianEnvelope& g = gaussian();
    const double amp = std::sqrt(2.0 / (std::numbers::pi * g.width_t * g.width_x));
    return amp * std::exp(-t * t / (g.width_t * g.width_t) - x * x / (g.width_x * g.width_x));
  }
  return tabulated().value(t, x);
}

ModeFunction gaussian_mode(double width_t, double width_x) {
  if (!std::isfinite(width_t) || !std::isfinite(width_x) || width_t <= 0.0 ||
      width_x <= 0.0) {
    throw std::invalid_argument("gaussian mode widths must be positive");
  }
  return ModeFunction(GaussianEnvelope{width_t, width_x});
}

ModeFunction tabulated_mode(double spacing_t, double spacing_x, std::size_t count_t,
                            std::size_t count_x, std::vector<double> samples) {
  if (!std::isfinite(spacing_t) || !std::isfinite(spacing_x) || spacing_t <= 0.0 ||
      spacing_x <= 0.0) {
    throw std::invalid_argument("grid spacings must be positive");
  }
  if (count_t < 2 || count_x < 2) {
    throw std::invalid_argument("tabulated grid needs at least two samples per axis");
  }
  if (samples.size() != count_t * count_x) {
    throw std::invalid_argument("sample count does not match the grid dimensions");
  }
  for (double v : samples) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("mode amplitudes must be finite and non-negative");
    }
  }

  TabulatedEnvelope env;
  env.spacing_t = spacing_t;
  env.spacing_x = spacing_x;
  env.count_t = count_t;
  env.count_x = count_x;
  env.amplitude = std::move(samples);

  // Normalise the trapezoidal L2 norm to one.
  double norm_sq = 0.0;
  for (std::size_t i = 0; i < count_t; ++i) {
    const double wt = edge_weight(i, count_t);
    for (std::size_t j = 0; j < count_x; ++j) {
      const double v = env.amplitude[i * count_x + j];
      norm_sq += wt * edge_weight(j, count_x) * v * v;
    }
  }
  norm_sq *= spacing_t * spacing_x;
  if (!(norm_sq > 0.0) || !std::isfinite(norm_sq)) {
    throw std::invalid_argument("tabulated mode has zero or non-finite norm");
  }
  const double scale = 1.0 / std::sqrt(norm_sq);
  for (double& v : env.amplitude) v *= scale;

  // Effective Gaussian-equivalent widths from the second moments of G^2
  // (variance d^2/4 for the Gaussian profile).
  const double t0 = -env.half_extent_t();
  const double x0 = -env.half_extent_x();
  double var_t = 0.0;
  double var_x = 0.0;
  for (std::size_t i = 0; i < count_t; ++i) {
    const double t = t0 + spacing_t * static_cast<double>(i);
    const double wt = edge_weight(i, count_t);
    for (std::size_t j = 0; j < count_x; ++j) {
      const double x = x0 + spacing_x * static_cast<double>(j);
      const double g2 = env.amplitude[i * count_x + j] * env.amplitude[i * count_x + j];
      const double w = wt * edge_weight(j, count_x) * g2;
      var_t += w * t * t;
      var_x += w * x * x;
    }
  }
  var_t *= spacing_t * spacing_x;
  var_x *= spacing_t * spacing_x;
  env.width_t = 2.0 * std::sqrt(var_t);
  env.width_x = 2.0 * std::sqrt(var_x);
  if (!(env.width_t > 0.0) || !(env.width_x > 0.0)) {
    throw std::invalid_argument("tabulated mode has degenerate support");
  }

  return ModeFunction(std::variant<GaussianEnvelope, TabulatedEnvelope>(std::move(env)));
}

ModeFunction load_tabulated_mode(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) {
    throw std::invalid_argument("grid file is empty");
  }
  std::istringstream hs(header);
  std::string hash, dt_key, dx_key;
  double spacing_t = 0.0, spacing_x = 0.0;
  hs >> hash >> dt_key >> spacing_t >> dx_key >> spacing_x;
  if (hs.fail() || hash != "#" || dt_key != "dt" || dx_key != "dx") {
    throw std::invalid_argument("grid file header must be '# dt <spacing> dx <spacing>'");
  }

  std::vector<double> samples;
  std::size_t count_t = 0;
  std::size_t count_x = 0;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::vector<double> row;
    double v = 0.0;
    while (ls >> v) row.push_back(v);
    if (row.empty()) continue;
    if (count_x == 0) {
      count_x = row.size();
    } else if (row.size() != count_x) {
      throw std::invalid_argument("grid file rows have inconsistent lengths");
    }
    samples.insert(samples.end(), row.begin(), row.end());
    ++count_t;
  }
  if (count_t == 0) {
    throw std::invalid_argument("grid file has no amplitude rows");
  }
  return tabulated_mode(spacing_t, spacing_x, count_t, count_x, std::move(samples));
}

ModeFunction load_tabulated_mode(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("cannot open grid file: " + file.string());
  }
  return load_tabulated_mode(in);
}

double overlap(const ModeFunction& mode, const SpaceTimeLabel& a, const SpaceTimeLabel& b) {
  check_label(a);
  check_label(b);
  if (mode.is_gaussian()) return gaussian_overlap_closed_form(mode.gaussian(), a, b);
  return tabulated_overlap(mode.tabulated(), a, b);
}

double overlap_numeric(const ModeFunction& mode, const SpaceTimeLabel& a,
                       const SpaceTimeLabel& b) {
  check_label(a);
  check_label(b);
  if (mode.is_gaussian()) return gaussian_overlap_quadrature(mode.gaussian(), a, b);
  return tabulated_overlap(mode.tabulated(), a, b);
}

}  // namespace gravdec::modes
