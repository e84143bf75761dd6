#include "gravdec/geometry.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "gravdec/quadrature.hpp"

namespace gravdec::geometry {

namespace {

constexpr double kHorizonPad = 10.0 * std::numeric_limits<double>::epsilon();

// 1 - 2M/r, the Schwarzschild metric factor.
double metric_factor(double radius, double mass) { return 1.0 - 2.0 * mass / radius; }

void require_outside_horizon(double radius, double mass) {
  if (!std::isfinite(radius) || radius <= 2.0 * mass * (1.0 + kHorizonPad)) {
    throw std::domain_error("radius is at or inside the Schwarzschild horizon");
  }
}

void check(const MetricContext& ctx) {
  if (!std::isfinite(ctx.mass_parameter) || ctx.mass_parameter <= 0.0) {
    throw std::domain_error("mass_parameter must be positive and finite");
  }
  require_outside_horizon(ctx.reference_radius, ctx.mass_parameter);
}

void check(const PathGeometry& path) {
  if (!std::isfinite(path.height) || path.height < 0.0) {
    throw std::domain_error("height must be non-negative and finite");
  }
}

void check(const MetricContext& ctx, const PathGeometry& path) {
  check(ctx);
  check(path);
  require_outside_horizon(ctx.reference_radius + path.height, ctx.mass_parameter);
}

}  // namespace

double shell_time_climb(const MetricContext& ctx, const PathGeometry& path) {
  check(ctx, path);
  const double m = ctx.mass_parameter;
  const double re = ctx.reference_radius;
  const double h = path.height;
  if (h == 0.0) return 0.0;

  // Antiderivative of 1/sqrt(1 - 2M/r) is sqrt(r(r - 2M)) + 2M ln(sqrt(r) + sqrt(r - 2M)).
  // Both differences below are rearranged so every term adds.
  const double rt = re + h;
  const double sqrt_prod_e = std::sqrt(re * (re - 2.0 * m));
  const double sqrt_prod_t = std::sqrt(rt * (rt - 2.0 * m));
  const double root_term = h * (2.0 * re + h - 2.0 * m) / (sqrt_prod_t + sqrt_prod_e);

  const double u_e = std::sqrt(re);
  const double v_e = std::sqrt(re - 2.0 * m);
  const double u_t = std::sqrt(rt);
  const double v_t = std::sqrt(rt - 2.0 * m);
  const double grow = h / (u_t + u_e) + h / (v_t + v_e);
  const double log_term = 2.0 * m * std::log1p(grow / (u_e + v_e));

  return root_term + log_term;
}

double shell_time_climb_numeric(const MetricContext& ctx, const PathGeometry& path) {
  check(ctx, path);
  const double m = ctx.mass_parameter;
  const double re = ctx.reference_radius;
  const double h = path.height;
  if (h == 0.0) return 0.0;

  auto integrand = [m, re](double t) { return 1.0 / std::sqrt(metric_factor(re + t, m)); };
  const auto res = quad::integrate(integrand, 0.0, h, 0.0, 1.0e-13);
  if (!res.converged) throw std::runtime_error("sigma_c quadrature did not converge");
  return res.value;
}

double sd_shell_time_climb(const MetricContext& ctx, const PathGeometry& path) {
  check(ctx, path);
  const double m = ctx.mass_parameter;
  const double re = ctx.reference_radius;
  const double h = path.height;
  if (h == 0.0) return 0.0;

  // Antiderivative of 1/(1 - 2M/r) is r + 2M ln(r - 2M); the difference is
  // h + 2M log1p(h / (r_e - 2M)), scaled by the shell lapse at r_e.
  const double lapse = std::sqrt(metric_factor(re, m));
  return lapse * (h + 2.0 * m * std::log1p(h / (re - 2.0 * m)));
}

double sd_shell_time_climb_numeric(const MetricContext& ctx, const PathGeometry& path) {
  check(ctx, path);
  const double m = ctx.mass_parameter;
  const double re = ctx.reference_radius;
  const double h = path.height;
  if (h == 0.0) return 0.0;

  auto integrand = [m, re](double t) { return 1.0 / metric_factor(re + t, m); };
  const auto res = quad::integrate(integrand, 0.0, h, 0.0, 1.0e-13);
  if (!res.converged) throw std::runtime_error("sigma_sd quadrature did not converge");
  return std::sqrt(metric_factor(re, m)) * res.value;
}

double delta_exact(const MetricContext& ctx, const PathGeometry& path) {
  check(ctx, path);
  const double m = ctx.mass_parameter;
  const double re = ctx.reference_radius;
  const double h = path.height;
  if (h == 0.0) return 0.0;

  // Delta/2 = integral of [sqrt(f_e)/f(r) - 1/sqrt(f(r))] dr. The bracket is
  // algebraically -2Mt / (r_e r f(r) (sqrt(f_e) + sqrt(f(r)))) with r = r_e + t,
  // which avoids subtracting two integrands that agree to ten digits.
  const double sqrt_fe = std::sqrt(metric_factor(re, m));
  auto integrand = [m, re, sqrt_fe](double t) {
    const double r = re + t;
    const double fr = metric_factor(r, m);
    return -2.0 * m * t / (re * r * fr * (sqrt_fe + std::sqrt(fr)));
  };
  const auto res = quad::integrate(integrand, 0.0, h, 1.0e-20, 1.0e-13);
  if (!res.converged) throw std::runtime_error("delta quadrature did not converge");
  return 2.0 * res.value;
}

double delta_weak_field(const MetricContext& ctx, const PathGeometry& path) {
  check(ctx, path);
  const double h = path.height;
  const double scale = (h / ctx.reference_radius) * (h / ctx.reference_radius);
  const double delta = scale * ctx.mass_parameter;
  return delta == 0.0 ? 0.0 : -delta;
}

double redshift_factor(const MetricContext& ctx, double r_emit, double r_final) {
  check(ctx);
  require_outside_horizon(r_emit, ctx.mass_parameter);
  require_outside_horizon(r_final, ctx.mass_parameter);
  return std::sqrt(metric_factor(r_emit, ctx.mass_parameter) /
                   metric_factor(r_final, ctx.mass_parameter));
}

double mirror1_distance(const MetricContext& ctx, const PathGeometry& path) {
  return sd_shell_time_climb(ctx, path);
}

}  // namespace gravdec::geometry
