#pragma once

namespace gravdec::geometry {

/// Schwarzschild background in geometric units (c = 1, lengths in metres).
/// mass_parameter is M, reference_radius is the reduced circumference r_e of
/// the shell holding the source and both detectors.
struct MetricContext {
  double mass_parameter = 0.0;
  double reference_radius = 0.0;
};

/// Radial distance h from the reference shell to the upper mirror.
struct PathGeometry {
  double height = 0.0;
};

/// Integrated shell-frame time sigma_c for the radial climb from r_e to
/// r_e + h: the integral of dr / sqrt(1 - 2M/r). Closed-form antiderivative,
/// differenced without cancellation.
double shell_time_climb(const MetricContext& ctx, const PathGeometry& path);

/// Same integral by adaptive quadrature; cross-check for the closed form.
double shell_time_climb_numeric(const MetricContext& ctx, const PathGeometry& path);

/// The climb interval as read by clocks on the source/detector shell:
/// sigma_c^(SD) = sqrt(1 - 2M/r_e) * integral of dr / (1 - 2M/r).
double sd_shell_time_climb(const MetricContext& ctx, const PathGeometry& path);

/// Quadrature route for sd_shell_time_climb.
double sd_shell_time_climb_numeric(const MetricContext& ctx, const PathGeometry& path);

/// Path-time asymmetry Delta = 2 * (sigma_c^(SD) - sigma_c), evaluated by
/// adaptive quadrature of the difference integrand so that no significant
/// digits are lost to the near-equal integrals. Non-positive for all valid
/// inputs; about -h^2 M / r_e^2 in the weak field.
double delta_exact(const MetricContext& ctx, const PathGeometry& path);

/// Weak-field approximation Delta = -h^2 M / r_e^2.
double delta_weak_field(const MetricContext& ctx, const PathGeometry& path);

/// Shell-to-shell frequency ratio g = sqrt(1 - 2M/r_emit) / sqrt(1 - 2M/r_final).
/// g < 1 for outward propagation (redshift), 1 when the radii coincide.
double redshift_factor(const MetricContext& ctx, double r_emit, double r_final);

/// One-way SD-shell path length of the horizontal mode; equals
/// sd_shell_time_climb exactly (light moves at unit speed in the shell frame).
double mirror1_distance(const MetricContext& ctx, const PathGeometry& path);

}  // namespace gravdec::geometry
