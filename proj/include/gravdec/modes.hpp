#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <variant>
#include <vector>

namespace gravdec::modes {

/// Space-time label (s, l) attached to an evolved mode operator, both in
/// geometric metres. Free optical propagation shifts s and l together.
struct SpaceTimeLabel {
  double s = 0.0;
  double l = 0.0;
  friend bool operator==(const SpaceTimeLabel&, const SpaceTimeLabel&) = default;
};

/// Thrown when a tabulated grid does not cover the supports implied by the
/// requested labels. Silent truncation would fake decoherence, so this is an
/// error rather than an implicit zero.
struct GridCoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// G(t, x) = sqrt(2 / (pi dt dx)) exp(-t^2/dt^2 - x^2/dx^2); unit L2 norm by
/// construction.
struct GaussianEnvelope {
  double width_t = 0.0;
  double width_x = 0.0;
};

/// Real non-negative envelope sampled on a uniform grid centred on (0, 0),
/// stored row-major with one row per t sample. Amplitudes are rescaled at
/// construction so the trapezoidal L2 norm is exactly one.
struct TabulatedEnvelope {
  double spacing_t = 0.0;
  double spacing_x = 0.0;
  std::size_t count_t = 0;
  std::size_t count_x = 0;
  std::vector<double> amplitude;

  // Effective widths (Gaussian-equivalent d) measured from the samples.
  double width_t = 0.0;
  double width_x = 0.0;

  double half_extent_t() const { return 0.5 * spacing_t * static_cast<double>(count_t - 1); }
  double half_extent_x() const { return 0.5 * spacing_x * static_cast<double>(count_x - 1); }

  /// Bilinear sample of G at (t, x); zero outside the grid.
  double value(double t, double x) const;
};

/// Normalised spatio-temporal mode envelope; immutable after construction.
class ModeFunction {
 public:
  bool is_gaussian() const { return std::holds_alternative<GaussianEnvelope>(envelope_); }
  const GaussianEnvelope& gaussian() const { return std::get<GaussianEnvelope>(envelope_); }
  const TabulatedEnvelope& tabulated() const { return std::get<TabulatedEnvelope>(envelope_); }

  /// G(t, x).
  double value(double t, double x) const;

 private:
  friend ModeFunction gaussian_mode(double, double);
  friend ModeFunction tabulated_mode(double, double, std::size_t, std::size_t,
                                     std::vector<double>);
  explicit ModeFunction(std::variant<GaussianEnvelope, TabulatedEnvelope> envelope)
      : envelope_(std::move(envelope)) {}

  std::variant<GaussianEnvelope, TabulatedEnvelope> envelope_;
};

ModeFunction gaussian_mode(double width_t, double width_x);

/// Builds a tabulated mode from row-major samples (count_t rows of count_x
/// values); normalises them and measures the effective widths.
ModeFunction tabulated_mode(double spacing_t, double spacing_x, std::size_t count_t,
                            std::size_t count_x, std::vector<double> samples);

/// Grid-file loader. Format: a header line "# dt <spacing> dx <spacing>"
/// followed by whitespace-separated amplitude rows, one row per t sample.
ModeFunction load_tabulated_mode(std::istream& in);
ModeFunction load_tabulated_mode(const std::filesystem::path& file);

/// Overlap commutator K between copies of the mode displaced to the two
/// labels: the double integral of G(t - a.s, x - a.l) G(t - b.s, x - b.l).
/// Gaussian modes use the closed form exp(-ds^2/(2 dt^2) - dl^2/(2 dx^2));
/// tabulated modes are integrated on their grid. Values below 1e-300 are
/// flushed to exactly zero.
double overlap(const ModeFunction& mode, const SpaceTimeLabel& a, const SpaceTimeLabel& b);

/// Quadrature route for the same quantity; cross-check for the Gaussian
/// closed form and identical to `overlap` for tabulated modes.
double overlap_numeric(const ModeFunction& mode, const SpaceTimeLabel& a,
                       const SpaceTimeLabel& b);

}  // namespace gravdec::modes
