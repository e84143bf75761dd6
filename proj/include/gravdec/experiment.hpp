#pragma once

#include <stdexcept>
#include <utility>
#include <vector>

#include "gravdec/geometry.hpp"
#include "gravdec/modes.hpp"
#include "gravdec/opalg.hpp"

namespace gravdec::experiment {

enum class DeltaMethod { Exact, WeakField };

/// Full apparatus description: one mode propagating horizontally in the
/// source/detector shell, the other climbing to a mirror at height h, with
/// mirror positions fixed so the SD-shell round-trip times coincide.
/// swap_paths models resending each pulse along the other arm before
/// detection, which cancels the label asymmetry.
struct ExperimentConfig {
  geometry::MetricContext metric;
  geometry::PathGeometry path;
  modes::ModeFunction mode;
  opalg::SourceModel source;
  DeltaMethod delta_method = DeltaMethod::Exact;
  bool swap_paths = false;
};

struct ScenarioResult {
  double delta = 0.0;        // effective label asymmetry (zero when paths are swapped)
  double sigma_c = 0.0;      // integrated shell-frame climb time
  double sigma_sd = 0.0;     // the same interval on SD-shell clocks
  double overlap = 0.0;      // commutator K between the evolved labels
  double coincidence = 0.0;  // exact <n1 n2> from the Wick engine
  double normalized = 0.0;   // second-order normalized rate: K^2 for pdc, C/|alpha|^4 otherwise
};

struct NoCrossingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Evolved-back labels with t0 = 0 and sigma_v1 = 0: label_1 = (0, 0) and
/// label_2 = (-Delta, -Delta). Swapped paths give identical labels.
std::pair<modes::SpaceTimeLabel, modes::SpaceTimeLabel> evolved_labels(
    const ExperimentConfig& config);

/// Path-time asymmetry for the configured method (geometry only; ignores
/// swap_paths).
double path_delta(const ExperimentConfig& config);

ScenarioResult run(const ExperimentConfig& config);

/// Uniform height grid from h_min to h_max inclusive with `steps` points.
/// Grid points may be evaluated on up to `jobs` threads; ordering and values
/// are independent of the schedule.
std::vector<std::pair<double, ScenarioResult>> sweep_heights(const ExperimentConfig& config,
                                                             double h_min, double h_max,
                                                             int steps, unsigned jobs = 1);

/// Height h* at which the normalized coincidence rate has fallen to 1/2,
/// found by bisection on the monotone curve. Throws NoCrossingError if the
/// curve stays above 1/2 out to bracket_max.
double half_decoherence_height(const ExperimentConfig& config, double bracket_max = 1.0e7);

/// Closed-form h* from inverting the weak-field Gaussian curve:
/// h* = sqrt(r_e^2 d_eff sqrt(ln 2) / M) with 1/d_eff^2 = 1/d_t^2 + 1/d_x^2.
double half_decoherence_height_closed_form(const ExperimentConfig& config);

}  // namespace gravdec::experiment
