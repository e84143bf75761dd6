#pragma once

#include <filesystem>

#include "gravdec/experiment.hpp"

namespace gravdec::cli {

/// Key=value configuration file loader. Recognised keys: re, M, dt, dx,
/// source, alpha, chi, method, swap; '#' starts a comment; unknown keys are
/// errors. Missing keys fall back to the built-in defaults (re = 6.38e6,
/// M = 4.432e-3, dt = 1e-5, dx = 1e-3, pdc source with chi = 0.01, exact
/// delta method). The returned config carries height 0.
experiment::ExperimentConfig load_config(const std::filesystem::path& file);

/// Command dispatcher for the gravdec binary. Returns the process exit code:
/// 0 on success, 2 for flag or config parse errors, 3 for domain errors,
/// 4 for I/O failures.
int run_main(int argc, char** argv);

}  // namespace gravdec::cli
