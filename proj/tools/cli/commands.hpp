#pragma once

#include <filesystem>
#include <ostream>
#include <stdexcept>

#include "cli/config.hpp"

namespace gibbsperc::cli {

/// A results directory with nothing usable in it.
class ReportError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// β grid × window sizes: one crossing estimate per cell, appended to
/// <name>.csv as soon as it completes. Cell k uses derive_seed(seed, k).
void run_sweep(const ExperimentConfig& config, const std::filesystem::path& out);

/// Stochastic bisection per window size: probes in <name>.csv, thresholds in
/// <name>.thresholds.csv, finite-size fit in the manifest.
void run_bisect(const ExperimentConfig& config, const std::filesystem::path& out);

/// Condition (P) check, separation constant, β₊ and β₋, loop counts, the
/// loop tail sum and key-lemma estimates on the configured cube sets.
void run_check_bounds(const ExperimentConfig& config, const std::filesystem::path& out);

/// Samples the model on [0, render.L]², finds a separating chain and writes
/// <name>.svg with the pattern, the chain (JSON) and the manifest.
void run_render(const ExperimentConfig& config, const std::filesystem::path& out);

/// One draw on [0, L]^d as a point CSV with a JSON sidecar.
void run_sample(const ExperimentConfig& config, const std::filesystem::path& out);

/// Markdown summary of every manifest-backed result in `dir`, written to
/// dir/report.md. Unreadable files are skipped with a warning on `warn`.
/// Throws ReportError when no result file is usable.
std::filesystem::path run_report(const std::filesystem::path& dir, std::ostream& warn);

}  // namespace gibbsperc::cli
