#pragma once

#include "pcflow/experiment.hpp"

#include <filesystem>
#include <vector>

namespace pcflow {

// Output directory layout
//
//   validate: config.ini, validation_summary.csv, repeats.csv,
//             fig4_curves.csv, bland_altman.csv, curves/*.csv,
//             fig4_curves.svg, fig4_bland_altman.svg
//   sweep:    config.ini, sweep.csv, fig5_sweep.svg
//   analyze:  analysis.csv, curve.csv, minima.csv and cycle.csv (EPI)
//
// SVGs are always drawn from the CSVs as read back from disk, so rendering
// an existing directory again reproduces them byte for byte.

void write_validation_outputs(ValidationReport const &report, ExperimentConfig const &config,
                              std::filesystem::path const &dir);
void write_sweep_outputs(std::vector<SweepRecord> const &records, ExperimentConfig const &config,
                         std::filesystem::path const &dir);
void write_analysis_outputs(PipelineResult const &result, std::filesystem::path const &dir);

/// Draws whichever figures have their CSVs in `in`; returns the SVG paths
/// written under `out`. Throws Io when `in` holds none of them.
std::vector<std::filesystem::path> render_directory(std::filesystem::path const &in,
                                                    std::filesystem::path const &out);

} // namespace pcflow
