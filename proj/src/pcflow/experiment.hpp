#pragma once

#include "pcflow/config.hpp"
#include "pcflow/cycle.hpp"
#include "pcflow/quantify.hpp"
#include "pcflow/stats.hpp"

#include <optional>
#include <string>
#include <vector>

namespace pcflow {

/// Output of decode -> segment -> calibrate -> flow curve (-> cycle for EPI).
struct PipelineResult
{
  Mode mode = Mode::Epi;
  Mask vessel;
  Mask static_mask;
  FlowCurve curve;
  std::vector<std::size_t> minima;         // EPI only
  std::optional<ReconstructedCycle> cycle; // EPI only
  double mean_flow = 0.0; // CINE: curve mean; EPI: reconstructed-cycle mean
  double area = 0.0;      // vessel mask area, mm^2
};

PipelineResult analyze_series(ImageSeries const &series, Vec2 vessel_seed, Vec2 static_seed, double expected_period);

/// Analysis with seeds at the centers of scene.tubes()[vessel_tube] and the
/// static tube, and the expected period taken from the scene's pump rate.
PipelineResult analyze_series(ImageSeries const &series, std::size_t vessel_tube = 0);

AcquisitionParams params_for(ExperimentConfig const &config, Mode mode, std::uint64_t seed, double pixel_size);
ImageSeries simulate(ExperimentConfig const &config, Mode mode, std::uint64_t seed);

struct RepeatResult
{
  int index = 0;
  std::uint64_t seed = 0;
  PipelineResult cine;
  PipelineResult epi;
  ReconstructedCycle epi_aligned; // EPI cycle aligned to this repeat's CINE curve
};

struct ValidationReport
{
  std::vector<RepeatResult> repeats;
  RunSummary cine;
  RunSummary epi;
  std::array<double, kCyclePoints> cine_mean{}; // point-wise mean of CINE curves
  std::array<double, kCyclePoints> epi_mean{};  // point-wise mean of aligned EPI cycles
  std::array<double, kCyclePoints> epi_sd{};    // across repeats, or within-cycle SD for one repeat
  BlandAltmanResult bland_altman;
  bool agreement = false;
  std::vector<std::string> notes;

  /// Mean flow and area of both modes inside their CIs and Bland-Altman agreement.
  bool gate() const;
};

/// Repeat r uses seed base_seed + r for both modes.
ValidationReport run_validation(ExperimentConfig const &config);

struct SweepRecord
{
  double pixel_size = 0.0;
  Mode mode = Mode::Epi;
  int repeat_index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  double area = 0.0;
  double mean_flow = 0.0;
  std::string error; // set when !ok
};

/// seed = base_seed ^ splitmix64((size_index << 32) | (mode << 16) | repeat),
/// mode 0 = CINE, 1 = EPI.
std::uint64_t sweep_cell_seed(std::uint64_t base_seed, std::size_t size_index, Mode mode, int repeat);

/// One record per (size, mode, repeat), sorted in that order. Cell failures
/// become records with ok = false.
std::vector<SweepRecord> run_pixel_sweep(ExperimentConfig const &config);

/// EPI records with pixel size in [1.2, 2.4] mm all succeed with mean flow inside the CI.
bool sweep_gate(std::vector<SweepRecord> const &records);

} // namespace pcflow
