#pragma once

#include "pcflow/interp.hpp"
#include "pcflow/quantify.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace pcflow {

inline constexpr std::size_t kCyclePoints = 32;

struct ReconstructedCycle
{
  std::array<double, kCyclePoints> flows{}; // mm^3/s
  std::array<double, kCyclePoints> sds{};   // mm^3/s, per-point sample SD across cycles
  int n_cycles = 0;
  double period_estimate = 0.0; // s, mean min-to-min duration

  double mean() const;
};

/// Sample indices of per-cycle minima. A sample qualifies when it is the
/// minimum of the window |t - t_i| <= expected_period / 2 (ties go to the
/// earlier sample) and strictly below its left neighbour; accepted minima are
/// at least 0.7 periods apart. Throws InsufficientData when the curve spans
/// fewer than two periods or fewer than two minima are found.
std::vector<std::size_t> detect_cycle_minima(FlowCurve const &curve, double expected_period);

struct ReconstructionOptions
{
  Interpolation interpolation = Interpolation::CubicHermite;
  // Place interior cut points at the interpolant's minimum instead of the
  // sample time. End-of-curve indices are never refined.
  bool refine_minima = true;
};

/// Average of all complete min-to-min segments, each resampled at
/// u_j = j / 32 of its duration.
ReconstructedCycle reconstruct_average_cycle(FlowCurve const &curve, std::vector<std::size_t> const &minima,
                                             ReconstructionOptions const &options = {});

/// Circular shift putting argmax(recon.flows) onto argmax(reference.flows).
ReconstructedCycle align_to_peak(ReconstructedCycle const &recon, FlowCurve const &reference);

/// CSV `index,flow_mm3_s,sd_mm3_s` preceded by `# n_cycles=` and
/// `# period_estimate_s=` lines.
void write_cycle_csv(std::ostream &out, ReconstructedCycle const &cycle);
ReconstructedCycle read_cycle_csv(std::istream &in);

} // namespace pcflow
