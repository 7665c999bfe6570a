#pragma once

#include <span>
#include <vector>

namespace pcflow {

double mean(std::span<double const> values);
/// Sample (n - 1) standard deviation.
double sample_sd(std::span<double const> values);

struct BlandAltmanResult
{
  std::vector<double> pair_means;
  std::vector<double> diffs; // a - b
  double mean_diff = 0.0;
  double sd_diff = 0.0;
  double loa_low = 0.0;  // mean_diff - 1.96 sd
  double loa_high = 0.0; // mean_diff + 1.96 sd
};

inline constexpr double kLoaZ = 1.96;

BlandAltmanResult bland_altman(std::span<double const> a, std::span<double const> b);

/// Every difference lies inside the result's own limits of agreement. This is
/// a screen for gross shape mismatch, not a significance test.
bool agreement_verdict(BlandAltmanResult const &r);

/// 100 * sample SD / mean.
double coefficient_of_variation(std::span<double const> values);

struct ConfidenceCheck
{
  bool inside = false;
  double low = 0.0;
  double high = 0.0;
};

ConfidenceCheck confidence_check(double value, double gold, double tolerance_percent);

inline constexpr double kGoldFlow = 1150.0;          // mm^3/s
inline constexpr double kGoldArea = 70.8;            // mm^2
inline constexpr double kConfidencePercent = 10.0;

struct RunSummary
{
  double mean_flow = 0.0;  // mm^3/s, mean over repeats
  double sd_flow = 0.0;    // mm^3/s, 0 with a single repeat
  double cv_percent = 0.0; // only meaningful when repeats >= 2
  double area = 0.0;       // mm^2, mean over repeats
  bool in_flow_ci = false;
  bool in_area_ci = false;
  int repeats = 0;

  bool has_cv() const noexcept { return repeats >= 2; }
};

RunSummary summarize_runs(std::span<double const> mean_flows, std::span<double const> areas);

} // namespace pcflow
