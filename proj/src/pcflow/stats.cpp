#include "pcflow/stats.hpp"

#include "pcflow/error.hpp"

#include <cmath>
#include <numeric>

namespace pcflow {

double mean(std::span<double const> values)
{
  require(!values.empty(), "mean of an empty sequence");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_sd(std::span<double const> values)
{
  require(values.size() >= 2, "sample SD needs at least two values");
  double const m = mean(values);
  double ss = 0.0;
  for (double v : values) { ss += (v - m) * (v - m); }
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

BlandAltmanResult bland_altman(std::span<double const> a, std::span<double const> b)
{
  if (a.size() != b.size()) { fail(ErrorKind::InvalidArgument, "Bland-Altman inputs differ in length"); }
  require(a.size() >= 2, "Bland-Altman needs at least two pairs");
  BlandAltmanResult r;
  r.diffs.resize(a.size());
  r.pair_means.resize(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    r.diffs[i] = a[i] - b[i];
    r.pair_means[i] = 0.5 * (a[i] + b[i]);
  }
  r.mean_diff = mean(r.diffs);
  r.sd_diff = sample_sd(r.diffs);
  r.loa_low = r.mean_diff - kLoaZ * r.sd_diff;
  r.loa_high = r.mean_diff + kLoaZ * r.sd_diff;
  return r;
}

bool agreement_verdict(BlandAltmanResult const &r)
{
  for (double d : r.diffs) {
    if (d < r.loa_low || d > r.loa_high) { return false; }
  }
  return true;
}

double coefficient_of_variation(std::span<double const> values)
{
  require(values.size() >= 2, "coefficient of variation needs at least two values");
  double const m = mean(values);
  if (m == 0.0) { fail(ErrorKind::InvalidArgument, "coefficient of variation undefined for zero mean"); }
  return 100.0 * sample_sd(values) / m;
}

ConfidenceCheck confidence_check(double value, double gold, double tolerance_percent)
{
  require(gold > 0.0, "gold value must be > 0");
  ConfidenceCheck c;
  c.low = gold * (1.0 - tolerance_percent / 100.0);
  c.high = gold * (1.0 + tolerance_percent / 100.0);
  c.inside = value >= c.low && value <= c.high;
  return c;
}

RunSummary summarize_runs(std::span<double const> mean_flows, std::span<double const> areas)
{
  require(!mean_flows.empty() && mean_flows.size() == areas.size(), "run summary needs matching, non-empty inputs");
  RunSummary s;
  s.repeats = static_cast<int>(mean_flows.size());
  s.mean_flow = mean(mean_flows);
  s.area = mean(areas);
  if (s.repeats >= 2) {
    s.sd_flow = sample_sd(mean_flows);
    s.cv_percent = coefficient_of_variation(mean_flows);
  }
  s.in_flow_ci = confidence_check(s.mean_flow, kGoldFlow, kConfidencePercent).inside;
  s.in_area_ci = confidence_check(s.area, kGoldArea, kConfidencePercent).inside;
  return s;
}

} // namespace pcflow
