#include "pcflow/cycle.hpp"

#include "pcflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace pcflow {

double ReconstructedCycle::mean() const
{
  return std::accumulate(flows.begin(), flows.end(), 0.0) / static_cast<double>(kCyclePoints);
}

std::vector<std::size_t> detect_cycle_minima(FlowCurve const &curve, double expected_period)
{
  require(expected_period > 0.0 && std::isfinite(expected_period), "expected period must be > 0");
  curve.validate();
  std::size_t const n = curve.size();
  if (n < 3) { fail(ErrorKind::InsufficientData, "flow curve too short for cycle detection"); }
  double const dt = (curve.times.back() - curve.times.front()) / static_cast<double>(n - 1);
  if (static_cast<double>(n) * dt < 2.0 * expected_period * (1.0 - 1e-9)) {
    fail(ErrorKind::InsufficientData, "flow curve spans fewer than two expected periods");
  }

  auto const &t = curve.times;
  auto const &q = curve.flows;
  double const half = 0.5 * expected_period;
  std::vector<std::size_t> candidates;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(q[i] < q[i - 1])) { continue; }
    bool is_min = true;
    for (std::size_t j = i; j-- > 0 && t[i] - t[j] <= half && is_min;) { is_min = q[i] < q[j]; }
    for (std::size_t j = i + 1; j < n && t[j] - t[i] <= half && is_min; ++j) { is_min = q[i] <= q[j]; }
    if (is_min) { candidates.push_back(i); }
  }

  std::vector<std::size_t> minima;
  for (std::size_t c : candidates) {
    if (!minima.empty() && t[c] - t[minima.back()] < 0.7 * expected_period) {
      if (q[c] < q[minima.back()]) { minima.back() = c; }
      continue;
    }
    minima.push_back(c);
  }
  if (minima.size() < 2) {
    fail(ErrorKind::InsufficientData,
         "found " + std::to_string(minima.size()) + " cycle minima; at least two are required");
  }
  return minima;
}

ReconstructedCycle reconstruct_average_cycle(FlowCurve const &curve, std::vector<std::size_t> const &minima,
                                             ReconstructionOptions const &options)
{
  curve.validate();
  if (minima.size() < 2) { fail(ErrorKind::InsufficientData, "cycle reconstruction needs at least two minima"); }
  std::vector<double> cuts;
  cuts.reserve(minima.size());
  for (std::size_t k = 0; k < minima.size(); ++k) {
    std::size_t const i = minima[k];
    require(i < curve.size(), "minimum index out of range");
    require(k == 0 || i > minima[k - 1], "minima must be strictly increasing");
    bool const interior = i > 0 && i + 1 < curve.size();
    cuts.push_back(options.refine_minima && interior ? refine_minimum(curve.times, curve.flows, i) : curve.times[i]);
  }

  std::size_t const segments = cuts.size() - 1;
  std::vector<std::array<double, kCyclePoints>> resampled(segments);
  double duration_sum = 0.0;
  for (std::size_t k = 0; k < segments; ++k) {
    double const t0 = cuts[k], span = cuts[k + 1] - cuts[k];
    require(span > 0.0, "refined cycle cut points must be increasing");
    duration_sum += span;
    for (std::size_t j = 0; j < kCyclePoints; ++j) {
      double const u = static_cast<double>(j) / static_cast<double>(kCyclePoints);
      resampled[k][j] = interpolate(curve.times, curve.flows, t0 + u * span, options.interpolation);
    }
  }

  ReconstructedCycle out;
  out.n_cycles = static_cast<int>(segments);
  out.period_estimate = duration_sum / static_cast<double>(segments);
  for (std::size_t j = 0; j < kCyclePoints; ++j) {
    double sum = 0.0;
    for (auto const &s : resampled) { sum += s[j]; }
    double const mean = sum / static_cast<double>(segments);
    double ss = 0.0;
    for (auto const &s : resampled) { ss += (s[j] - mean) * (s[j] - mean); }
    out.flows[j] = mean;
    out.sds[j] = segments > 1 ? std::sqrt(ss / static_cast<double>(segments - 1)) : 0.0;
  }
  return out;
}

ReconstructedCycle align_to_peak(ReconstructedCycle const &recon, FlowCurve const &reference)
{
  require(reference.size() == kCyclePoints, "peak alignment needs a 32-sample reference curve");
  auto const ref_peak = static_cast<std::size_t>(std::max_element(reference.flows.begin(), reference.flows.end()) -
                                                 reference.flows.begin());
  auto const rec_peak =
    static_cast<std::size_t>(std::max_element(recon.flows.begin(), recon.flows.end()) - recon.flows.begin());
  std::size_t const shift = (ref_peak + kCyclePoints - rec_peak) % kCyclePoints;
  ReconstructedCycle out = recon;
  for (std::size_t j = 0; j < kCyclePoints; ++j) {
    out.flows[(j + shift) % kCyclePoints] = recon.flows[j];
    out.sds[(j + shift) % kCyclePoints] = recon.sds[j];
  }
  return out;
}

void write_cycle_csv(std::ostream &out, ReconstructedCycle const &cycle)
{
  char buf[96];
  std::snprintf(buf, sizeof buf, "# n_cycles=%d\n# period_estimate_s=%.9g\n", cycle.n_cycles, cycle.period_estimate);
  out << buf << "index,flow_mm3_s,sd_mm3_s\n";
  for (std::size_t j = 0; j < kCyclePoints; ++j) {
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g\n", j, cycle.flows[j], cycle.sds[j]);
    out << buf;
  }
}

ReconstructedCycle read_cycle_csv(std::istream &in)
{
  ReconstructedCycle cycle;
  std::string line;
  std::size_t rows = 0;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) { continue; }
    if (line.rfind("# n_cycles=", 0) == 0) {
      cycle.n_cycles = std::stoi(line.substr(11));
    } else if (line.rfind("# period_estimate_s=", 0) == 0) {
      cycle.period_estimate = std::stod(line.substr(20));
    } else if (line.front() == '#') {
      continue;
    } else if (!header) {
      if (line != "index,flow_mm3_s,sd_mm3_s") { fail(ErrorKind::Io, "cycle CSV: unexpected header '" + line + "'"); }
      header = true;
    } else {
      std::istringstream row(line);
      std::size_t j = 0;
      double q = 0.0, sd = 0.0;
      char c1 = 0, c2 = 0;
      if (!(row >> j >> c1 >> q >> c2 >> sd) || c1 != ',' || c2 != ',' || j >= kCyclePoints) {
        fail(ErrorKind::Io, "cycle CSV: bad row '" + line + "'");
      }
      cycle.flows[j] = q;
      cycle.sds[j] = sd;
      ++rows;
    }
  }
  if (rows != kCyclePoints) { fail(ErrorKind::Io, "cycle CSV: expected 32 rows"); }
  return cycle;
}

} // namespace pcflow
