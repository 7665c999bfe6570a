#include "pcflow/quantify.hpp"

#include "pcflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace pcflow {

std::size_t Mask::count() const
{
  return static_cast<std::size_t>(std::count_if(pixels.values().begin(), pixels.values().end(),
                                                [](unsigned char v) { return v != 0; }));
}

double FlowCurve::mean() const
{
  require(!flows.empty(), "mean of an empty flow curve");
  return std::accumulate(flows.begin(), flows.end(), 0.0) / static_cast<double>(flows.size());
}

void FlowCurve::validate() const
{
  require(times.size() == flows.size(), "flow curve times/flows length mismatch");
  for (std::size_t i = 0; i < flows.size(); ++i) {
    require(std::isfinite(times[i]) && std::isfinite(flows[i]), "flow curve contains non-finite values");
    require(i == 0 || times[i] > times[i - 1], "flow curve times must be strictly increasing");
  }
}

RealGrid decode_velocity(Frame const &frame, double venc)
{
  require(venc > 0.0, "venc must be > 0");
  RealGrid v(frame.phase.width(), frame.phase.height());
  for (std::size_t k = 0; k < v.size(); ++k) { v[k] = venc * frame.phase[k] / kPi; }
  return v;
}

RealGrid mean_magnitude(ImageSeries const &series)
{
  require(!series.frames.empty(), "series has no frames");
  auto const &first = series.frames.front().magnitude;
  RealGrid sum(first.width(), first.height(), 0.0);
  for (auto const &f : series.frames) {
    require(f.magnitude.same_shape(sum), "frames differ in size");
    for (std::size_t k = 0; k < sum.size(); ++k) { sum[k] += f.magnitude[k]; }
  }
  double const inv = 1.0 / static_cast<double>(series.frames.size());
  for (auto &v : sum.values()) { v *= inv; }
  return sum;
}

Mask grow_region(RealGrid const &magnitude, AcquisitionParams const &params, Vec2 seed, MaskLabel label)
{
  std::size_t sx = 0, sy = 0;
  require(params.pixel_of(seed, sx, sy), "seed point lies outside the FOV");
  require(magnitude.width() == params.matrix_width() && magnitude.height() == params.matrix_height(),
          "magnitude image does not match the acquisition matrix");

  Mask mask{MaskGrid(magnitude.width(), magnitude.height(), 0), params.pixel_size, label};
  double const seed_value = magnitude(sx, sy);
  double const threshold = 0.5 * seed_value;
  // The seed itself must look like signal: at least half the brightest pixel.
  double const peak = *std::max_element(magnitude.values().begin(), magnitude.values().end());
  if (!(seed_value > 0.0) || seed_value < 0.5 * peak) {
    fail(ErrorKind::Segmentation, "seed pixel is not signal (mean magnitude below half the image peak)");
  }

  // Breadth-first growth; neighbours are visited in a fixed order so the
  // result never depends on anything but the image.
  std::deque<std::pair<std::size_t, std::size_t>> frontier{{sx, sy}};
  mask.pixels(sx, sy) = 1;
  while (!frontier.empty()) {
    auto const [x, y] = frontier.front();
    frontier.pop_front();
    auto visit = [&](std::size_t nx, std::size_t ny) {
      if (!mask.pixels(nx, ny) && magnitude(nx, ny) >= threshold) {
        mask.pixels(nx, ny) = 1;
        frontier.emplace_back(nx, ny);
      }
    };
    if (y > 0) { visit(x, y - 1); }
    if (x > 0) { visit(x - 1, y); }
    if (x + 1 < magnitude.width()) { visit(x + 1, y); }
    if (y + 1 < magnitude.height()) { visit(x, y + 1); }
  }
  return mask;
}

Mask segment_vessel(ImageSeries const &series, Vec2 seed, MaskLabel label)
{
  return grow_region(mean_magnitude(series), series.params, seed, label);
}

std::vector<RealGrid> calibrate_background(std::vector<RealGrid> const &vmaps, Mask const &static_mask)
{
  if (static_mask.empty()) { fail(ErrorKind::Segmentation, "static calibration mask is empty"); }
  double const n = static_cast<double>(static_mask.count());
  std::vector<RealGrid> out;
  out.reserve(vmaps.size());
  for (auto const &v : vmaps) {
    require(v.same_shape(static_mask.pixels), "static mask does not match the velocity map");
    double sum = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (static_mask.pixels[k]) { sum += v[k]; }
    }
    double const offset = sum / n;
    RealGrid c = v;
    for (auto &x : c.values()) { x -= offset; }
    out.push_back(std::move(c));
  }
  return out;
}

FlowCurve flow_curve(ImageSeries const &series, Mask const &vessel_mask, Mask const &static_mask)
{
  require(!series.frames.empty(), "series has no frames");
  require(!vessel_mask.empty(), "vessel mask is empty");
  std::vector<RealGrid> vmaps;
  vmaps.reserve(series.frames.size());
  for (auto const &f : series.frames) { vmaps.push_back(decode_velocity(f, series.params.venc)); }
  auto const corrected = calibrate_background(vmaps, static_mask);

  double const pixel_area = series.params.pixel_size * series.params.pixel_size;
  FlowCurve curve{{}, {}, series.params.mode};
  for (std::size_t i = 0; i < corrected.size(); ++i) {
    auto const &v = corrected[i];
    require(v.same_shape(vessel_mask.pixels), "vessel mask does not match the series");
    double sum = 0.0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (vessel_mask.pixels[k]) { sum += v[k]; }
    }
    curve.times.push_back(series.frames[i].timestamp);
    curve.flows.push_back(sum * pixel_area);
  }
  curve.validate();
  return curve;
}

void write_flow_curve_csv(std::ostream &out, FlowCurve const &curve)
{
  out << "time_s,flow_mm3_s\n";
  char buf[64];
  for (std::size_t i = 0; i < curve.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.9g,%.9g\n", curve.times[i], curve.flows[i]);
    out << buf;
  }
}

FlowCurve read_flow_curve_csv(std::istream &in, Mode mode)
{
  FlowCurve curve{{}, {}, mode};
  std::string line;
  if (!std::getline(in, line) || line != "time_s,flow_mm3_s") {
    fail(ErrorKind::Io, "flow curve CSV: missing header 'time_s,flow_mm3_s'");
  }
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') { continue; }
    std::istringstream row(line);
    double t = 0.0, q = 0.0;
    char comma = 0;
    if (!(row >> t >> comma >> q) || comma != ',') { fail(ErrorKind::Io, "flow curve CSV: bad row '" + line + "'"); }
    curve.times.push_back(t);
    curve.flows.push_back(q);
  }
  curve.validate();
  return curve;
}

} // namespace pcflow
