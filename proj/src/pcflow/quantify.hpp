#pragma once

#include "pcflow/acquisition.hpp"

#include <iosfwd>
#include <vector>

namespace pcflow {

enum class MaskLabel { Vessel, Static };

struct Mask
{
  MaskGrid pixels;
  double pixel_size = 0.0; // mm
  MaskLabel label = MaskLabel::Vessel;

  std::size_t count() const;
  double area() const { return static_cast<double>(count()) * pixel_size * pixel_size; }
  bool empty() const { return count() == 0; }
};

struct FlowCurve
{
  std::vector<double> times; // s, strictly increasing
  std::vector<double> flows; // mm^3/s
  Mode source_mode = Mode::Epi;

  std::size_t size() const noexcept { return flows.size(); }
  double mean() const;
  void validate() const;
};

/// v = venc * phase / pi.
RealGrid decode_velocity(Frame const &frame, double venc);

/// Time-averaged magnitude image.
RealGrid mean_magnitude(ImageSeries const &series);

/// 4-connected region grown on the time-averaged magnitude from the pixel
/// containing seed (mm), keeping pixels at >= 50% of the seed's magnitude.
Mask segment_vessel(ImageSeries const &series, Vec2 seed, MaskLabel label = MaskLabel::Vessel);

/// Same growth rule on an already averaged magnitude image.
Mask grow_region(RealGrid const &magnitude, AcquisitionParams const &params, Vec2 seed, MaskLabel label);

/// Subtracts each frame's static-mask mean velocity from that whole frame.
std::vector<RealGrid> calibrate_background(std::vector<RealGrid> const &vmaps, Mask const &static_mask);

/// Per frame: decode, calibrate, integrate v * pixel_area over the vessel mask.
FlowCurve flow_curve(ImageSeries const &series, Mask const &vessel_mask, Mask const &static_mask);

/// CSV with header `time_s,flow_mm3_s`, 9 significant digits.
void write_flow_curve_csv(std::ostream &out, FlowCurve const &curve);
FlowCurve read_flow_curve_csv(std::istream &in, Mode mode);

} // namespace pcflow
