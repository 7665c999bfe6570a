#pragma once

#include "pcflow/acquisition.hpp"

#include <filesystem>

namespace pcflow {

// On-disk series layout:
//   <dir>/series.json      header: params, scene, scene hash, dims, timestamps
//   <dir>/frame_NNNN.bin   float32 little-endian, magnitude plane then phase
//                          plane, each row-major (width fastest)
//
// Values are stored as float32. Phases that would round onto +pi or below -pi
// are nudged to the nearest float inside [-pi, pi), so a loaded series always
// satisfies the phase invariant and load -> save reproduces the files byte
// for byte.

void save_series(ImageSeries const &series, std::filesystem::path const &dir);
ImageSeries load_series(std::filesystem::path const &dir);

/// Value a double takes after a trip through the float32 phase encoding.
float quantize_phase(double phase);

} // namespace pcflow
