#pragma once

#include "pcflow/grid.hpp"
#include "pcflow/phantom.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace pcflow {

enum class Mode { Cine, Epi };

std::string to_string(Mode mode);
Mode mode_from_string(std::string const &text);

// Scanner settings that have no effect on the simulation; carried for reports.
struct ScannerMetadata
{
  double tr_ms = 0.0;
  double te_ms = 0.0;
  double flip_deg = 30.0;
  int epi_factor = 0; // 0 = not applicable
  double sense_factor = 1.0;
  double thickness_mm = 4.0;
  bool operator==(ScannerMetadata const &) const = default;
};

struct BackgroundPhase
{
  double offset = 0.05;  // rad
  double slope_x = 0.002; // rad/mm
  double slope_y = 0.002; // rad/mm

  double at(Vec2 p) const noexcept { return offset + slope_x * p.x + slope_y * p.y; }
  bool operator==(BackgroundPhase const &) const = default;
};

struct AcquisitionParams
{
  Mode mode = Mode::Epi;
  double venc = 50.0;       // mm/s
  double pixel_size = 1.2;  // mm, isotropic
  Fov fov{};
  double frame_interval = 0.062; // s, EPI only
  int n_frames = 150;            // EPI only
  int phases_per_cycle = 32;     // CINE only
  double acq_duration = 9.3;     // s
  double noise_sigma_ref = 0.12; // complex-channel SD at 1.2 mm pixels
  BackgroundPhase background{};
  std::uint64_t rng_seed = 0;
  ScannerMetadata metadata{};

  static AcquisitionParams cine_defaults();
  static AcquisitionParams epi_defaults();

  std::size_t matrix_width() const;
  std::size_t matrix_height() const;

  /// Noise SD after the pixel-area rule: sigma_ref * (1.2 / pixel_size)^2.
  double effective_sigma() const;

  /// Center (mm, FOV-centered coordinates) of pixel (ix, iy).
  Vec2 pixel_center(std::size_t ix, std::size_t iy) const;

  /// Pixel containing p; returns false when p is outside the matrix.
  bool pixel_of(Vec2 p, std::size_t &ix, std::size_t &iy) const;

  void validate() const;

  bool operator==(AcquisitionParams const &) const = default;
};

inline constexpr double kReferencePixelSize = 1.2; // mm
inline constexpr double kFluidAmplitude = 1.0;
inline constexpr double kBackgroundAmplitude = 0.05;
inline constexpr int kDefaultSupersampling = 16;

struct Frame
{
  RealGrid magnitude;
  RealGrid phase; // radians, [-pi, pi)
  double timestamp = 0.0;
  bool operator==(Frame const &) const = default;
};

struct ImageSeries
{
  std::vector<Frame> frames;
  AcquisitionParams params;
  PhantomScene scene;
  std::string scene_hash;
};

/// Wrap to [-pi, pi).
double wrap_phase(double phase);

/// Retrospectively averaged heartbeats for a CINE acquisition.
int cine_cycle_count(AcquisitionParams const &params, FlowWaveform const &waveform);

/// Per-pixel mean of velocity_at over supersampling^2 evenly spaced points.
RealGrid rasterize_velocity(PhantomScene const &scene, double q, AcquisitionParams const &params,
                            int supersampling = kDefaultSupersampling);

/// Pixels whose center lies inside any tube (flow or static).
MaskGrid fluid_mask(PhantomScene const &scene, AcquisitionParams const &params);

/// Complex-signal encoding of one frame. noise_sigma is the complex-channel
/// SD actually applied; rng is only drawn from when noise_sigma > 0.
Frame encode_frame(RealGrid const &vmap, AcquisitionParams const &params, MaskGrid const &fluid, double t,
                   double noise_sigma, std::mt19937_64 &rng);

/// Independent random stream for one frame of one acquisition.
std::mt19937_64 frame_stream(std::uint64_t seed, Mode mode, std::size_t frame_index);

ImageSeries acquire_epi(PhantomScene const &scene, AcquisitionParams const &params,
                        int supersampling = kDefaultSupersampling);
ImageSeries acquire_cine(PhantomScene const &scene, AcquisitionParams const &params,
                         int supersampling = kDefaultSupersampling);

std::uint64_t splitmix64(std::uint64_t x);

} // namespace pcflow
