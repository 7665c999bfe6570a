#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pcflow {

inline constexpr double kPi = 3.14159265358979323846;

struct Vec2
{
  double x = 0.0;
  double y = 0.0;
  bool operator==(Vec2 const &) const = default;
};

struct Harmonic
{
  double amplitude = 0.0; // relative to the mean flow
  double phase = 0.0;     // radians
  bool operator==(Harmonic const &) const = default;
};

/// Periodic pump output Q(t) = mean * (1 + sum_k a_k sin(2 pi k f t + phi_k)).
///
/// Construction rejects harmonic sets whose series dips below zero anywhere in
/// the period, so flow_at() never has to clamp.
class FlowWaveform
{
public:
  FlowWaveform(double mean_flow, double rate_bpm, std::vector<Harmonic> harmonics = {});

  double mean_flow() const noexcept { return mean_flow_; }
  double rate_bpm() const noexcept { return rate_bpm_; }
  double frequency() const noexcept { return rate_bpm_ / 60.0; }
  double period() const noexcept { return 60.0 / rate_bpm_; }
  std::vector<Harmonic> const &harmonics() const noexcept { return harmonics_; }

  bool operator==(FlowWaveform const &) const = default;

private:
  double mean_flow_;
  double rate_bpm_;
  std::vector<Harmonic> harmonics_;
};

/// Default pump shape: one dominant systolic peak per cycle.
std::vector<Harmonic> default_harmonics();

/// Volumetric flow (mm^3/s) at time t (s). Periodic in t.
double flow_at(FlowWaveform const &waveform, double t);

struct TubeGeometry
{
  Vec2 center;          // mm, FOV-centered coordinates
  double diameter = 0.; // mm
  bool is_static = false;

  double radius() const noexcept { return 0.5 * diameter; }
  double area() const noexcept { return kPi * radius() * radius(); }
  bool contains(Vec2 p) const noexcept;
  bool operator==(TubeGeometry const &) const = default;
};

/// Axial Poiseuille velocity (mm/s) carrying volumetric flow q through the tube.
double velocity_at(TubeGeometry const &tube, double q, Vec2 point);

struct Fov
{
  double width = 100.0;  // mm, x extent
  double height = 60.0;  // mm, y extent
  bool operator==(Fov const &) const = default;
};

/// Tubes in series (same Q(t)) plus one static calibration tube.
/// Coordinates are in mm with the origin at the FOV center.
class PhantomScene
{
public:
  PhantomScene(std::vector<TubeGeometry> tubes, TubeGeometry static_tube, FlowWaveform waveform, Fov fov);

  std::vector<TubeGeometry> const &tubes() const noexcept { return tubes_; }
  TubeGeometry const &static_tube() const noexcept { return static_tube_; }
  FlowWaveform const &waveform() const noexcept { return waveform_; }
  Fov const &fov() const noexcept { return fov_; }

  /// Flow tubes followed by the static tube.
  std::vector<TubeGeometry> all_tubes() const;

  /// Stable 64-bit FNV-1a digest of every scene parameter, as 16 hex digits.
  std::string hash() const;

  bool operator==(PhantomScene const &) const = default;

private:
  std::vector<TubeGeometry> tubes_;
  TubeGeometry static_tube_;
  FlowWaveform waveform_;
  Fov fov_;
};

PhantomScene default_scene();

} // namespace pcflow
