#include "pcflow/phantom.hpp"

#include "pcflow/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>

namespace pcflow {

namespace {

double harmonic_sum(std::vector<Harmonic> const &harmonics, double omega_t)
{
  double s = 0.0;
  for (std::size_t k = 0; k < harmonics.size(); ++k) {
    s += harmonics[k].amplitude * std::sin(static_cast<double>(k + 1) * omega_t + harmonics[k].phase);
  }
  return s;
}

class Fnv1a
{
public:
  void add(std::uint64_t v)
  {
    for (int i = 0; i < 8; ++i) {
      h_ ^= (v >> (8 * i)) & 0xffu;
      h_ *= 0x100000001b3ull;
    }
  }
  void add(double v) { add(std::bit_cast<std::uint64_t>(v)); }
  void add(Vec2 v) { add(v.x), add(v.y); }
  std::uint64_t value() const { return h_; }

private:
  std::uint64_t h_ = 0xcbf29ce484222325ull;
};

} // namespace

FlowWaveform::FlowWaveform(double mean_flow, double rate_bpm, std::vector<Harmonic> harmonics)
  : mean_flow_(mean_flow), rate_bpm_(rate_bpm), harmonics_(std::move(harmonics))
{
  require(std::isfinite(mean_flow) && mean_flow >= 0.0, "waveform mean flow must be finite and >= 0");
  require(std::isfinite(rate_bpm) && rate_bpm > 0.0, "waveform rate must be finite and > 0");
  double slope_bound = 0.0; // bound on |d/d(omega t)| of the relative series
  for (std::size_t k = 0; k < harmonics_.size(); ++k) {
    auto const &h = harmonics_[k];
    require(std::isfinite(h.amplitude) && std::isfinite(h.phase), "harmonic amplitude/phase must be finite");
    slope_bound += std::abs(h.amplitude) * static_cast<double>(k + 1);
  }
  if (harmonics_.empty()) { return; }

  // Dense scan of one period; a sample spacing of d leaves an unseen dip of at
  // most slope_bound * d / 2 between neighbouring samples.
  std::size_t const n = 4096 * harmonics_.size();
  double const step = 2.0 * kPi / static_cast<double>(n);
  double lowest = 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    lowest = std::min(lowest, 1.0 + harmonic_sum(harmonics_, step * static_cast<double>(i)));
  }
  if (lowest - 0.5 * slope_bound * step < 0.0) {
    fail(ErrorKind::InvalidArgument, "harmonic set produces negative flow within the period");
  }
}

std::vector<Harmonic> default_harmonics() { return {{0.45, -kPi / 2.0}, {0.15, 0.0}}; }

double flow_at(FlowWaveform const &waveform, double t)
{
  // Reduce to [0, period) so that t and t + period evaluate identically.
  double const period = waveform.period();
  double phase_t = std::fmod(t, period);
  if (phase_t < 0.0) { phase_t += period; }
  double const omega_t = 2.0 * kPi * phase_t / period;
  return waveform.mean_flow() * (1.0 + harmonic_sum(waveform.harmonics(), omega_t));
}

bool TubeGeometry::contains(Vec2 p) const noexcept
{
  double const dx = p.x - center.x, dy = p.y - center.y;
  return dx * dx + dy * dy <= radius() * radius();
}

double velocity_at(TubeGeometry const &tube, double q, Vec2 point)
{
  if (tube.is_static) { return 0.0; }
  double const r = tube.radius();
  double const dx = point.x - tube.center.x, dy = point.y - tube.center.y;
  double const rel = (dx * dx + dy * dy) / (r * r);
  if (rel > 1.0) { return 0.0; }
  return 2.0 * q / tube.area() * (1.0 - rel);
}

PhantomScene::PhantomScene(std::vector<TubeGeometry> tubes, TubeGeometry static_tube, FlowWaveform waveform, Fov fov)
  : tubes_(std::move(tubes)), static_tube_(static_tube), waveform_(std::move(waveform)), fov_(fov)
{
  static_tube_.is_static = true;
  require(!tubes_.empty(), "scene needs at least one flow tube");
  require(fov_.width > 0.0 && fov_.height > 0.0, "FOV extents must be positive");
  auto const all = all_tubes();
  for (std::size_t i = 0; i < all.size(); ++i) {
    auto const &t = all[i];
    require(std::isfinite(t.diameter) && t.diameter > 0.0, "tube diameter must be positive");
    require(std::abs(t.center.x) + t.radius() <= 0.5 * fov_.width &&
              std::abs(t.center.y) + t.radius() <= 0.5 * fov_.height,
            "tube " + std::to_string(i) + " extends outside the FOV");
    for (std::size_t j = 0; j < i; ++j) {
      double const d = std::hypot(t.center.x - all[j].center.x, t.center.y - all[j].center.y);
      require(d > t.radius() + all[j].radius(),
              "tubes " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
    }
  }
}

std::vector<TubeGeometry> PhantomScene::all_tubes() const
{
  auto all = tubes_;
  all.push_back(static_tube_);
  return all;
}

std::string PhantomScene::hash() const
{
  Fnv1a h;
  for (auto const &t : all_tubes()) {
    h.add(t.center), h.add(t.diameter), h.add(std::uint64_t{t.is_static});
  }
  h.add(waveform_.mean_flow()), h.add(waveform_.rate_bpm());
  for (auto const &hm : waveform_.harmonics()) {
    h.add(hm.amplitude), h.add(hm.phase);
  }
  h.add(fov_.width), h.add(fov_.height);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h.value()));
  return buf;
}

PhantomScene default_scene()
{
  // Tube-1 sits where the pixel grid produces the partial-volume behaviour
  // documented in the README; the static tube is offset along (+1,-1), which
  // keeps it on the same background-phase iso-line as tube-1.
  std::vector<TubeGeometry> tubes{
    {{-28.0, -1.5}, 9.5, false},
    {{-2.0, 12.0}, 6.4, false},
    {{16.0, 12.0}, 4.4, false},
    {{30.0, 12.0}, 2.0, false},
  };
  TubeGeometry static_tube{{-16.0, -13.5}, 9.5, true};
  return PhantomScene(std::move(tubes), static_tube, FlowWaveform(1150.0, 99.0, default_harmonics()), Fov{100.0, 60.0});
}

} // namespace pcflow
