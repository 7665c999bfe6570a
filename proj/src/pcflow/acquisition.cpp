#include "pcflow/acquisition.hpp"

#include "pcflow/error.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace pcflow {

std::string to_string(Mode mode) { return mode == Mode::Cine ? "CINE" : "EPI"; }

Mode mode_from_string(std::string const &text)
{
  std::string up;
  for (char c : text) { up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c)))); }
  if (up == "CINE") { return Mode::Cine; }
  if (up == "EPI") { return Mode::Epi; }
  fail(ErrorKind::InvalidArgument, "unknown acquisition mode '" + text + "' (expected CINE or EPI)");
}

AcquisitionParams AcquisitionParams::cine_defaults()
{
  AcquisitionParams p;
  p.mode = Mode::Cine;
  p.phases_per_cycle = 32;
  p.acq_duration = 23.6;
  p.metadata = ScannerMetadata{11.0, 7.7, 30.0, 0, 1.5, 4.0};
  return p;
}

AcquisitionParams AcquisitionParams::epi_defaults()
{
  AcquisitionParams p;
  p.mode = Mode::Epi;
  p.frame_interval = 0.062;
  p.n_frames = 150;
  p.acq_duration = 150 * 0.062;
  p.metadata = ScannerMetadata{15.2, 9.1, 30.0, 9, 2.5, 4.0};
  return p;
}

namespace {
std::size_t cells(double extent, double pixel)
{
  // Guard against 60 / 1.2 landing a hair above 50.
  return static_cast<std::size_t>(std::ceil(extent / pixel - 1e-9));
}
} // namespace

std::size_t AcquisitionParams::matrix_width() const { return cells(fov.width, pixel_size); }
std::size_t AcquisitionParams::matrix_height() const { return cells(fov.height, pixel_size); }

double AcquisitionParams::effective_sigma() const
{
  double const ratio = kReferencePixelSize / pixel_size;
  return noise_sigma_ref * ratio * ratio;
}

Vec2 AcquisitionParams::pixel_center(std::size_t ix, std::size_t iy) const
{
  return {-0.5 * fov.width + (static_cast<double>(ix) + 0.5) * pixel_size,
          -0.5 * fov.height + (static_cast<double>(iy) + 0.5) * pixel_size};
}

bool AcquisitionParams::pixel_of(Vec2 p, std::size_t &ix, std::size_t &iy) const
{
  double const fx = std::floor((p.x + 0.5 * fov.width) / pixel_size);
  double const fy = std::floor((p.y + 0.5 * fov.height) / pixel_size);
  if (!(fx >= 0.0 && fy >= 0.0)) { return false; }
  ix = static_cast<std::size_t>(fx);
  iy = static_cast<std::size_t>(fy);
  return ix < matrix_width() && iy < matrix_height();
}

void AcquisitionParams::validate() const
{
  require(std::isfinite(venc) && venc > 0.0, "venc must be > 0");
  require(std::isfinite(pixel_size) && pixel_size > 0.0, "pixel size must be > 0");
  require(fov.width > 0.0 && fov.height > 0.0, "FOV extents must be > 0");
  require(noise_sigma_ref >= 0.0 && std::isfinite(noise_sigma_ref), "noise sigma must be finite and >= 0");
  if (mode == Mode::Epi) {
    require(frame_interval > 0.0, "EPI frame interval must be > 0");
    require(n_frames >= 1, "EPI needs at least one frame");
  } else {
    require(phases_per_cycle >= 1, "CINE needs at least one phase per cycle");
    require(acq_duration > 0.0, "CINE acquisition duration must be > 0");
  }
}

std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::mt19937_64 frame_stream(std::uint64_t seed, Mode mode, std::size_t frame_index)
{
  std::uint64_t const salt = mode == Mode::Cine ? 0x43494e45ull : 0x455049ull;
  std::uint64_t s = splitmix64(seed);
  s = splitmix64(s ^ salt);
  s = splitmix64(s + frame_index);
  return std::mt19937_64(s);
}

double wrap_phase(double phase)
{
  double w = phase - 2.0 * kPi * std::floor((phase + kPi) / (2.0 * kPi));
  if (w >= kPi) { w -= 2.0 * kPi; }
  if (w < -kPi) { w += 2.0 * kPi; }
  return w;
}

int cine_cycle_count(AcquisitionParams const &params, FlowWaveform const &waveform)
{
  return static_cast<int>(std::floor(params.acq_duration * waveform.rate_bpm() / 60.0 + 1e-9));
}

RealGrid rasterize_velocity(PhantomScene const &scene, double q, AcquisitionParams const &params, int supersampling)
{
  require(supersampling >= 1, "supersampling must be >= 1");
  require(std::isfinite(q) && q >= 0.0, "flow must be finite and >= 0");
  std::size_t const nx = params.matrix_width(), ny = params.matrix_height();
  RealGrid vmap(nx, ny, 0.0);
  double const px = params.pixel_size;
  double const x0 = -0.5 * params.fov.width, y0 = -0.5 * params.fov.height;
  double const inv = 1.0 / (static_cast<double>(supersampling) * supersampling);

  for (auto const &tube : scene.tubes()) {
    if (tube.is_static) { continue; }
    double const r = tube.radius();
    auto lo = [&](double c, double origin) {
      return static_cast<std::ptrdiff_t>(std::floor((c - r - origin) / px));
    };
    auto hi = [&](double c, double origin) {
      return static_cast<std::ptrdiff_t>(std::floor((c + r - origin) / px));
    };
    std::ptrdiff_t const ix0 = std::max<std::ptrdiff_t>(0, lo(tube.center.x, x0));
    std::ptrdiff_t const iy0 = std::max<std::ptrdiff_t>(0, lo(tube.center.y, y0));
    std::ptrdiff_t const ix1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(nx) - 1, hi(tube.center.x, x0));
    std::ptrdiff_t const iy1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(ny) - 1, hi(tube.center.y, y0));
    for (std::ptrdiff_t iy = iy0; iy <= iy1; ++iy) {
      for (std::ptrdiff_t ix = ix0; ix <= ix1; ++ix) {
        double sum = 0.0;
        for (int sy = 0; sy < supersampling; ++sy) {
          double const y = y0 + (static_cast<double>(iy) + (sy + 0.5) / supersampling) * px;
          for (int sx = 0; sx < supersampling; ++sx) {
            double const x = x0 + (static_cast<double>(ix) + (sx + 0.5) / supersampling) * px;
            sum += velocity_at(tube, q, {x, y});
          }
        }
        vmap(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy)) += sum * inv;
      }
    }
  }
  return vmap;
}

MaskGrid fluid_mask(PhantomScene const &scene, AcquisitionParams const &params)
{
  MaskGrid mask(params.matrix_width(), params.matrix_height(), 0);
  auto const tubes = scene.all_tubes();
  for (std::size_t iy = 0; iy < mask.height(); ++iy) {
    for (std::size_t ix = 0; ix < mask.width(); ++ix) {
      Vec2 const c = params.pixel_center(ix, iy);
      mask(ix, iy) = std::any_of(tubes.begin(), tubes.end(), [&](auto const &t) { return t.contains(c); });
    }
  }
  return mask;
}

Frame encode_frame(RealGrid const &vmap, AcquisitionParams const &params, MaskGrid const &fluid, double t,
                   double noise_sigma, std::mt19937_64 &rng)
{
  require(vmap.width() == params.matrix_width() && vmap.height() == params.matrix_height(),
          "velocity map does not match the acquisition matrix");
  require(fluid.same_shape(vmap), "fluid mask does not match the velocity map");
  Frame frame{RealGrid(vmap.width(), vmap.height()), RealGrid(vmap.width(), vmap.height()), t};
  std::normal_distribution<double> gauss(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);

  for (std::size_t iy = 0; iy < vmap.height(); ++iy) {
    for (std::size_t ix = 0; ix < vmap.width(); ++ix) {
      double const v = vmap(ix, iy);
      if (!std::isfinite(v)) { fail(ErrorKind::InvalidArgument, "non-finite velocity in velocity map"); }
      double const amp = fluid(ix, iy) ? kFluidAmplitude : kBackgroundAmplitude;
      double const phi = kPi * v / params.venc + params.background.at(params.pixel_center(ix, iy));
      if (noise_sigma > 0.0) {
        double const re = amp * std::cos(phi) + gauss(rng);
        double const im = amp * std::sin(phi) + gauss(rng);
        frame.magnitude(ix, iy) = std::hypot(re, im);
        frame.phase(ix, iy) = wrap_phase(std::atan2(im, re));
      } else {
        // Same result as the complex route, without the trig round trip.
        frame.magnitude(ix, iy) = amp;
        frame.phase(ix, iy) = wrap_phase(phi);
      }
    }
  }
  return frame;
}

namespace {

ImageSeries acquire(PhantomScene const &scene, AcquisitionParams const &params, std::vector<double> const &times,
                    double sigma, int supersampling)
{
  RealGrid const unit = rasterize_velocity(scene, 1.0, params, supersampling);
  MaskGrid const fluid = fluid_mask(scene, params);
  ImageSeries series{{}, params, scene, scene.hash()};
  series.frames.reserve(times.size());
  RealGrid vmap(unit.width(), unit.height());
  for (std::size_t i = 0; i < times.size(); ++i) {
    double const q = flow_at(scene.waveform(), times[i]);
    for (std::size_t k = 0; k < unit.size(); ++k) { vmap[k] = q * unit[k]; }
    auto rng = frame_stream(params.rng_seed, params.mode, i);
    series.frames.push_back(encode_frame(vmap, params, fluid, times[i], sigma, rng));
  }
  return series;
}

} // namespace

ImageSeries acquire_epi(PhantomScene const &scene, AcquisitionParams const &params, int supersampling)
{
  require(params.mode == Mode::Epi, "acquire_epi needs EPI parameters");
  params.validate();
  std::vector<double> times(static_cast<std::size_t>(params.n_frames));
  for (std::size_t i = 0; i < times.size(); ++i) { times[i] = (static_cast<double>(i) + 0.5) * params.frame_interval; }
  return acquire(scene, params, times, params.effective_sigma(), supersampling);
}

ImageSeries acquire_cine(PhantomScene const &scene, AcquisitionParams const &params, int supersampling)
{
  require(params.mode == Mode::Cine, "acquire_cine needs CINE parameters");
  params.validate();
  int const n_cycles = cine_cycle_count(params, scene.waveform());
  require(n_cycles >= 1, "CINE acquisition shorter than one cycle");
  double const period = scene.waveform().period();
  std::vector<double> times(static_cast<std::size_t>(params.phases_per_cycle));
  for (std::size_t i = 0; i < times.size(); ++i) {
    times[i] = (static_cast<double>(i) + 0.5) * period / params.phases_per_cycle;
  }
  return acquire(scene, params, times, params.effective_sigma() / std::sqrt(static_cast<double>(n_cycles)),
                 supersampling);
}

} // namespace pcflow
