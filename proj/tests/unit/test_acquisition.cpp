#include "pcflow/acquisition.hpp"
#include "pcflow/error.hpp"
#include "pcflow/quantify.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <tuple>

using namespace pcflow;

namespace {

AcquisitionParams noiseless(AcquisitionParams p)
{
  p.noise_sigma_ref = 0.0;
  return p;
}

// One-pixel frame encoding a given velocity with no background and no noise.
Frame encode_one(double v, double venc = 50.0)
{
  AcquisitionParams p = noiseless(AcquisitionParams::epi_defaults());
  p.venc = venc;
  p.background = {0.0, 0.0, 0.0};
  p.fov = {1.2, 1.2};
  RealGrid vm(1, 1, v);
  MaskGrid fluid(1, 1, 1);
  std::mt19937_64 rng(1);
  return encode_frame(vm, p, fluid, 0.0, 0.0, rng);
}

} // namespace

TEST_CASE("defaults follow the scanner protocol")
{
  auto const epi = AcquisitionParams::epi_defaults();
  CHECK(epi.mode == Mode::Epi);
  CHECK(epi.venc == 50.0);
  CHECK(epi.pixel_size == 1.2);
  CHECK(epi.frame_interval == 0.062);
  CHECK(epi.n_frames == 150);
  CHECK(epi.acq_duration == doctest::Approx(150 * 0.062));
  CHECK(epi.metadata.epi_factor == 9);
  auto const cine = AcquisitionParams::cine_defaults();
  CHECK(cine.mode == Mode::Cine);
  CHECK(cine.phases_per_cycle == 32);
  CHECK(cine.acq_duration == 23.6);
  CHECK(cine_cycle_count(cine, default_scene().waveform()) == 38);
}

TEST_CASE("matrix size is ceil(fov / pixel)")
{
  AcquisitionParams p;
  using Case = std::tuple<double, std::size_t, std::size_t>;
  for (auto [px, w, h] : {Case{1.2, 84, 50}, Case{0.8, 125, 75}, Case{4.4, 23, 14}, Case{2.0, 50, 30}}) {
    p.pixel_size = px;
    CHECK(p.matrix_width() == w);
    CHECK(p.matrix_height() == h);
  }
}

TEST_CASE("noise scales with inverse pixel area")
{
  AcquisitionParams p;
  CHECK(p.effective_sigma() == doctest::Approx(0.12));
  p.pixel_size = 2.4;
  CHECK(p.effective_sigma() == doctest::Approx(0.03));
  p.pixel_size = 0.6;
  CHECK(p.effective_sigma() == doctest::Approx(0.48));
}

TEST_CASE("pixel centers and lookup agree")
{
  AcquisitionParams p;
  for (std::size_t iy = 0; iy < p.matrix_height(); iy += 7) {
    for (std::size_t ix = 0; ix < p.matrix_width(); ix += 5) {
      std::size_t jx = 99, jy = 99;
      REQUIRE(p.pixel_of(p.pixel_center(ix, iy), jx, jy));
      CHECK(jx == ix);
      CHECK(jy == iy);
    }
  }
  Vec2 const c = p.pixel_center(0, 0);
  CHECK(c.x == doctest::Approx(-50.0 + 0.6));
  CHECK(c.y == doctest::Approx(-30.0 + 0.6));
  std::size_t x, y;
  CHECK_FALSE(p.pixel_of({60.0, 0.0}, x, y));
}

TEST_CASE("wrap_phase lands in [-pi, pi)")
{
  CHECK(wrap_phase(0.0) == 0.0);
  CHECK(wrap_phase(kPi) == -kPi);
  CHECK(wrap_phase(-kPi) == -kPi);
  CHECK(wrap_phase(1.2 * kPi) == doctest::Approx(-0.8 * kPi));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-40.0, 40.0);
  for (int i = 0; i < 100000; ++i) {
    double const x = u(rng);
    double const w = wrap_phase(x);
    REQUIRE(w >= -kPi);
    REQUIRE(w < kPi);
    CHECK(std::abs(std::remainder(w - x, 2 * kPi)) < 1e-9);
  }
}

TEST_CASE("encoding examples")
{
  CHECK(encode_one(0.0).phase(0, 0) == 0.0);
  CHECK(encode_one(0.0).magnitude(0, 0) == kFluidAmplitude);
  auto const f50 = encode_one(50.0);
  CHECK(f50.phase(0, 0) == -kPi);
  CHECK(std::abs(decode_velocity(f50, 50.0)(0, 0)) == doctest::Approx(50.0));
  auto const f60 = encode_one(60.0);
  CHECK(f60.phase(0, 0) == doctest::Approx(-0.8 * kPi).epsilon(1e-14));
  CHECK(decode_velocity(f60, 50.0)(0, 0) == doctest::Approx(-40.0).epsilon(1e-14));
  CHECK_THROWS_AS(encode_one(std::nan("")), Error);
  CHECK_THROWS_AS(encode_one(INFINITY), Error);
}

TEST_CASE("noiseless encode/decode roundtrip below venc")
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0);
  double worst = 0.0;
  for (int i = 0; i < 100000; ++i) {
    double v = u(rng);
    if (std::abs(v) >= 50.0) { continue; }
    worst = std::max(worst, std::abs(decode_velocity(encode_one(v), 50.0)(0, 0) - v));
  }
  CHECK(worst < 1e-9);
}

TEST_CASE("emitted phase stays in range with noise and aliasing")
{
  AcquisitionParams p = AcquisitionParams::epi_defaults();
  p.noise_sigma_ref = 0.5;
  std::mt19937_64 vr(8);
  std::uniform_real_distribution<double> u(-200.0, 200.0);
  RealGrid vm(p.matrix_width(), p.matrix_height());
  for (auto &v : vm.values()) { v = u(vr); }
  MaskGrid fluid(vm.width(), vm.height(), 1);
  for (std::size_t k = 0; k < fluid.size(); k += 3) { fluid[k] = 0; }
  std::mt19937_64 rng(9);
  auto const f = encode_frame(vm, p, fluid, 0.0, p.effective_sigma(), rng);
  for (double ph : f.phase.values()) {
    REQUIRE(ph >= -kPi);
    REQUIRE(ph < kPi);
  }
  for (double m : f.magnitude.values()) { REQUIRE(m >= 0.0); }
}

TEST_CASE("background phase and magnitude levels")
{
  AcquisitionParams p = noiseless(AcquisitionParams::epi_defaults());
  auto const scene = default_scene();
  RealGrid vm(p.matrix_width(), p.matrix_height(), 0.0);
  auto const fluid = fluid_mask(scene, p);
  std::mt19937_64 rng(1);
  auto const f = encode_frame(vm, p, fluid, 0.0, 0.0, rng);
  for (std::size_t iy = 0; iy < vm.height(); ++iy) {
    for (std::size_t ix = 0; ix < vm.width(); ++ix) {
      Vec2 const c = p.pixel_center(ix, iy);
      CHECK(f.phase(ix, iy) == doctest::Approx(p.background.at(c)).epsilon(1e-12));
      bool inside = false;
      for (auto const &t : scene.all_tubes()) { inside = inside || t.contains(c); }
      CHECK(f.magnitude(ix, iy) == (inside ? kFluidAmplitude : kBackgroundAmplitude));
    }
  }
}

TEST_CASE("rasterization")
{
  auto const scene = default_scene();
  AcquisitionParams p;
  auto const vm = rasterize_velocity(scene, 1150.0, p, 16);
  std::size_t ix, iy;
  REQUIRE(p.pixel_of(scene.static_tube().center, ix, iy));
  CHECK(vm(ix, iy) == 0.0);
  REQUIRE(p.pixel_of({45.0, 25.0}, ix, iy));
  CHECK(vm(ix, iy) == 0.0);

  // Pixel containing the tube-1 center against a 256x256 converged reference.
  auto const &t1 = scene.tubes()[0];
  REQUIRE(p.pixel_of(t1.center, ix, iy));
  Vec2 const c = p.pixel_center(ix, iy);
  int const n = 256;
  double ref = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      ref += velocity_at(t1, 1150.0, {c.x - 0.6 + 1.2 * (a + 0.5) / n, c.y - 0.6 + 1.2 * (b + 0.5) / n});
    }
  }
  ref /= n * n;
  CHECK(std::abs(vm(ix, iy) - ref) <= 0.005 * ref);
  CHECK(rasterize_velocity(scene, 1150.0, p, 256)(ix, iy) == doctest::Approx(ref).epsilon(1e-12));

  // Summed over the whole map the rasterized field still carries the flow of
  // all four tubes.
  double total = 0.0;
  for (double v : vm.values()) { total += v * 1.44; }
  CHECK(total == doctest::Approx(4 * 1150.0).epsilon(2e-3));
}

TEST_CASE("EPI series timing")
{
  auto p = noiseless(AcquisitionParams::epi_defaults());
  auto const s = acquire_epi(default_scene(), p);
  REQUIRE(s.frames.size() == 150);
  for (std::size_t i = 0; i < s.frames.size(); ++i) {
    CHECK(s.frames[i].timestamp == doctest::Approx((i + 0.5) * 0.062).epsilon(1e-14));
  }
  double const span = s.frames.size() * p.frame_interval;
  CHECK(span == doctest::Approx(9.3));
  CHECK(default_scene().waveform().period() / p.frame_interval == doctest::Approx(9.78).epsilon(1e-3));
  CHECK(s.scene_hash == default_scene().hash());
  CHECK(s.params == p);
  CHECK_THROWS_AS(acquire_epi(default_scene(), AcquisitionParams::cine_defaults()), Error);
}

TEST_CASE("static scene without noise gives identical frames")
{
  auto const d = default_scene();
  std::vector<TubeGeometry> tubes = d.tubes();
  for (auto &t : tubes) { t.is_static = true; }
  PhantomScene still(tubes, d.static_tube(), d.waveform(), d.fov());
  auto const s = acquire_epi(still, noiseless(AcquisitionParams::epi_defaults()));
  for (auto const &f : s.frames) {
    CHECK(f.magnitude == s.frames.front().magnitude);
    CHECK(f.phase == s.frames.front().phase);
  }
}

TEST_CASE("CINE series samples bin centers")
{
  auto const scene = default_scene();
  auto p = noiseless(AcquisitionParams::cine_defaults());
  auto const s = acquire_cine(scene, p);
  REQUIRE(s.frames.size() == 32);
  double const period = scene.waveform().period();
  auto const fluid = fluid_mask(scene, p);
  auto const unit = rasterize_velocity(scene, 1.0, p);
  for (std::size_t i = 0; i < 32; ++i) {
    double const t = (i + 0.5) * period / 32;
    CHECK(s.frames[i].timestamp == doctest::Approx(t).epsilon(1e-14));
    RealGrid vm = unit;
    for (auto &v : vm.values()) { v *= flow_at(scene.waveform(), t); }
    std::mt19937_64 rng(0);
    auto const ideal = encode_frame(vm, p, fluid, t, 0.0, rng);
    for (std::size_t k = 0; k < ideal.phase.size(); ++k) {
      REQUIRE(s.frames[i].phase[k] == doctest::Approx(ideal.phase[k]).epsilon(1e-12));
      REQUIRE(s.frames[i].magnitude[k] == ideal.magnitude[k]);
    }
  }
}

TEST_CASE("noise is deterministic per seed")
{
  auto const scene = default_scene();
  auto p = AcquisitionParams::epi_defaults();
  p.n_frames = 20;
  p.acq_duration = 20 * p.frame_interval;
  p.rng_seed = 42;
  auto const a = acquire_epi(scene, p);
  auto const b = acquire_epi(scene, p);
  for (std::size_t i = 0; i < a.frames.size(); ++i) { CHECK(a.frames[i] == b.frames[i]); }
  p.rng_seed = 43;
  auto const c = acquire_epi(scene, p);
  CHECK_FALSE(a.frames[0] == c.frames[0]);
}

TEST_CASE("CINE phase noise is reduced by sqrt(38)")
{
  // Phase deviation from the noiseless image over every fluid pixel (signal
  // amplitude 1, where the phase SD is the SNR-limited one) of both modes.
  auto const scene = default_scene();
  auto sd_of = [&](AcquisitionParams p, std::uint64_t seeds) {
    std::vector<double> dev;
    auto q = noiseless(p);
    auto const clean = p.mode == Mode::Cine ? acquire_cine(scene, q) : acquire_epi(scene, q);
    auto const fluid = fluid_mask(scene, p);
    for (std::uint64_t s = 1; s <= seeds; ++s) {
      p.rng_seed = s;
      auto const noisy = p.mode == Mode::Cine ? acquire_cine(scene, p) : acquire_epi(scene, p);
      for (std::size_t i = 0; i < noisy.frames.size(); ++i) {
        for (std::size_t k = 0; k < fluid.size(); ++k) {
          if (fluid[k]) { dev.push_back(wrap_phase(noisy.frames[i].phase[k] - clean.frames[i].phase[k])); }
        }
      }
    }
    double ss = 0.0;
    for (double d : dev) { ss += d * d; }
    return std::pair{std::sqrt(ss / static_cast<double>(dev.size())), dev.size()};
  };
  auto const [epi_sd, n_epi] = sd_of(AcquisitionParams::epi_defaults(), 1);
  auto const [cine_sd, n_cine] = sd_of(AcquisitionParams::cine_defaults(), 4);
  CHECK(n_epi >= 10000);
  CHECK(n_cine >= 10000);
  double const expected = epi_sd / std::sqrt(38.0);
  CHECK(std::abs(cine_sd - expected) <= 0.15 * expected);
}

TEST_CASE("partial-volume area error grows from 2.8 to 4.4 mm")
{
  auto const scene = default_scene();
  double prev_err = -1.0;
  for (double px : {2.8, 3.2, 3.6, 4.0, 4.4}) {
    auto p = noiseless(AcquisitionParams::cine_defaults());
    p.pixel_size = px;
    auto const mask = segment_vessel(acquire_cine(scene, p), scene.tubes()[0].center);
    double const err = std::abs(mask.area() - scene.tubes()[0].area());
    CHECK(err >= prev_err - px * px);
    prev_err = err;
  }
}

TEST_CASE("parameter validation")
{
  AcquisitionParams p;
  CHECK_NOTHROW(p.validate());
  p.venc = 0.0;
  CHECK_THROWS_AS(p.validate(), Error);
  p = {};
  p.pixel_size = -1.0;
  CHECK_THROWS_AS(p.validate(), Error);
  CHECK(mode_from_string("cine") == Mode::Cine);
  CHECK(mode_from_string("EPI") == Mode::Epi);
  CHECK_THROWS_AS(mode_from_string("flash"), Error);
}
