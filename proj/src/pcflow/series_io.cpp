#include "pcflow/series_io.hpp"

#include "pcflow/error.hpp"

#include <json.hpp>

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace pcflow {

using nlohmann::json;

namespace {

constexpr char const *kFormat = "pcflow-series";
constexpr int kVersion = 1;

json to_json(TubeGeometry const &t)
{
  return {{"center_x_mm", t.center.x}, {"center_y_mm", t.center.y}, {"diameter_mm", t.diameter},
          {"static", t.is_static}};
}

TubeGeometry tube_from(json const &j)
{
  return {{j.at("center_x_mm").get<double>(), j.at("center_y_mm").get<double>()}, j.at("diameter_mm").get<double>(),
          j.at("static").get<bool>()};
}

json to_json(PhantomScene const &scene)
{
  json tubes = json::array();
  for (auto const &t : scene.tubes()) { tubes.push_back(to_json(t)); }
  json harmonics = json::array();
  for (auto const &h : scene.waveform().harmonics()) { harmonics.push_back({h.amplitude, h.phase}); }
  return {{"tubes", tubes},
          {"static_tube", to_json(scene.static_tube())},
          {"waveform",
           {{"mean_flow_mm3_s", scene.waveform().mean_flow()},
            {"rate_bpm", scene.waveform().rate_bpm()},
            {"harmonics", harmonics}}},
          {"fov_mm", {scene.fov().width, scene.fov().height}}};
}

PhantomScene scene_from(json const &j)
{
  std::vector<TubeGeometry> tubes;
  for (auto const &t : j.at("tubes")) { tubes.push_back(tube_from(t)); }
  std::vector<Harmonic> harmonics;
  auto const &w = j.at("waveform");
  for (auto const &h : w.at("harmonics")) { harmonics.push_back({h.at(0).get<double>(), h.at(1).get<double>()}); }
  return PhantomScene(std::move(tubes), tube_from(j.at("static_tube")),
                      FlowWaveform(w.at("mean_flow_mm3_s").get<double>(), w.at("rate_bpm").get<double>(),
                                   std::move(harmonics)),
                      Fov{j.at("fov_mm").at(0).get<double>(), j.at("fov_mm").at(1).get<double>()});
}

json to_json(AcquisitionParams const &p)
{
  return {{"mode", to_string(p.mode)},
          {"venc_mm_s", p.venc},
          {"pixel_size_mm", p.pixel_size},
          {"fov_mm", {p.fov.width, p.fov.height}},
          {"frame_interval_s", p.frame_interval},
          {"n_frames", p.n_frames},
          {"phases_per_cycle", p.phases_per_cycle},
          {"acq_duration_s", p.acq_duration},
          {"noise_sigma_ref", p.noise_sigma_ref},
          {"background", {p.background.offset, p.background.slope_x, p.background.slope_y}},
          {"rng_seed", p.rng_seed},
          {"metadata",
           {{"tr_ms", p.metadata.tr_ms},
            {"te_ms", p.metadata.te_ms},
            {"flip_deg", p.metadata.flip_deg},
            {"epi_factor", p.metadata.epi_factor},
            {"sense_factor", p.metadata.sense_factor},
            {"thickness_mm", p.metadata.thickness_mm}}}};
}

AcquisitionParams params_from(json const &j)
{
  AcquisitionParams p;
  p.mode = mode_from_string(j.at("mode").get<std::string>());
  p.venc = j.at("venc_mm_s").get<double>();
  p.pixel_size = j.at("pixel_size_mm").get<double>();
  p.fov = {j.at("fov_mm").at(0).get<double>(), j.at("fov_mm").at(1).get<double>()};
  p.frame_interval = j.at("frame_interval_s").get<double>();
  p.n_frames = j.at("n_frames").get<int>();
  p.phases_per_cycle = j.at("phases_per_cycle").get<int>();
  p.acq_duration = j.at("acq_duration_s").get<double>();
  p.noise_sigma_ref = j.at("noise_sigma_ref").get<double>();
  auto const &bg = j.at("background");
  p.background = {bg.at(0).get<double>(), bg.at(1).get<double>(), bg.at(2).get<double>()};
  p.rng_seed = j.at("rng_seed").get<std::uint64_t>();
  auto const &m = j.at("metadata");
  p.metadata = {m.at("tr_ms").get<double>(),     m.at("te_ms").get<double>(),        m.at("flip_deg").get<double>(),
                m.at("epi_factor").get<int>(), m.at("sense_factor").get<double>(), m.at("thickness_mm").get<double>()};
  return p;
}

std::string frame_file(std::size_t i)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "frame_%04zu.bin", i);
  return buf;
}

void put_le(std::string &out, float value)
{
  auto const bits = std::bit_cast<std::uint32_t>(value);
  for (int b = 0; b < 4; ++b) { out.push_back(static_cast<char>((bits >> (8 * b)) & 0xffu)); }
}

float get_le(unsigned char const *p)
{
  std::uint32_t bits = 0;
  for (int b = 0; b < 4; ++b) { bits |= static_cast<std::uint32_t>(p[b]) << (8 * b); }
  return std::bit_cast<float>(bits);
}

} // namespace

float quantize_phase(double phase)
{
  float f = static_cast<float>(phase);
  if (static_cast<double>(f) >= kPi) { f = std::nextafter(static_cast<float>(kPi), 0.0f); }
  if (static_cast<double>(f) < -kPi) { f = -std::nextafter(static_cast<float>(kPi), 0.0f); }
  return f;
}

void save_series(ImageSeries const &series, std::filesystem::path const &dir)
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) { fail(ErrorKind::Io, "cannot create directory " + dir.string() + ": " + ec.message()); }

  std::size_t const w = series.frames.empty() ? series.params.matrix_width() : series.frames.front().magnitude.width();
  std::size_t const h = series.frames.empty() ? series.params.matrix_height() : series.frames.front().magnitude.height();
  json timestamps = json::array();
  for (auto const &f : series.frames) { timestamps.push_back(f.timestamp); }
  json header = {{"format", kFormat},
                 {"version", kVersion},
                 {"params", to_json(series.params)},
                 {"scene", to_json(series.scene)},
                 {"scene_hash", series.scene_hash},
                 {"frame_count", series.frames.size()},
                 {"width", w},
                 {"height", h},
                 {"dtype", "float32"},
                 {"endianness", "little"},
                 {"planes", {"magnitude", "phase"}},
                 {"timestamps_s", timestamps}};

  auto const header_path = dir / "series.json";
  std::ofstream hs(header_path, std::ios::binary);
  hs << header.dump(2) << '\n';
  if (!hs) { fail(ErrorKind::Io, "cannot write " + header_path.string()); }

  for (std::size_t i = 0; i < series.frames.size(); ++i) {
    auto const &f = series.frames[i];
    require(f.magnitude.width() == w && f.magnitude.height() == h && f.phase.same_shape(f.magnitude),
            "frame " + std::to_string(i) + " has inconsistent dimensions");
    std::string bytes;
    bytes.reserve(8 * w * h);
    for (double v : f.magnitude.values()) { put_le(bytes, static_cast<float>(v)); }
    for (double v : f.phase.values()) { put_le(bytes, quantize_phase(v)); }
    auto const path = dir / frame_file(i);
    std::ofstream fs(path, std::ios::binary);
    fs.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!fs) { fail(ErrorKind::Io, "cannot write " + path.string()); }
  }
}

ImageSeries load_series(std::filesystem::path const &dir)
{
  auto const header_path = dir / "series.json";
  std::ifstream hs(header_path);
  if (!hs) { fail(ErrorKind::Io, "cannot open " + header_path.string()); }
  json header;
  try {
    header = json::parse(hs);
    if (header.at("format").get<std::string>() != kFormat || header.at("version").get<int>() != kVersion) {
      fail(ErrorKind::Io, header_path.string() + ": unsupported format/version");
    }
    if (header.at("dtype").get<std::string>() != "float32" || header.at("endianness").get<std::string>() != "little") {
      fail(ErrorKind::Io, header_path.string() + ": only little-endian float32 frames are supported");
    }
  } catch (json::exception const &e) {
    fail(ErrorKind::Io, header_path.string() + ": " + e.what());
  }

  try {
    auto params = params_from(header.at("params"));
    auto scene = scene_from(header.at("scene"));
    auto const hash = header.at("scene_hash").get<std::string>();
    if (hash != scene.hash()) { fail(ErrorKind::Io, header_path.string() + ": scene hash mismatch"); }
    auto const n = header.at("frame_count").get<std::size_t>();
    auto const w = header.at("width").get<std::size_t>();
    auto const h = header.at("height").get<std::size_t>();
    auto const &ts = header.at("timestamps_s");
    if (ts.size() != n) { fail(ErrorKind::Io, header_path.string() + ": timestamp count mismatch"); }

    ImageSeries series{{}, params, scene, hash};
    series.frames.reserve(n);
    std::vector<unsigned char> bytes(8 * w * h);
    for (std::size_t i = 0; i < n; ++i) {
      auto const path = dir / frame_file(i);
      std::ifstream fs(path, std::ios::binary);
      fs.read(reinterpret_cast<char *>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
      if (!fs || fs.peek() != std::ifstream::traits_type::eof()) {
        fail(ErrorKind::Io, path.string() + ": unexpected size (want " + std::to_string(bytes.size()) + " bytes)");
      }
      Frame f{RealGrid(w, h), RealGrid(w, h), ts.at(i).get<double>()};
      for (std::size_t k = 0; k < w * h; ++k) {
        f.magnitude[k] = get_le(&bytes[4 * k]);
        f.phase[k] = get_le(&bytes[4 * (w * h + k)]);
      }
      series.frames.push_back(std::move(f));
    }
    return series;
  } catch (json::exception const &e) {
    fail(ErrorKind::Io, header_path.string() + ": " + e.what());
  }
}

} // namespace pcflow
