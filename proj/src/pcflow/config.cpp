#include "pcflow/config.hpp"

#include "pcflow/error.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace pcflow {

namespace pt = boost::property_tree;

std::vector<double> SweepSettings::sizes() const
{
  require(step > 0.0 && min_px > 0.0 && min_px <= max_px, "sweep needs step > 0 and 0 < min <= max");
  auto const n = static_cast<std::size_t>(std::floor((max_px - min_px) / step + 1e-9)) + 1;
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    // Round to 1e-9 mm so 0.8 + 3 * 0.4 prints and hashes as 2.0.
    out[k] = std::round((min_px + static_cast<double>(k) * step) * 1e9) / 1e9;
  }
  return out;
}

void ExperimentConfig::validate() const
{
  require(cine.mode == Mode::Cine && epi.mode == Mode::Epi, "acquisition modes are fixed per section");
  cine.validate();
  epi.validate();
  require(supersampling >= 1, "supersampling must be >= 1");
  require(vessel_tube < scene.tubes().size(), "vessel_tube index out of range");
  require(n_repeats >= 1, "n_repeats must be >= 1");
  require(sweep.repeats_per_size >= 1, "sweep repeats_per_size must be >= 1");
  (void)sweep.sizes();
  require(threads >= 0, "threads must be >= 0");
}

namespace {

[[noreturn]] void config_error(std::string const &origin, std::string const &what)
{
  fail(ErrorKind::Config, origin + ": " + what);
}

std::vector<double> numbers(std::string const &text, std::string const &key, std::string const &origin)
{
  std::vector<double> out;
  std::string token;
  std::istringstream in(text);
  while (in >> token) {
    double v = 0.0;
    auto const [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc{} || ptr != token.data() + token.size() || !std::isfinite(v)) {
      config_error(origin, "key '" + key + "': '" + token + "' is not a number");
    }
    out.push_back(v);
  }
  return out;
}

// Entries separated by ',', each a whitespace-separated list of numbers.
std::vector<std::vector<double>> groups(std::string const &text, std::string const &key, std::string const &origin,
                                        std::size_t arity)
{
  std::vector<std::vector<double>> out;
  std::string part;
  std::istringstream in(text);
  while (std::getline(in, part, ',')) {
    auto g = numbers(part, key, origin);
    if (g.empty()) { continue; }
    if (g.size() != arity) {
      config_error(origin, "key '" + key + "': each entry needs " + std::to_string(arity) + " numbers");
    }
    out.push_back(std::move(g));
  }
  return out;
}

double one(std::string const &text, std::string const &key, std::string const &origin)
{
  auto const v = numbers(text, key, origin);
  if (v.size() != 1) { config_error(origin, "key '" + key + "' expects a single number"); }
  return v.front();
}

template <typename Int>
Int integer(std::string const &text, std::string const &key, std::string const &origin)
{
  Int v{};
  auto const [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    config_error(origin, "key '" + key + "' expects an integer, got '" + text + "'");
  }
  return v;
}

bool boolean(std::string const &text, std::string const &key, std::string const &origin)
{
  if (text == "true" || text == "1" || text == "yes") { return true; }
  if (text == "false" || text == "0" || text == "no") { return false; }
  config_error(origin, "key '" + key + "' expects true/false, got '" + text + "'");
}

struct SceneDraft
{
  double mean_flow;
  double rate_bpm;
  std::vector<Harmonic> harmonics;
  std::vector<TubeGeometry> tubes;
  TubeGeometry static_tube;
  Fov fov;

  explicit SceneDraft(PhantomScene const &s)
    : mean_flow(s.waveform().mean_flow()), rate_bpm(s.waveform().rate_bpm()), harmonics(s.waveform().harmonics()),
      tubes(s.tubes()), static_tube(s.static_tube()), fov(s.fov())
  {
  }
};

using Setter = std::function<void(std::string const &)>;

} // namespace

ExperimentConfig parse_config(std::istream &in, std::string const &origin)
{
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (pt::ini_parser_error const &e) {
    config_error(origin, e.message() + " (line " + std::to_string(e.line()) + ")");
  }

  ExperimentConfig cfg;
  SceneDraft scene(cfg.scene);
  std::string const o = origin;

  auto metadata = [&](AcquisitionParams &p, std::string const &sec) -> std::map<std::string, Setter> {
    return {
      {"tr_ms", [&p, sec, o](auto const &v) { p.metadata.tr_ms = one(v, sec + ".tr_ms", o); }},
      {"te_ms", [&p, sec, o](auto const &v) { p.metadata.te_ms = one(v, sec + ".te_ms", o); }},
      {"flip_deg", [&p, sec, o](auto const &v) { p.metadata.flip_deg = one(v, sec + ".flip_deg", o); }},
      {"sense_factor", [&p, sec, o](auto const &v) { p.metadata.sense_factor = one(v, sec + ".sense_factor", o); }},
      {"thickness_mm", [&p, sec, o](auto const &v) { p.metadata.thickness_mm = one(v, sec + ".thickness_mm", o); }},
    };
  };

  std::map<std::string, std::map<std::string, Setter>> schema;
  schema["scene"] = {
    {"mean_flow_mm3_s", [&](auto const &v) { scene.mean_flow = one(v, "scene.mean_flow_mm3_s", o); }},
    {"rate_bpm", [&](auto const &v) { scene.rate_bpm = one(v, "scene.rate_bpm", o); }},
    {"harmonics",
     [&](auto const &v) {
       scene.harmonics.clear();
       for (auto const &g : groups(v, "scene.harmonics", o, 2)) { scene.harmonics.push_back({g[0], g[1]}); }
     }},
    {"tubes",
     [&](auto const &v) {
       scene.tubes.clear();
       for (auto const &g : groups(v, "scene.tubes", o, 3)) { scene.tubes.push_back({{g[0], g[1]}, g[2], false}); }
     }},
    {"static_tube",
     [&](auto const &v) {
       auto const g = groups(v, "scene.static_tube", o, 3);
       if (g.size() != 1) { config_error(o, "key 'scene.static_tube' expects one 'x y diameter' entry"); }
       scene.static_tube = {{g[0][0], g[0][1]}, g[0][2], true};
     }},
    {"fov_mm",
     [&](auto const &v) {
       auto const g = numbers(v, "scene.fov_mm", o);
       if (g.size() != 2) { config_error(o, "key 'scene.fov_mm' expects 'width height'"); }
       scene.fov = {g[0], g[1]};
     }},
  };
  schema["acquisition"] = {
    {"venc_mm_s", [&](auto const &v) { cfg.cine.venc = cfg.epi.venc = one(v, "acquisition.venc_mm_s", o); }},
    {"pixel_size_mm",
     [&](auto const &v) { cfg.cine.pixel_size = cfg.epi.pixel_size = one(v, "acquisition.pixel_size_mm", o); }},
    {"noise_sigma_ref",
     [&](auto const &v) {
       cfg.cine.noise_sigma_ref = cfg.epi.noise_sigma_ref = one(v, "acquisition.noise_sigma_ref", o);
     }},
    {"background",
     [&](auto const &v) {
       auto const g = numbers(v, "acquisition.background", o);
       if (g.size() != 3) { config_error(o, "key 'acquisition.background' expects 'offset slope_x slope_y'"); }
       cfg.cine.background = cfg.epi.background = {g[0], g[1], g[2]};
     }},
    {"supersampling", [&](auto const &v) { cfg.supersampling = integer<int>(v, "acquisition.supersampling", o); }},
  };
  schema["cine"] = metadata(cfg.cine, "cine");
  schema["cine"]["phases_per_cycle"] = [&](auto const &v) {
    cfg.cine.phases_per_cycle = integer<int>(v, "cine.phases_per_cycle", o);
  };
  schema["cine"]["acq_duration_s"] = [&](auto const &v) { cfg.cine.acq_duration = one(v, "cine.acq_duration_s", o); };
  schema["epi"] = metadata(cfg.epi, "epi");
  schema["epi"]["frame_interval_s"] = [&](auto const &v) {
    cfg.epi.frame_interval = one(v, "epi.frame_interval_s", o);
  };
  schema["epi"]["n_frames"] = [&](auto const &v) { cfg.epi.n_frames = integer<int>(v, "epi.n_frames", o); };
  schema["epi"]["epi_factor"] = [&](auto const &v) {
    cfg.epi.metadata.epi_factor = integer<int>(v, "epi.epi_factor", o);
  };
  schema["experiment"] = {
    {"n_repeats", [&](auto const &v) { cfg.n_repeats = integer<int>(v, "experiment.n_repeats", o); }},
    {"base_seed", [&](auto const &v) { cfg.base_seed = integer<std::uint64_t>(v, "experiment.base_seed", o); }},
    {"output_dir", [&](auto const &v) { cfg.output_dir = v; }},
    {"noiseless", [&](auto const &v) { cfg.noiseless = boolean(v, "experiment.noiseless", o); }},
    {"vessel_tube", [&](auto const &v) { cfg.vessel_tube = integer<std::size_t>(v, "experiment.vessel_tube", o); }},
    {"threads", [&](auto const &v) { cfg.threads = integer<int>(v, "experiment.threads", o); }},
  };
  schema["sweep"] = {
    {"min_px_mm", [&](auto const &v) { cfg.sweep.min_px = one(v, "sweep.min_px_mm", o); }},
    {"max_px_mm", [&](auto const &v) { cfg.sweep.max_px = one(v, "sweep.max_px_mm", o); }},
    {"step_mm", [&](auto const &v) { cfg.sweep.step = one(v, "sweep.step_mm", o); }},
    {"repeats_per_size",
     [&](auto const &v) { cfg.sweep.repeats_per_size = integer<int>(v, "sweep.repeats_per_size", o); }},
  };

  for (auto const &[section, body] : tree) {
    auto const sec = schema.find(section);
    if (sec == schema.end()) {
      if (body.empty() && !body.data().empty()) { config_error(o, "key '" + section + "' must be inside a section"); }
      config_error(o, "unknown section [" + section + "]");
    }
    for (auto const &[key, value] : body) {
      auto const setter = sec->second.find(key);
      if (setter == sec->second.end()) { config_error(o, "unknown key '" + section + "." + key + "'"); }
      setter->second(value.data());
    }
  }

  try {
    cfg.scene = PhantomScene(scene.tubes, scene.static_tube, FlowWaveform(scene.mean_flow, scene.rate_bpm, scene.harmonics),
                             scene.fov);
    cfg.cine.fov = cfg.epi.fov = scene.fov;
    cfg.epi.acq_duration = cfg.epi.n_frames * cfg.epi.frame_interval;
    cfg.validate();
  } catch (Error const &e) {
    config_error(o, e.what());
  }
  return cfg;
}

ExperimentConfig load_config(std::filesystem::path const &path)
{
  std::ifstream in(path);
  if (!in) { fail(ErrorKind::Io, "cannot open config file " + path.string()); }
  return parse_config(in, path.string());
}

void write_config(std::ostream &out, ExperimentConfig const &c)
{
  auto list = [](auto const &items, auto &&fmt) {
    std::ostringstream s;
    s.precision(17);
    for (std::size_t i = 0; i < items.size(); ++i) { s << (i ? ", " : "") << fmt(items[i]); }
    return s.str();
  };
  auto num = [](double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  };
  auto tube = [&](TubeGeometry const &t) { return num(t.center.x) + " " + num(t.center.y) + " " + num(t.diameter); };
  auto const &w = c.scene.waveform();
  out << "[scene]\n"
      << "mean_flow_mm3_s = " << num(w.mean_flow()) << "\n"
      << "rate_bpm = " << num(w.rate_bpm()) << "\n"
      << "harmonics = " << list(w.harmonics(), [&](Harmonic const &h) { return num(h.amplitude) + " " + num(h.phase); })
      << "\n"
      << "tubes = " << list(c.scene.tubes(), tube) << "\n"
      << "static_tube = " << tube(c.scene.static_tube()) << "\n"
      << "fov_mm = " << num(c.scene.fov().width) << " " << num(c.scene.fov().height) << "\n\n"
      << "[acquisition]\n"
      << "venc_mm_s = " << num(c.epi.venc) << "\n"
      << "pixel_size_mm = " << num(c.epi.pixel_size) << "\n"
      << "noise_sigma_ref = " << num(c.epi.noise_sigma_ref) << "\n"
      << "background = " << num(c.epi.background.offset) << " " << num(c.epi.background.slope_x) << " "
      << num(c.epi.background.slope_y) << "\n"
      << "supersampling = " << c.supersampling << "\n\n";
  auto meta = [&](AcquisitionParams const &p) {
    out << "tr_ms = " << num(p.metadata.tr_ms) << "\n"
        << "te_ms = " << num(p.metadata.te_ms) << "\n"
        << "flip_deg = " << num(p.metadata.flip_deg) << "\n"
        << "sense_factor = " << num(p.metadata.sense_factor) << "\n"
        << "thickness_mm = " << num(p.metadata.thickness_mm) << "\n";
  };
  out << "[cine]\n"
      << "phases_per_cycle = " << c.cine.phases_per_cycle << "\n"
      << "acq_duration_s = " << num(c.cine.acq_duration) << "\n";
  meta(c.cine);
  out << "\n[epi]\n"
      << "frame_interval_s = " << num(c.epi.frame_interval) << "\n"
      << "n_frames = " << c.epi.n_frames << "\n"
      << "epi_factor = " << c.epi.metadata.epi_factor << "\n";
  meta(c.epi);
  out << "\n[experiment]\n"
      << "n_repeats = " << c.n_repeats << "\n"
      << "base_seed = " << c.base_seed << "\n"
      << "output_dir = " << c.output_dir.string() << "\n"
      << "noiseless = " << (c.noiseless ? "true" : "false") << "\n"
      << "vessel_tube = " << c.vessel_tube << "\n"
      << "threads = " << c.threads << "\n\n"
      << "[sweep]\n"
      << "min_px_mm = " << num(c.sweep.min_px) << "\n"
      << "max_px_mm = " << num(c.sweep.max_px) << "\n"
      << "step_mm = " << num(c.sweep.step) << "\n"
      << "repeats_per_size = " << c.sweep.repeats_per_size << "\n";
}

} // namespace pcflow
