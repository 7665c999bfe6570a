// pcflow command line: simulate / analyze / validate / sweep / render.
// Exit status: 0 success, 1 error, 2 gate failure (with --gate).
#include "pcflow/pcflow.h"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>

namespace {

constexpr int kExitError = 1;
constexpr int kExitGate = 2;

struct Failure
{
  int code;
};

void check(pcflow_status s, char const *what)
{
  if (s != PCFLOW_OK) {
    std::fprintf(stderr, "pcflow: %s: %s: %s\n", what, pcflow_status_string(s), pcflow_last_error());
    throw Failure{kExitError};
  }
}

template <typename T, void (*Free)(T *)>
struct Deleter
{
  void operator()(T *p) const { Free(p); }
};
using ConfigPtr = std::unique_ptr<pcflow_config, Deleter<pcflow_config, pcflow_config_free>>;
using SeriesPtr = std::unique_ptr<pcflow_series, Deleter<pcflow_series, pcflow_series_free>>;
using AnalysisPtr = std::unique_ptr<pcflow_analysis, Deleter<pcflow_analysis, pcflow_analysis_free>>;
using ValidationPtr = std::unique_ptr<pcflow_validation, Deleter<pcflow_validation, pcflow_validation_free>>;
using SweepPtr = std::unique_ptr<pcflow_sweep, Deleter<pcflow_sweep, pcflow_sweep_free>>;

struct CommonOptions
{
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool noiseless = false;
  int threads = 0;
};

void add_common(CLI::App *cmd, CommonOptions &o)
{
  cmd->add_option("--config", o.config_path, "Experiment config file (INI-style sections)")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Base seed, overrides the config");
  cmd->add_option("--out", o.out, "Output directory, overrides the config");
  cmd->add_flag("--noiseless", o.noiseless, "Disable acquisition noise");
  cmd->add_option("--threads", o.threads, "Worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
}

ConfigPtr make_config(CommonOptions const &o)
{
  pcflow_config *raw = nullptr;
  if (o.config_path.empty()) {
    check(pcflow_config_default(&raw), "config");
  } else {
    check(pcflow_config_load(o.config_path.c_str(), &raw), "config");
  }
  ConfigPtr c(raw);
  if (o.seed) { check(pcflow_config_set_seed(c.get(), *o.seed), "config"); }
  if (!o.out.empty()) { check(pcflow_config_set_output_dir(c.get(), o.out.c_str()), "config"); }
  if (o.noiseless) { check(pcflow_config_set_noiseless(c.get(), 1), "config"); }
  if (o.threads > 0) { check(pcflow_config_set_threads(c.get(), o.threads), "config"); }
  return c;
}

char const *mode_name(pcflow_mode m) { return m == PCFLOW_MODE_CINE ? "CINE" : "EPI"; }

int run_simulate(CommonOptions const &o, std::string const &mode)
{
  auto config = make_config(o);
  pcflow_mode const m = mode == "cine" ? PCFLOW_MODE_CINE : PCFLOW_MODE_EPI;
  pcflow_series *raw = nullptr;
  check(pcflow_simulate(config.get(), m, pcflow_config_seed(config.get()), &raw), "simulate");
  SeriesPtr series(raw);
  char const *dir = pcflow_config_output_dir(config.get());
  check(pcflow_series_save(series.get(), dir), "save series");
  pcflow_series_info info{};
  check(pcflow_series_get_info(series.get(), &info), "series info");
  std::printf("%s series: %zu frames of %zux%zu at %.2f mm -> %s\n", mode_name(info.mode), info.frames, info.width,
              info.height, info.pixel_size_mm, dir);
  return 0;
}

int run_analyze(std::string const &series_dir, std::size_t tube, std::string const &out)
{
  pcflow_series *sraw = nullptr;
  check(pcflow_series_load(series_dir.c_str(), &sraw), "load series");
  SeriesPtr series(sraw);
  pcflow_analysis *araw = nullptr;
  check(pcflow_analyze(series.get(), tube, &araw), "analyze");
  AnalysisPtr analysis(araw);
  check(pcflow_analysis_write(analysis.get(), out.c_str()), "write analysis");
  pcflow_analysis_summary s{};
  check(pcflow_analysis_get_summary(analysis.get(), &s), "analysis summary");
  std::printf("%s: area %.2f mm^2, mean flow %.1f mm^3/s", mode_name(s.mode), s.area_mm2, s.mean_flow_mm3_s);
  if (s.mode == PCFLOW_MODE_EPI) { std::printf(", %d cycles, period %.3f s", s.n_cycles, s.period_estimate_s); }
  std::printf(" -> %s\n", out.c_str());
  return 0;
}

void print_summary(pcflow_validation const *v, pcflow_mode m)
{
  pcflow_run_summary s{};
  check(pcflow_validation_get_summary(v, m, &s), "summary");
  std::printf("%-4s flow %.1f +- %.1f mm^3/s", mode_name(m), s.mean_flow_mm3_s, s.sd_flow_mm3_s);
  if (!std::isnan(s.cv_percent)) { std::printf(" (CV %.2f%%)", s.cv_percent); }
  std::printf(" [%s]  area %.2f mm^2 [%s]\n", s.in_flow_ci ? "in CI" : "OUT of CI", s.area_mm2,
              s.in_area_ci ? "in CI" : "OUT of CI");
}

int run_validate(CommonOptions const &o, bool gate)
{
  auto config = make_config(o);
  pcflow_validation *raw = nullptr;
  check(pcflow_run_validation(config.get(), &raw), "validate");
  ValidationPtr v(raw);
  char const *dir = pcflow_config_output_dir(config.get());
  check(pcflow_validation_write(v.get(), dir), "write validation");
  print_summary(v.get(), PCFLOW_MODE_CINE);
  print_summary(v.get(), PCFLOW_MODE_EPI);
  pcflow_bland_altman_result ba{};
  check(pcflow_validation_get_bland_altman(v.get(), &ba), "bland-altman");
  std::printf("Bland-Altman EPI-CINE: mean %.2f, LoA [%.2f, %.2f] mm^3/s, agreement %s\n", ba.mean_diff, ba.loa_low,
              ba.loa_high, ba.agreement ? "yes" : "no");
  std::printf("outputs -> %s\n", dir);
  if (gate && !pcflow_validation_gate(v.get())) {
    std::fprintf(stderr, "pcflow: validation gate failed\n");
    return kExitGate;
  }
  return 0;
}

int run_sweep(CommonOptions const &o, bool gate)
{
  auto config = make_config(o);
  pcflow_sweep *raw = nullptr;
  check(pcflow_run_sweep(config.get(), &raw), "sweep");
  SweepPtr s(raw);
  char const *dir = pcflow_config_output_dir(config.get());
  check(pcflow_sweep_write(s.get(), dir), "write sweep");
  std::size_t const n = pcflow_sweep_record_count(s.get());
  std::size_t failed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    pcflow_sweep_record r{};
    check(pcflow_sweep_get_record(s.get(), i, &r), "sweep record");
    if (!r.ok) { ++failed; }
  }
  std::printf("sweep: %zu records, %zu failed, gate %s -> %s\n", n, failed, pcflow_sweep_gate(s.get()) ? "pass" : "fail",
              dir);
  if (gate && !pcflow_sweep_gate(s.get())) {
    std::fprintf(stderr, "pcflow: sweep gate failed\n");
    return kExitGate;
  }
  return 0;
}

int run_render(std::string const &in, std::string const &out)
{
  check(pcflow_render(in.c_str(), out.empty() ? in.c_str() : out.c_str()), "render");
  std::printf("rendered %s\n", out.empty() ? in.c_str() : out.c_str());
  return 0;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Phase-contrast MRI flow phantom: CINE vs real-time EPI"};
  app.set_version_flag("--version", pcflow_version());
  app.require_subcommand(1);

  CommonOptions sim_opts, val_opts, sweep_opts;
  std::string mode = "epi";
  auto *sim = app.add_subcommand("simulate", "Acquire one image series and save it");
  add_common(sim, sim_opts);
  sim->add_option("--mode", mode, "cine or epi")->check(CLI::IsMember({"cine", "epi"}));

  std::string series_dir, analyze_out = "pcflow-analysis";
  std::size_t tube = 0;
  auto *ana = app.add_subcommand("analyze", "Segment, calibrate and quantify a saved series");
  ana->add_option("--series,--in", series_dir, "Series directory")->required()->check(CLI::ExistingDirectory);
  ana->add_option("--tube", tube, "Index of the flow tube to measure");
  ana->add_option("--out", analyze_out, "Output directory");

  bool val_gate = false, sweep_gate = false;
  auto *val = app.add_subcommand("validate", "Repeated CINE/EPI acquisitions at default parameters");
  add_common(val, val_opts);
  val->add_flag("--gate", val_gate, "Exit 2 unless CIs and shape agreement hold");

  auto *sw = app.add_subcommand("sweep", "Pixel-size sweep for both modes");
  add_common(sw, sweep_opts);
  sw->add_flag("--gate", sweep_gate, "Exit 2 unless EPI flow is inside the CI from 1.2 to 2.4 mm");

  std::string render_in, render_out;
  auto *ren = app.add_subcommand("render", "Redraw SVG figures from CSV outputs");
  ren->add_option("--in", render_in, "Directory with CSV outputs")->required()->check(CLI::ExistingDirectory);
  ren->add_option("--out", render_out, "SVG directory (default: same as --in)");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const &e) {
    int const rc = app.exit(e);
    return rc == 0 ? 0 : kExitError;
  }

  try {
    if (*sim) { return run_simulate(sim_opts, mode); }
    if (*ana) { return run_analyze(series_dir, tube, analyze_out); }
    if (*val) { return run_validate(val_opts, val_gate); }
    if (*sw) { return run_sweep(sweep_opts, sweep_gate); }
    if (*ren) { return run_render(render_in, render_out); }
  } catch (Failure const &f) {
    return f.code;
  }
  return kExitError;
}
