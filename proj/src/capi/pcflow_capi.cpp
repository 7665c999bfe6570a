#include "pcflow/pcflow.h"

#include "pcflow/error.hpp"
#include "pcflow/experiment.hpp"
#include "pcflow/render.hpp"
#include "pcflow/series_io.hpp"

#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <new>
#include <string>

struct pcflow_config
{
  pcflow::ExperimentConfig config;
  std::string output_dir;
};

struct pcflow_series
{
  pcflow::ImageSeries series;
};

struct pcflow_analysis
{
  pcflow::PipelineResult result;
};

struct pcflow_validation
{
  pcflow::ValidationReport report;
  pcflow::ExperimentConfig config;
};

struct pcflow_sweep
{
  std::vector<pcflow::SweepRecord> records;
  pcflow::ExperimentConfig config;
};

namespace {

thread_local std::string last_error;

pcflow_status status_of(pcflow::ErrorKind kind)
{
  switch (kind) {
  case pcflow::ErrorKind::InvalidArgument: return PCFLOW_ERR_INVALID_ARGUMENT;
  case pcflow::ErrorKind::Segmentation: return PCFLOW_ERR_SEGMENTATION;
  case pcflow::ErrorKind::InsufficientData: return PCFLOW_ERR_INSUFFICIENT_DATA;
  case pcflow::ErrorKind::Io: return PCFLOW_ERR_IO;
  case pcflow::ErrorKind::Config: return PCFLOW_ERR_CONFIG;
  }
  return PCFLOW_ERR_INTERNAL;
}

template <typename Body>
pcflow_status guarded(Body &&body)
{
  try {
    body();
    return PCFLOW_OK;
  } catch (pcflow::Error const &e) {
    last_error = e.what();
    return status_of(e.kind());
  } catch (std::bad_alloc const &) {
    last_error = "out of memory";
  } catch (std::exception const &e) {
    last_error = e.what();
  } catch (...) {
    last_error = "unknown error";
  }
  return PCFLOW_ERR_INTERNAL;
}

template <typename T>
T &deref(T *p, char const *what)
{
  if (!p) { pcflow::fail(pcflow::ErrorKind::InvalidArgument, std::string("null ") + what); }
  return *p;
}

char const *text(char const *s, char const *what)
{
  if (!s) { pcflow::fail(pcflow::ErrorKind::InvalidArgument, std::string("null ") + what); }
  return s;
}

pcflow::Mode mode_of(pcflow_mode m)
{
  if (m != PCFLOW_MODE_CINE && m != PCFLOW_MODE_EPI) {
    pcflow::fail(pcflow::ErrorKind::InvalidArgument, "unknown mode");
  }
  return m == PCFLOW_MODE_CINE ? pcflow::Mode::Cine : pcflow::Mode::Epi;
}

pcflow_mode c_mode(pcflow::Mode m) { return m == pcflow::Mode::Cine ? PCFLOW_MODE_CINE : PCFLOW_MODE_EPI; }

pcflow_bland_altman_result c_bland_altman(pcflow::BlandAltmanResult const &r)
{
  return {r.mean_diff, r.sd_diff, r.loa_low, r.loa_high, pcflow::agreement_verdict(r) ? 1 : 0};
}

} // namespace

extern "C" {

const char *pcflow_version(void) { return "0.1.0"; }

const char *pcflow_last_error(void) { return last_error.c_str(); }

const char *pcflow_status_string(pcflow_status status)
{
  switch (status) {
  case PCFLOW_OK: return "ok";
  case PCFLOW_ERR_INVALID_ARGUMENT: return "invalid argument";
  case PCFLOW_ERR_SEGMENTATION: return "segmentation failed";
  case PCFLOW_ERR_INSUFFICIENT_DATA: return "insufficient data";
  case PCFLOW_ERR_IO: return "i/o error";
  case PCFLOW_ERR_CONFIG: return "configuration error";
  case PCFLOW_ERR_INTERNAL: return "internal error";
  }
  return "unknown status";
}

pcflow_status pcflow_config_default(pcflow_config **out)
{
  return guarded([&] {
    deref(out, "output pointer") = nullptr;
    auto *c = new pcflow_config{};
    c->output_dir = c->config.output_dir.string();
    *out = c;
  });
}

pcflow_status pcflow_config_load(const char *path, pcflow_config **out)
{
  return guarded([&] {
    deref(out, "output pointer") = nullptr;
    auto cfg = pcflow::load_config(text(path, "path"));
    auto *c = new pcflow_config{std::move(cfg), {}};
    c->output_dir = c->config.output_dir.string();
    *out = c;
  });
}

pcflow_status pcflow_config_write(const pcflow_config *config, const char *path)
{
  return guarded([&] {
    auto const &c = deref(config, "config");
    std::ofstream out(text(path, "path"), std::ios::binary);
    if (!out) { pcflow::fail(pcflow::ErrorKind::Io, std::string("cannot write ") + path); }
    pcflow::write_config(out, c.config);
  });
}

pcflow_status pcflow_config_set_seed(pcflow_config *config, uint64_t base_seed)
{
  return guarded([&] { deref(config, "config").config.base_seed = base_seed; });
}

pcflow_status pcflow_config_set_noiseless(pcflow_config *config, int noiseless)
{
  return guarded([&] { deref(config, "config").config.noiseless = noiseless != 0; });
}

pcflow_status pcflow_config_set_output_dir(pcflow_config *config, const char *dir)
{
  return guarded([&] {
    auto &c = deref(config, "config");
    std::string d = text(dir, "directory");
    pcflow::require(!d.empty(), "empty output directory");
    c.config.output_dir = d;
    c.output_dir = std::move(d);
  });
}

pcflow_status pcflow_config_set_threads(pcflow_config *config, int threads)
{
  return guarded([&] {
    pcflow::require(threads >= 0, "threads must be >= 0");
    deref(config, "config").config.threads = threads;
  });
}

pcflow_status pcflow_config_set_repeats(pcflow_config *config, int n_repeats)
{
  return guarded([&] {
    pcflow::require(n_repeats >= 1, "n_repeats must be >= 1");
    deref(config, "config").config.n_repeats = n_repeats;
  });
}

const char *pcflow_config_output_dir(const pcflow_config *config) { return config ? config->output_dir.c_str() : ""; }

uint64_t pcflow_config_seed(const pcflow_config *config) { return config ? config->config.base_seed : 0; }

void pcflow_config_free(pcflow_config *config) { delete config; }

pcflow_status pcflow_simulate(const pcflow_config *config, pcflow_mode mode, uint64_t seed, pcflow_series **out)
{
  return guarded([&] {
    deref(out, "output pointer") = nullptr;
    auto const &c = deref(config, "config");
    *out = new pcflow_series{pcflow::simulate(c.config, mode_of(mode), seed)};
  });
}

pcflow_status pcflow_series_save(const pcflow_series *series, const char *dir)
{
  return guarded([&] { pcflow::save_series(deref(series, "series").series, text(dir, "directory")); });
}

pcflow_status pcflow_series_load(const char *dir, pcflow_series **out)
{
  return guarded([&] {
    deref(out, "output pointer") = nullptr;
    *out = new pcflow_series{pcflow::load_series(text(dir, "directory"))};
  });
}

pcflow_status pcflow_series_get_info(const pcflow_series *series, pcflow_series_info *info)
{
  return guarded([&] {
    auto const &s = deref(series, "series").series;
    auto &i = deref(info, "info");
    i.mode = c_mode(s.params.mode);
    i.width = s.params.matrix_width();
    i.height = s.params.matrix_height();
    i.frames = s.frames.size();
    i.pixel_size_mm = s.params.pixel_size;
    i.venc_mm_s = s.params.venc;
    i.noise_sigma_ref = s.params.noise_sigma_ref;
    i.seed = s.params.rng_seed;
  });
}

void pcflow_series_free(pcflow_series *series) { delete series; }

pcflow_status pcflow_analyze(const pcflow_series *series, size_t vessel_tube, pcflow_analysis **out)
{
  return guarded([&] {
    deref(out, "output pointer") = nullptr;
    *out = new pcflow_analysis{pcflow::analyze_series(deref(series, "series").series, vessel_tube)};
  });
}

pcflow_status pcflow_analysis_get_summary(const pcflow_analysis *analysis, pcflow_analysis_summary *summary)
{
  return guarded([&] {
    auto const &r = deref(analysis, "analysis").result;
    auto &s = deref(summary, "summary");
    s.mode = c_mode(r.mode);
    s.mean_flow_mm3_s = r.mean_flow;
    s.area_mm2 = r.area;
    s.samples = r.curve.size();
    s.n_cycles = r.cycle ? r.cycle->n_cycles : 0;
    s.period_estimate_s = r.cycle ? r.cycle->period_estimate : 0.0;
  });
}

pcflow_status pcflow_analysis_get_curve(const pcflow_analysis *analysis, double *times, double *flows,
                                        size_t capacity, size_t *count)
{
  return guarded([&] {
    auto const &c = deref(analysis, "analysis").result.curve;
    deref(count, "count") = c.size();
    pcflow::require(capacity == 0 || (times && flows), "null output arrays");
    for (std::size_t i = 0; i < c.size() && i < capacity; ++i) {
      times[i] = c.times[i];
      flows[i] = c.flows[i];
    }
  });
}

pcflow_status pcflow_analysis_get_cycle(const pcflow_analysis *analysis, double flows[PCFLOW_CYCLE_POINTS],
                                        double sds[PCFLOW_CYCLE_POINTS])
{
  return guarded([&] {
    auto const &r = deref(analysis, "analysis").result;
    pcflow::require(flows && sds, "null output arrays");
    pcflow::require(r.cycle.has_value(), "analysis has no reconstructed cycle (CINE series)");
    for (std::size_t j = 0; j < pcflow::kCyclePoints; ++j) {
      flows[j] = r.cycle->flows[j];
      sds[j] = r.cycle->sds[j];
    }
  });
}

pcflow_status pcflow_analysis_write(const pcflow_analysis *analysis, const char *dir)
{
  return guarded([&] { pcflow::write_analysis_outputs(deref(analysis, "analysis").result, text(dir, "directory")); });
}

void pcflow_analysis_free(pcflow_analysis *analysis) { delete analysis; }

pcflow_status pcflow_run_validation(const pcflow_config *config, pcflow_validation **out)
{
  return guarded([&] {
    deref(out, "output pointer") = nullptr;
    auto const &c = deref(config, "config").config;
    *out = new pcflow_validation{pcflow::run_validation(c), c};
  });
}

pcflow_status pcflow_validation_get_summary(const pcflow_validation *validation, pcflow_mode mode,
                                            pcflow_run_summary *summary)
{
  return guarded([&] {
    auto const &v = deref(validation, "validation");
    auto const &r = mode_of(mode) == pcflow::Mode::Cine ? v.report.cine : v.report.epi;
    deref(summary, "summary") = {r.mean_flow,
                                 r.sd_flow,
                                 r.has_cv() ? r.cv_percent : std::numeric_limits<double>::quiet_NaN(),
                                 r.area,
                                 r.in_flow_ci ? 1 : 0,
                                 r.in_area_ci ? 1 : 0,
                                 r.repeats};
  });
}

pcflow_status pcflow_validation_get_bland_altman(const pcflow_validation *validation,
                                                 pcflow_bland_altman_result *result)
{
  return guarded([&] {
    deref(result, "result") = c_bland_altman(deref(validation, "validation").report.bland_altman);
  });
}

pcflow_status pcflow_validation_get_curves(const pcflow_validation *validation, double cine[PCFLOW_CYCLE_POINTS],
                                           double epi[PCFLOW_CYCLE_POINTS], double epi_sd[PCFLOW_CYCLE_POINTS])
{
  return guarded([&] {
    auto const &r = deref(validation, "validation").report;
    pcflow::require(cine && epi && epi_sd, "null output arrays");
    for (std::size_t j = 0; j < pcflow::kCyclePoints; ++j) {
      cine[j] = r.cine_mean[j];
      epi[j] = r.epi_mean[j];
      epi_sd[j] = r.epi_sd[j];
    }
  });
}

int pcflow_validation_gate(const pcflow_validation *validation)
{
  return validation && validation->report.gate() ? 1 : 0;
}

pcflow_status pcflow_validation_write(const pcflow_validation *validation, const char *dir)
{
  return guarded([&] {
    auto const &v = deref(validation, "validation");
    pcflow::write_validation_outputs(v.report, v.config, text(dir, "directory"));
  });
}

void pcflow_validation_free(pcflow_validation *validation) { delete validation; }

pcflow_status pcflow_run_sweep(const pcflow_config *config, pcflow_sweep **out)
{
  return guarded([&] {
    deref(out, "output pointer") = nullptr;
    auto const &c = deref(config, "config").config;
    *out = new pcflow_sweep{pcflow::run_pixel_sweep(c), c};
  });
}

size_t pcflow_sweep_record_count(const pcflow_sweep *sweep) { return sweep ? sweep->records.size() : 0; }

pcflow_status pcflow_sweep_get_record(const pcflow_sweep *sweep, size_t index, pcflow_sweep_record *record)
{
  return guarded([&] {
    auto const &s = deref(sweep, "sweep");
    pcflow::require(index < s.records.size(), "record index out of range");
    auto const &r = s.records[index];
    deref(record, "record") = {r.pixel_size, c_mode(r.mode), r.repeat_index, r.seed, r.ok ? 1 : 0,
                               r.area,       r.mean_flow};
  });
}

int pcflow_sweep_gate(const pcflow_sweep *sweep) { return sweep && pcflow::sweep_gate(sweep->records) ? 1 : 0; }

pcflow_status pcflow_sweep_write(const pcflow_sweep *sweep, const char *dir)
{
  return guarded([&] {
    auto const &s = deref(sweep, "sweep");
    pcflow::write_sweep_outputs(s.records, s.config, text(dir, "directory"));
  });
}

void pcflow_sweep_free(pcflow_sweep *sweep) { delete sweep; }

pcflow_status pcflow_render(const char *in_dir, const char *out_dir)
{
  return guarded([&] { pcflow::render_directory(text(in_dir, "input directory"), text(out_dir, "output directory")); });
}

pcflow_status pcflow_bland_altman(const double *a, const double *b, size_t n, pcflow_bland_altman_result *result)
{
  return guarded([&] {
    pcflow::require(a && b, "null input arrays");
    deref(result, "result") = c_bland_altman(pcflow::bland_altman({a, n}, {b, n}));
  });
}

pcflow_status pcflow_coefficient_of_variation(const double *values, size_t n, double *cv_percent)
{
  return guarded([&] {
    pcflow::require(values != nullptr, "null input array");
    deref(cv_percent, "result") = pcflow::coefficient_of_variation({values, n});
  });
}

} // extern "C"
