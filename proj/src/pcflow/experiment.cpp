#include "pcflow/experiment.hpp"

#include "pcflow/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace pcflow {

namespace {

// Runs body(i) for i in [0, n) on up to `threads` workers. The first exception
// (by index) is rethrown after all workers finish.
template <typename Body>
void parallel_for(std::size_t n, int threads, Body &&body)
{
  unsigned const hw = std::max(1u, std::thread::hardware_concurrency());
  std::size_t const workers = std::min<std::size_t>(n, threads > 0 ? static_cast<std::size_t>(threads) : hw);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) { pool.emplace_back(work); }
  }
  for (auto const &e : errors) {
    if (e) { std::rethrow_exception(e); }
  }
}

[[noreturn]] void rethrow_with_context(std::string const &context)
{
  try {
    throw;
  } catch (Error const &e) {
    throw Error(e.kind(), context + ": " + e.what());
  } catch (std::exception const &e) {
    throw std::runtime_error(context + ": " + e.what());
  }
}

} // namespace

PipelineResult analyze_series(ImageSeries const &series, Vec2 vessel_seed, Vec2 static_seed, double expected_period)
{
  PipelineResult r;
  r.mode = series.params.mode;
  RealGrid const magnitude = mean_magnitude(series);
  r.vessel = grow_region(magnitude, series.params, vessel_seed, MaskLabel::Vessel);
  r.static_mask = grow_region(magnitude, series.params, static_seed, MaskLabel::Static);
  r.curve = flow_curve(series, r.vessel, r.static_mask);
  r.area = r.vessel.area();
  if (r.mode == Mode::Epi) {
    r.minima = detect_cycle_minima(r.curve, expected_period);
    r.cycle = reconstruct_average_cycle(r.curve, r.minima);
    r.mean_flow = r.cycle->mean();
  } else {
    r.mean_flow = r.curve.mean();
  }
  return r;
}

PipelineResult analyze_series(ImageSeries const &series, std::size_t vessel_tube)
{
  require(vessel_tube < series.scene.tubes().size(), "vessel tube index out of range");
  return analyze_series(series, series.scene.tubes()[vessel_tube].center, series.scene.static_tube().center,
                        series.scene.waveform().period());
}

AcquisitionParams params_for(ExperimentConfig const &config, Mode mode, std::uint64_t seed, double pixel_size)
{
  AcquisitionParams p = mode == Mode::Cine ? config.cine : config.epi;
  p.rng_seed = seed;
  p.pixel_size = pixel_size;
  p.fov = config.scene.fov();
  if (config.noiseless) { p.noise_sigma_ref = 0.0; }
  return p;
}

ImageSeries simulate(ExperimentConfig const &config, Mode mode, std::uint64_t seed)
{
  auto const base = mode == Mode::Cine ? config.cine : config.epi;
  auto const p = params_for(config, mode, seed, base.pixel_size);
  return mode == Mode::Cine ? acquire_cine(config.scene, p, config.supersampling)
                            : acquire_epi(config.scene, p, config.supersampling);
}

bool ValidationReport::gate() const
{
  return cine.in_flow_ci && epi.in_flow_ci && cine.in_area_ci && epi.in_area_ci && agreement;
}

ValidationReport run_validation(ExperimentConfig const &config)
{
  config.validate();
  auto const n = static_cast<std::size_t>(config.n_repeats);
  ValidationReport report;
  report.repeats.resize(n);
  parallel_for(n, config.threads, [&](std::size_t r) {
    auto &rep = report.repeats[r];
    rep.index = static_cast<int>(r);
    rep.seed = config.base_seed + r;
    try {
      rep.cine = analyze_series(simulate(config, Mode::Cine, rep.seed), config.vessel_tube);
    } catch (...) {
      rethrow_with_context("repeat " + std::to_string(r) + " (CINE)");
    }
    try {
      rep.epi = analyze_series(simulate(config, Mode::Epi, rep.seed), config.vessel_tube);
      rep.epi_aligned = align_to_peak(*rep.epi.cycle, rep.cine.curve);
    } catch (...) {
      rethrow_with_context("repeat " + std::to_string(r) + " (EPI)");
    }
  });

  std::vector<double> cine_flow, cine_area, epi_flow, epi_area;
  for (auto const &rep : report.repeats) {
    cine_flow.push_back(rep.cine.mean_flow);
    cine_area.push_back(rep.cine.area);
    epi_flow.push_back(rep.epi.mean_flow);
    epi_area.push_back(rep.epi.area);
  }
  report.cine = summarize_runs(cine_flow, cine_area);
  report.epi = summarize_runs(epi_flow, epi_area);
  if (n < 2) { report.notes.push_back("insufficient repeats: coefficient of variation omitted"); }

  for (std::size_t j = 0; j < kCyclePoints; ++j) {
    std::vector<double> c, e;
    for (auto const &rep : report.repeats) {
      c.push_back(rep.cine.curve.flows.at(j));
      e.push_back(rep.epi_aligned.flows[j]);
    }
    report.cine_mean[j] = mean(c);
    report.epi_mean[j] = mean(e);
    report.epi_sd[j] = n >= 2 ? sample_sd(e) : report.repeats.front().epi_aligned.sds[j];
  }
  // Averaging can move the EPI peak by a bin; re-anchor on the mean CINE peak.
  ReconstructedCycle mean_cycle;
  mean_cycle.flows = report.epi_mean;
  mean_cycle.sds = report.epi_sd;
  FlowCurve cine_ref{std::vector<double>(kCyclePoints), {report.cine_mean.begin(), report.cine_mean.end()}, Mode::Cine};
  for (std::size_t j = 0; j < kCyclePoints; ++j) { cine_ref.times[j] = static_cast<double>(j); }
  mean_cycle = align_to_peak(mean_cycle, cine_ref);
  report.epi_mean = mean_cycle.flows;
  report.epi_sd = mean_cycle.sds;

  report.bland_altman = bland_altman(report.epi_mean, report.cine_mean);
  report.agreement = agreement_verdict(report.bland_altman);
  report.notes.push_back("agreement verdict uses the result's own limits of agreement: a screen for gross shape "
                         "mismatch, not a significance test");
  return report;
}

std::uint64_t sweep_cell_seed(std::uint64_t base_seed, std::size_t size_index, Mode mode, int repeat)
{
  std::uint64_t const key = (static_cast<std::uint64_t>(size_index) << 32) |
                            (static_cast<std::uint64_t>(mode == Mode::Epi ? 1 : 0) << 16) |
                            static_cast<std::uint64_t>(static_cast<std::uint16_t>(repeat));
  return base_seed ^ splitmix64(key);
}

std::vector<SweepRecord> run_pixel_sweep(ExperimentConfig const &config)
{
  config.validate();
  auto const sizes = config.sweep.sizes();
  auto const repeats = static_cast<std::size_t>(config.sweep.repeats_per_size);
  std::vector<SweepRecord> records(sizes.size() * 2 * repeats);
  parallel_for(records.size(), config.threads, [&](std::size_t cell) {
    std::size_t const size_index = cell / (2 * repeats);
    Mode const mode = (cell / repeats) % 2 == 0 ? Mode::Cine : Mode::Epi;
    int const repeat = static_cast<int>(cell % repeats);
    auto &rec = records[cell];
    rec.pixel_size = sizes[size_index];
    rec.mode = mode;
    rec.repeat_index = repeat;
    rec.seed = sweep_cell_seed(config.base_seed, size_index, mode, repeat);
    try {
      auto const p = params_for(config, mode, rec.seed, rec.pixel_size);
      auto const series = mode == Mode::Cine ? acquire_cine(config.scene, p, config.supersampling)
                                             : acquire_epi(config.scene, p, config.supersampling);
      auto const result = analyze_series(series, config.vessel_tube);
      rec.area = result.area;
      rec.mean_flow = result.mean_flow;
      rec.ok = std::isfinite(rec.mean_flow);
      if (!rec.ok) { rec.error = "non-finite mean flow"; }
    } catch (std::exception const &e) {
      rec.ok = false;
      rec.error = e.what();
    }
  });
  return records;
}

bool sweep_gate(std::vector<SweepRecord> const &records)
{
  bool any = false;
  for (auto const &r : records) {
    if (r.mode != Mode::Epi || r.pixel_size < 1.2 - 1e-9 || r.pixel_size > 2.4 + 1e-9) { continue; }
    any = true;
    if (!r.ok || !confidence_check(r.mean_flow, kGoldFlow, kConfidencePercent).inside) { return false; }
  }
  return any;
}

} // namespace pcflow
