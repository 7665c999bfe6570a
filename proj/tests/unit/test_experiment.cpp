#include "pcflow/error.hpp"
#include "pcflow/experiment.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace pcflow;

namespace {

ExperimentConfig quick()
{
  ExperimentConfig c;
  c.supersampling = 8;
  return c;
}

} // namespace

TEST_CASE("noiseless validation recovers the pump in both modes")
{
  auto c = quick();
  c.noiseless = true;
  c.n_repeats = 2;
  auto const r = run_validation(c);
  CHECK(std::abs(r.cine.mean_flow - 1150.0) < 0.03 * 1150.0);
  CHECK(std::abs(r.epi.mean_flow - 1150.0) < 0.03 * 1150.0);
  CHECK(r.cine.sd_flow == 0.0);
  CHECK(r.epi.sd_flow == 0.0);
  CHECK(r.cine.in_area_ci);
  CHECK(r.epi.in_area_ci);
}

TEST_CASE("default-noise validation lands inside the confidence intervals")
{
  auto const r = run_validation(ExperimentConfig{});
  REQUIRE(r.repeats.size() == 10);
  CHECK(r.epi.in_flow_ci);
  CHECK(r.epi.area >= 63.72);
  CHECK(r.epi.area <= 77.8);
  CHECK(r.cine.in_flow_ci);
  CHECK(std::abs(r.epi.mean_flow - 1150.0) <= 0.03 * 1150.0);
  CHECK(r.epi.cv_percent <= 5.0);
  for (std::size_t i = 0; i < r.repeats.size(); ++i) {
    CHECK(r.repeats[i].seed == 1 + i);
    CHECK(r.repeats[i].index == static_cast<int>(i));
  }
  CHECK(r.bland_altman.diffs.size() == kCyclePoints);
  CHECK(r.agreement == agreement_verdict(r.bland_altman));
  // mean curves are aligned at the peak
  auto peak = [](auto const &a) { return std::max_element(a.begin(), a.end()) - a.begin(); };
  CHECK(peak(r.epi_mean) == peak(r.cine_mean));
}

TEST_CASE("a single repeat omits the coefficient of variation")
{
  auto c = quick();
  c.n_repeats = 1;
  auto const r = run_validation(c);
  CHECK(r.cine.repeats == 1);
  CHECK(r.epi.repeats == 1);
  CHECK_FALSE(r.epi.has_cv());
  bool flagged = false;
  for (auto const &n : r.notes) { flagged = flagged || n.find("insufficient repeats") != std::string::npos; }
  CHECK(flagged);
}

TEST_CASE("validation is deterministic and independent of thread count")
{
  auto c = quick();
  c.n_repeats = 3;
  c.threads = 1;
  auto const a = run_validation(c);
  c.threads = 3;
  auto const b = run_validation(c);
  CHECK(a.epi_mean == b.epi_mean);
  CHECK(a.cine_mean == b.cine_mean);
  CHECK(a.epi.mean_flow == b.epi.mean_flow);
  CHECK(a.bland_altman.diffs == b.bland_altman.diffs);
}

TEST_CASE("base seed changes noisy results only")
{
  auto c = quick();
  c.n_repeats = 2;
  auto const a = run_validation(c);
  c.base_seed = 99;
  auto const b = run_validation(c);
  CHECK(a.epi.mean_flow != b.epi.mean_flow);
  c.noiseless = true;
  auto const n1 = run_validation(c);
  c.base_seed = 5;
  auto const n2 = run_validation(c);
  CHECK(n1.epi.mean_flow == n2.epi.mean_flow);
  CHECK(n1.epi_mean == n2.epi_mean);
}

TEST_CASE("pipeline errors carry repeat and mode context")
{
  auto c = quick();
  c.n_repeats = 2;
  c.epi.n_frames = 10; // shorter than two periods
  c.epi.acq_duration = 10 * c.epi.frame_interval;
  try {
    run_validation(c);
    FAIL("expected an error");
  } catch (Error const &e) {
    CHECK(e.kind() == ErrorKind::InsufficientData);
    CHECK(std::string(e.what()).find("repeat 0 (EPI)") != std::string::npos);
  }
}

TEST_CASE("sweep cell seeds are distinct and reproducible")
{
  std::set<std::uint64_t> seen;
  for (std::size_t s = 0; s < 10; ++s) {
    for (Mode m : {Mode::Cine, Mode::Epi}) {
      for (int r = 0; r < 4; ++r) {
        auto const seed = sweep_cell_seed(1, s, m, r);
        CHECK(seed == sweep_cell_seed(1, s, m, r));
        CHECK((seed ^ 1u) == (sweep_cell_seed(0, s, m, r)));
        seen.insert(seed);
      }
    }
  }
  CHECK(seen.size() == 80);
}

TEST_CASE("default pixel sweep")
{
  auto const recs = run_pixel_sweep(ExperimentConfig{});
  REQUIRE(recs.size() == 80);
  auto const sizes = SweepSettings{}.sizes();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(recs[i].pixel_size == sizes[i / 8]);
    CHECK(recs[i].mode == ((i / 4) % 2 ? Mode::Epi : Mode::Cine));
    CHECK(recs[i].repeat_index == static_cast<int>(i % 4));
    CHECK(recs[i].seed == sweep_cell_seed(1, i / 8, recs[i].mode, recs[i].repeat_index));
  }
  for (double px : sizes) {
    int in_ci = 0, epi = 0;
    for (auto const &r : recs) {
      if (r.mode != Mode::Epi || std::abs(r.pixel_size - px) > 1e-9) { continue; }
      ++epi;
      bool const inside = r.ok && confidence_check(r.mean_flow, kGoldFlow, kConfidencePercent).inside;
      in_ci += inside;
      if (px > 4.3) { CHECK_FALSE(inside); }
    }
    CHECK(epi == 4);
    if (px > 1.1 && px < 2.9) { CHECK(in_ci >= 3); }
  }
  CHECK(sweep_gate(recs));
}

TEST_CASE("a failing sweep cell does not stop the others")
{
  auto c = quick();
  c.vessel_tube = 3; // the 2 mm tube vanishes into partial volume at coarse pixels
  c.sweep = {1.2, 4.4, 1.6, 1};
  auto const recs = run_pixel_sweep(c);
  REQUIRE(recs.size() == 6);
  int ok = 0, failed = 0;
  for (auto const &r : recs) {
    if (r.ok) {
      ++ok;
    } else {
      ++failed;
      CHECK_FALSE(r.error.empty());
    }
  }
  CHECK(ok >= 2);
  CHECK(failed >= 1);
  CHECK_FALSE(sweep_gate({}));
}

TEST_CASE("params_for applies the noiseless override and pixel size")
{
  auto c = quick();
  c.noiseless = true;
  auto const p = params_for(c, Mode::Cine, 7, 2.0);
  CHECK(p.noise_sigma_ref == 0.0);
  CHECK(p.pixel_size == 2.0);
  CHECK(p.rng_seed == 7);
  CHECK(p.mode == Mode::Cine);
}
