#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pcflow/pcflow.h"

#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

std::string scratch(std::string const &name)
{
  fs::path p = fs::path(PCFLOW_TEST_DATA) / "capi" / name;
  fs::remove_all(p);
  return p.string();
}

pcflow_config *quick_config()
{
  pcflow_config *c = nullptr;
  REQUIRE(pcflow_config_default(&c) == PCFLOW_OK);
  REQUIRE(c != nullptr);
  return c;
}

} // namespace

TEST_CASE("version and status strings")
{
  CHECK(std::string(pcflow_version()) == "0.1.0");
  CHECK(std::string(pcflow_status_string(PCFLOW_OK)) == "ok");
  CHECK(std::string(pcflow_status_string(PCFLOW_ERR_SEGMENTATION)) == "segmentation failed");
}

TEST_CASE("null arguments are reported, not crashed on")
{
  CHECK(pcflow_config_default(nullptr) == PCFLOW_ERR_INVALID_ARGUMENT);
  CHECK(std::string(pcflow_last_error()).find("null") != std::string::npos);
  CHECK(pcflow_config_set_seed(nullptr, 3) == PCFLOW_ERR_INVALID_ARGUMENT);
  CHECK(pcflow_validation_gate(nullptr) == 0);
  CHECK(pcflow_sweep_record_count(nullptr) == 0);
  pcflow_config_free(nullptr);
  pcflow_series_free(nullptr);
}

TEST_CASE("config errors map to status codes")
{
  pcflow_config *c = nullptr;
  CHECK(pcflow_config_load("/nonexistent.ini", &c) == PCFLOW_ERR_IO);
  CHECK(c == nullptr);
  auto const path = scratch("bad.ini");
  fs::create_directories(fs::path(path).parent_path());
  {
    std::FILE *f = std::fopen(path.c_str(), "w");
    std::fputs("[scene]\nbogus = 1\n", f);
    std::fclose(f);
  }
  CHECK(pcflow_config_load(path.c_str(), &c) == PCFLOW_ERR_CONFIG);
  CHECK(std::string(pcflow_last_error()).find("bogus") != std::string::npos);
}

TEST_CASE("config write and reload")
{
  auto *c = quick_config();
  CHECK(pcflow_config_set_seed(c, 42) == PCFLOW_OK);
  CHECK(pcflow_config_set_output_dir(c, "elsewhere") == PCFLOW_OK);
  CHECK(pcflow_config_set_repeats(c, 0) == PCFLOW_ERR_INVALID_ARGUMENT);
  CHECK(std::string(pcflow_config_output_dir(c)) == "elsewhere");
  auto const path = scratch("written.ini");
  fs::create_directories(fs::path(path).parent_path());
  REQUIRE(pcflow_config_write(c, path.c_str()) == PCFLOW_OK);
  pcflow_config *back = nullptr;
  REQUIRE(pcflow_config_load(path.c_str(), &back) == PCFLOW_OK);
  CHECK(pcflow_config_seed(back) == 42);
  CHECK(std::string(pcflow_config_output_dir(back)) == "elsewhere");
  pcflow_config_free(back);
  pcflow_config_free(c);
}

TEST_CASE("simulate, save, load, analyze")
{
  auto *c = quick_config();
  pcflow_series *s = nullptr;
  REQUIRE(pcflow_simulate(c, PCFLOW_MODE_EPI, 4, &s) == PCFLOW_OK);
  pcflow_series_info info{};
  REQUIRE(pcflow_series_get_info(s, &info) == PCFLOW_OK);
  CHECK(info.mode == PCFLOW_MODE_EPI);
  CHECK(info.frames == 150);
  CHECK(info.width == 84);
  CHECK(info.height == 50);
  CHECK(info.seed == 4);

  auto const dir = scratch("series");
  REQUIRE(pcflow_series_save(s, dir.c_str()) == PCFLOW_OK);
  pcflow_series *l = nullptr;
  REQUIRE(pcflow_series_load(dir.c_str(), &l) == PCFLOW_OK);

  pcflow_analysis *a = nullptr;
  REQUIRE(pcflow_analyze(l, 0, &a) == PCFLOW_OK);
  pcflow_analysis_summary sum{};
  REQUIRE(pcflow_analysis_get_summary(a, &sum) == PCFLOW_OK);
  CHECK(sum.samples == 150);
  CHECK(sum.n_cycles >= 13);
  CHECK(std::abs(sum.mean_flow_mm3_s - 1150.0) < 0.05 * 1150.0);
  CHECK(sum.area_mm2 == doctest::Approx(73.44));

  size_t count = 0;
  REQUIRE(pcflow_analysis_get_curve(a, nullptr, nullptr, 0, &count) == PCFLOW_OK);
  CHECK(count == 150);
  std::vector<double> t(count), q(count);
  REQUIRE(pcflow_analysis_get_curve(a, t.data(), q.data(), count, &count) == PCFLOW_OK);
  CHECK(t[0] == doctest::Approx(0.031));
  double flows[PCFLOW_CYCLE_POINTS], sds[PCFLOW_CYCLE_POINTS];
  CHECK(pcflow_analysis_get_cycle(a, flows, sds) == PCFLOW_OK);
  CHECK(pcflow_analysis_write(a, scratch("analysis").c_str()) == PCFLOW_OK);

  pcflow_analysis *bad = nullptr;
  CHECK(pcflow_analyze(l, 7, &bad) == PCFLOW_ERR_INVALID_ARGUMENT);
  CHECK(bad == nullptr);

  pcflow_analysis_free(a);
  pcflow_series_free(l);
  pcflow_series_free(s);
  pcflow_config_free(c);
}

TEST_CASE("CINE analysis has no cycle")
{
  auto *c = quick_config();
  pcflow_series *s = nullptr;
  REQUIRE(pcflow_simulate(c, PCFLOW_MODE_CINE, 1, &s) == PCFLOW_OK);
  pcflow_analysis *a = nullptr;
  REQUIRE(pcflow_analyze(s, 0, &a) == PCFLOW_OK);
  double flows[PCFLOW_CYCLE_POINTS], sds[PCFLOW_CYCLE_POINTS];
  CHECK(pcflow_analysis_get_cycle(a, flows, sds) == PCFLOW_ERR_INVALID_ARGUMENT);
  pcflow_analysis_free(a);
  pcflow_series_free(s);
  pcflow_config_free(c);
}

TEST_CASE("missing series directory is an I/O error")
{
  pcflow_series *s = nullptr;
  CHECK(pcflow_series_load("/nonexistent/series", &s) == PCFLOW_ERR_IO);
}

TEST_CASE("validation and sweep through the C API")
{
  auto *c = quick_config();
  REQUIRE(pcflow_config_set_repeats(c, 3) == PCFLOW_OK);
  pcflow_validation *v = nullptr;
  REQUIRE(pcflow_run_validation(c, &v) == PCFLOW_OK);
  pcflow_run_summary epi{}, cine{};
  REQUIRE(pcflow_validation_get_summary(v, PCFLOW_MODE_EPI, &epi) == PCFLOW_OK);
  REQUIRE(pcflow_validation_get_summary(v, PCFLOW_MODE_CINE, &cine) == PCFLOW_OK);
  CHECK(epi.repeats == 3);
  CHECK(epi.in_flow_ci == 1);
  CHECK(cine.in_area_ci == 1);
  CHECK_FALSE(std::isnan(epi.cv_percent));
  pcflow_bland_altman_result ba{};
  REQUIRE(pcflow_validation_get_bland_altman(v, &ba) == PCFLOW_OK);
  CHECK(ba.loa_low <= ba.mean_diff);
  double cc[32], ee[32], sd[32];
  REQUIRE(pcflow_validation_get_curves(v, cc, ee, sd) == PCFLOW_OK);
  auto const vdir = scratch("validation");
  CHECK(pcflow_validation_write(v, vdir.c_str()) == PCFLOW_OK);
  CHECK(pcflow_render(vdir.c_str(), scratch("validation_svg").c_str()) == PCFLOW_OK);
  CHECK(fs::exists(fs::path(PCFLOW_TEST_DATA) / "capi" / "validation_svg" / "fig4_curves.svg"));
  CHECK(pcflow_render(scratch("empty").c_str(), scratch("empty_svg").c_str()) == PCFLOW_ERR_IO);
  pcflow_validation_free(v);

  REQUIRE(pcflow_config_set_repeats(c, 1) == PCFLOW_OK);
  REQUIRE(pcflow_run_validation(c, &v) == PCFLOW_OK);
  REQUIRE(pcflow_validation_get_summary(v, PCFLOW_MODE_EPI, &epi) == PCFLOW_OK);
  CHECK(std::isnan(epi.cv_percent));
  pcflow_validation_free(v);

  pcflow_sweep *s = nullptr;
  REQUIRE(pcflow_run_sweep(c, &s) == PCFLOW_OK);
  REQUIRE(pcflow_sweep_record_count(s) == 80);
  pcflow_sweep_record r{};
  REQUIRE(pcflow_sweep_get_record(s, 79, &r) == PCFLOW_OK);
  CHECK(r.pixel_size_mm == doctest::Approx(4.4));
  CHECK(r.mode == PCFLOW_MODE_EPI);
  CHECK(r.repeat == 3);
  CHECK(pcflow_sweep_get_record(s, 80, &r) == PCFLOW_ERR_INVALID_ARGUMENT);
  CHECK(pcflow_sweep_gate(s) == 1);
  auto const sdir = scratch("sweep");
  CHECK(pcflow_sweep_write(s, sdir.c_str()) == PCFLOW_OK);
  CHECK(pcflow_render(sdir.c_str(), scratch("sweep_svg").c_str()) == PCFLOW_OK);
  CHECK(fs::exists(fs::path(PCFLOW_TEST_DATA) / "capi" / "sweep_svg" / "fig5_sweep.svg"));
  pcflow_sweep_free(s);
  pcflow_config_free(c);
}

TEST_CASE("statistics on caller arrays")
{
  double a[] = {1, 2, 3}, b[] = {1, 1, 1};
  pcflow_bland_altman_result r{};
  REQUIRE(pcflow_bland_altman(a, b, 3, &r) == PCFLOW_OK);
  CHECK(r.mean_diff == doctest::Approx(1.0));
  CHECK(r.loa_low == doctest::Approx(-0.96));
  CHECK(r.loa_high == doctest::Approx(2.96));
  CHECK(r.agreement == 1);
  CHECK(pcflow_bland_altman(a, b, 1, &r) == PCFLOW_ERR_INVALID_ARGUMENT);
  double cv = 0;
  double v[] = {100, 102};
  REQUIRE(pcflow_coefficient_of_variation(v, 2, &cv) == PCFLOW_OK);
  CHECK(cv == doctest::Approx(1.4002).epsilon(1e-4));
  double z[] = {-1, 1};
  CHECK(pcflow_coefficient_of_variation(z, 2, &cv) == PCFLOW_ERR_INVALID_ARGUMENT);
}
