#include "pcflow/render.hpp"

#include "pcflow/csv.hpp"
#include "pcflow/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace pcflow {

namespace fs = std::filesystem;

namespace {

std::string yes_no(bool b) { return b ? "true" : "false"; }

void make_dir(fs::path const &dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) { fail(ErrorKind::Io, "cannot create " + dir.string() + ": " + ec.message()); }
}

template <typename Write>
void write_text_file(fs::path const &path, Write &&write)
{
  std::ofstream out(path, std::ios::binary);
  if (!out) { fail(ErrorKind::Io, "cannot write " + path.string()); }
  write(out);
  if (!out) { fail(ErrorKind::Io, "write failed: " + path.string()); }
}

std::string two_digits(int i)
{
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", i);
  return buf;
}

// ---------------------------------------------------------------- SVG

std::string fmt(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(std::string const &s)
{
  std::string out;
  for (char c : s) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    default: out += c;
    }
  }
  return out;
}

std::vector<double> nice_ticks(double lo, double hi, int target = 6)
{
  double const raw = (hi - lo) / target;
  double const mag = std::pow(10.0, std::floor(std::log10(raw)));
  double step = mag;
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    step = m * mag;
    if (step >= raw) { break; }
  }
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) { ticks.push_back(t); }
  return ticks;
}

struct Range
{
  double lo = 0.0;
  double hi = 1.0;

  void include(double v)
  {
    if (!std::isfinite(v)) { return; }
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Range padded(double frac) const
  {
    double const span = hi > lo ? hi - lo : std::max(1.0, std::abs(hi));
    return {lo - frac * span, hi + frac * span};
  }
};

Range range_of(std::vector<double> const &v)
{
  Range r{INFINITY, -INFINITY};
  for (double x : v) { r.include(x); }
  if (!(r.lo <= r.hi)) { r = {0.0, 1.0}; }
  return r;
}

class SvgPlot
{
public:
  SvgPlot(Range x, Range y, std::string const &title, std::string const &xlabel, std::string const &ylabel)
    : x_(x), y_(y)
  {
    body_ << "<rect x=\"0\" y=\"0\" width=\"" << fmt(kW) << "\" height=\"" << fmt(kH) << "\" fill=\"white\"/>\n";
    text(kW / 2, 24, title, "middle", 15);
    text(kLeft + plot_w() / 2, kH - 12, xlabel, "middle", 12);
    body_ << "<text transform=\"translate(16," << fmt(kTop + plot_h() / 2) << ") rotate(-90)\" "
          << "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << escape(ylabel) << "</text>\n";
  }

  double px(double x) const { return kLeft + (x - x_.lo) / (x_.hi - x_.lo) * plot_w(); }
  double py(double y) const { return kTop + (y_.hi - y) / (y_.hi - y_.lo) * plot_h(); }

  void axes()
  {
    for (double t : nice_ticks(x_.lo, x_.hi)) {
      line_px(px(t), kTop, px(t), kTop + plot_h(), "#e4e4e4", 1);
      text(px(t), kTop + plot_h() + 16, label(t), "middle", 11);
    }
    for (double t : nice_ticks(y_.lo, y_.hi)) {
      line_px(kLeft, py(t), kLeft + plot_w(), py(t), "#e4e4e4", 1);
      text(kLeft - 6, py(t) + 4, label(t), "end", 11);
    }
    body_ << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(plot_w())
          << "\" height=\"" << fmt(plot_h()) << "\" fill=\"none\" stroke=\"black\"/>\n";
  }

  void band_x(double lo, double hi, std::string const &color, double opacity)
  {
    double const a = std::clamp(px(lo), kLeft, kLeft + plot_w());
    double const b = std::clamp(px(hi), kLeft, kLeft + plot_w());
    body_ << "<rect x=\"" << fmt(a) << "\" y=\"" << fmt(kTop) << "\" width=\"" << fmt(b - a) << "\" height=\""
          << fmt(plot_h()) << "\" fill=\"" << color << "\" fill-opacity=\"" << fmt(opacity) << "\"/>\n";
  }

  void band_y(double lo, double hi, std::string const &color, double opacity)
  {
    double const a = std::clamp(py(hi), kTop, kTop + plot_h());
    double const b = std::clamp(py(lo), kTop, kTop + plot_h());
    body_ << "<rect x=\"" << fmt(kLeft) << "\" y=\"" << fmt(a) << "\" width=\"" << fmt(plot_w()) << "\" height=\""
          << fmt(b - a) << "\" fill=\"" << color << "\" fill-opacity=\"" << fmt(opacity) << "\"/>\n";
  }

  void hline(double y, std::string const &color, std::string const &dash, std::string const &tag)
  {
    body_ << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(py(y)) << "\" x2=\"" << fmt(kLeft + plot_w())
          << "\" y2=\"" << fmt(py(y)) << "\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
    if (!dash.empty()) { body_ << " stroke-dasharray=\"" << dash << "\""; }
    body_ << "/>\n";
    text(kLeft + plot_w() - 4, py(y) - 4, tag, "end", 11, color);
  }

  void polyline(std::vector<double> const &xs, std::vector<double> const &ys, std::string const &color)
  {
    body_ << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < xs.size(); ++i) { body_ << (i ? " " : "") << fmt(px(xs[i])) << ',' << fmt(py(ys[i])); }
    body_ << "\"/>\n";
  }

  void error_bar(double x, double y, double sd, std::string const &color)
  {
    line_px(px(x), py(y - sd), px(x), py(y + sd), color, 1);
    line_px(px(x) - 3, py(y - sd), px(x) + 3, py(y - sd), color, 1);
    line_px(px(x) - 3, py(y + sd), px(x) + 3, py(y + sd), color, 1);
  }

  void dot(double x, double y, std::string const &color, double r = 3.5)
  {
    body_ << "<circle cx=\"" << fmt(px(x)) << "\" cy=\"" << fmt(py(y)) << "\" r=\"" << fmt(r) << "\" fill=\"" << color
          << "\" stroke=\"black\" stroke-width=\"0.4\"/>\n";
  }

  void legend(std::vector<std::pair<std::string, std::string>> const &entries)
  {
    double y = kTop + 14;
    for (auto const &[name, color] : entries) {
      double const x = kLeft + plot_w() + 14;
      body_ << "<rect x=\"" << fmt(x) << "\" y=\"" << fmt(y - 9) << "\" width=\"10\" height=\"10\" fill=\"" << color
            << "\"/>\n";
      text(x + 15, y, name, "start", 11);
      y += 16;
    }
  }

  void text(double x, double y, std::string const &s, std::string const &anchor, int size,
            std::string const &color = "black")
  {
    body_ << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(y) << "\" text-anchor=\"" << anchor
          << "\" font-family=\"sans-serif\" font-size=\"" << size << "\" fill=\"" << color << "\">" << escape(s)
          << "</text>\n";
  }

  void save(fs::path const &path) const
  {
    write_text_file(path, [&](std::ostream &out) {
      out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
          << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(kW) << "\" height=\"" << fmt(kH)
          << "\" viewBox=\"0 0 " << fmt(kW) << ' ' << fmt(kH) << "\">\n"
          << body_.str() << "</svg>\n";
    });
  }

private:
  static constexpr double kW = 760, kH = 460, kLeft = 72, kRight = 150, kTop = 40, kBottom = 50;
  static double plot_w() { return kW - kLeft - kRight; }
  static double plot_h() { return kH - kTop - kBottom; }

  void line_px(double x1, double y1, double x2, double y2, std::string const &color, double width)
  {
    body_ << "<line x1=\"" << fmt(x1) << "\" y1=\"" << fmt(y1) << "\" x2=\"" << fmt(x2) << "\" y2=\"" << fmt(y2)
          << "\" stroke=\"" << color << "\" stroke-width=\"" << fmt(width) << "\"/>\n";
  }

  Range x_, y_;
  std::ostringstream body_;
};

constexpr char const *kCineColor = "#1f5fbf";
constexpr char const *kEpiColor = "#c8281e";

std::vector<double> column(CsvTable const &t, std::string const &name)
{
  std::vector<double> v;
  for (std::size_t i = 0; i < t.rows.size(); ++i) { v.push_back(t.number(i, name)); }
  return v;
}

double meta_number(CsvTable const &t, std::string const &key)
{
  auto it = t.meta.find(key);
  if (it == t.meta.end()) { fail(ErrorKind::Io, "csv: missing '# " + key + "=' line"); }
  return std::stod(it->second);
}

void render_fig4_curves(CsvTable const &t, fs::path const &out)
{
  auto const idx = column(t, "index");
  auto const cine = column(t, "cine_flow_mm3_s");
  auto const epi = column(t, "epi_flow_mm3_s");
  auto const sd = column(t, "epi_sd_mm3_s");
  std::vector<double> all = cine;
  for (std::size_t i = 0; i < epi.size(); ++i) {
    all.push_back(epi[i] - sd[i]);
    all.push_back(epi[i] + sd[i]);
  }
  Range x = range_of(idx);
  x.hi = std::max(x.hi, x.lo + 1.0);
  SvgPlot plot(x.padded(0.02), range_of(all).padded(0.08), "Average cycle: CINE vs reconstructed EPI",
               "cycle point (1/32 period)", "flow (mm^3/s)");
  plot.axes();
  plot.polyline(idx, cine, kCineColor);
  plot.polyline(idx, epi, kEpiColor);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    plot.error_bar(idx[i], epi[i], sd[i], kEpiColor);
    plot.dot(idx[i], cine[i], kCineColor, 2.5);
    plot.dot(idx[i], epi[i], kEpiColor, 2.5);
  }
  plot.legend({{"CINE", kCineColor}, {"EPI (mean, SD bars)", kEpiColor}});
  plot.save(out);
}

void render_fig4_bland_altman(CsvTable const &t, fs::path const &out)
{
  auto const means = column(t, "pair_mean");
  auto const diffs = column(t, "diff");
  double const md = meta_number(t, "mean_diff");
  double const lo = meta_number(t, "loa_low");
  double const hi = meta_number(t, "loa_high");
  Range y = range_of(diffs);
  y.include(lo);
  y.include(hi);
  SvgPlot plot(range_of(means).padded(0.05), y.padded(0.1), "Bland-Altman: EPI - CINE", "mean of pair (mm^3/s)",
               "difference (mm^3/s)");
  plot.axes();
  plot.hline(md, "#c8281e", "", "mean " + label(std::round(md * 10) / 10));
  plot.hline(lo, "#555555", "6,4", "-1.96 SD " + label(std::round(lo * 10) / 10));
  plot.hline(hi, "#555555", "6,4", "+1.96 SD " + label(std::round(hi * 10) / 10));
  for (std::size_t i = 0; i < means.size(); ++i) { plot.dot(means[i], diffs[i], "#333333", 3); }
  auto it = t.meta.find("agreement");
  if (it != t.meta.end()) { plot.legend({{"agreement: " + it->second, "#ffffff"}}); }
  plot.save(out);
}

std::string shade(Mode mode, std::size_t i, std::size_t n)
{
  double const l = n > 1 ? 78.0 - 50.0 * static_cast<double>(i) / static_cast<double>(n - 1) : 50.0;
  char buf[48];
  std::snprintf(buf, sizeof buf, "hsl(%d,75%%,%.0f%%)", mode == Mode::Cine ? 215 : 2, l);
  return buf;
}

void render_fig5(CsvTable const &t, fs::path const &out)
{
  std::vector<double> sizes;
  for (std::size_t i = 0; i < t.rows.size(); ++i) { sizes.push_back(t.number(i, "pixel_size_mm")); }
  std::sort(sizes.begin(), sizes.end());
  sizes.erase(std::unique(sizes.begin(), sizes.end()), sizes.end());
  auto const size_index = [&](double s) {
    return static_cast<std::size_t>(std::lower_bound(sizes.begin(), sizes.end(), s - 1e-9) - sizes.begin());
  };

  auto const flow_ci = confidence_check(kGoldFlow, kGoldFlow, kConfidencePercent);
  auto const area_ci = confidence_check(kGoldArea, kGoldArea, kConfidencePercent);
  Range x{area_ci.low, area_ci.high}, y{flow_ci.low, flow_ci.high};
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.text(i, "status") != "ok") { continue; }
    x.include(t.number(i, "area_mm2"));
    y.include(t.number(i, "mean_flow_mm3_s"));
  }
  SvgPlot plot(x.padded(0.06), y.padded(0.06), "Pixel-size sweep: area vs mean flow", "segmented area (mm^2)",
               "mean flow (mm^3/s)");
  plot.band_x(area_ci.low, area_ci.high, "#8e44ad", 0.15);
  plot.band_y(flow_ci.low, flow_ci.high, "#27ae60", 0.15);
  plot.axes();
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    if (t.text(i, "status") != "ok") { continue; }
    Mode const mode = mode_from_string(t.text(i, "mode"));
    plot.dot(t.number(i, "area_mm2"), t.number(i, "mean_flow_mm3_s"),
             shade(mode, size_index(t.number(i, "pixel_size_mm")), sizes.size()));
  }
  std::vector<std::pair<std::string, std::string>> legend;
  for (Mode mode : {Mode::Cine, Mode::Epi}) {
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      char buf[48];
      std::snprintf(buf, sizeof buf, "%s %.1f mm", to_string(mode).c_str(), sizes[k]);
      legend.emplace_back(buf, shade(mode, k, sizes.size()));
    }
  }
  plot.legend(legend);
  plot.save(out);
}

void write_config_copy(ExperimentConfig const &config, fs::path const &dir)
{
  write_text_file(dir / "config.ini", [&](std::ostream &out) { write_config(out, config); });
}

} // namespace

void write_validation_outputs(ValidationReport const &report, ExperimentConfig const &config, fs::path const &dir)
{
  make_dir(dir / "curves");
  write_config_copy(config, dir);

  CsvTable summary;
  summary.meta["base_seed"] = std::to_string(config.base_seed);
  summary.meta["noiseless"] = yes_no(config.noiseless);
  summary.meta["agreement"] = yes_no(report.agreement);
  summary.meta["gate"] = report.gate() ? "pass" : "fail";
  for (std::size_t i = 0; i < report.notes.size(); ++i) { summary.meta["note_" + std::to_string(i + 1)] = report.notes[i]; }
  summary.header = {"mode", "mean_flow_mm3_s", "sd_flow_mm3_s", "cv_percent", "area_mm2",
                    "in_flow_ci", "in_area_ci", "repeats"};
  for (auto const &[mode, s] : {std::pair{Mode::Cine, report.cine}, std::pair{Mode::Epi, report.epi}}) {
    summary.rows.push_back({to_string(mode), format_number(s.mean_flow), format_number(s.sd_flow),
                            s.has_cv() ? format_number(s.cv_percent) : "n/a", format_number(s.area),
                            yes_no(s.in_flow_ci), yes_no(s.in_area_ci), std::to_string(s.repeats)});
  }
  write_csv_file(dir / "validation_summary.csv", summary);

  CsvTable repeats;
  repeats.header = {"repeat", "seed", "mode", "mean_flow_mm3_s", "area_mm2", "n_cycles", "period_estimate_s"};
  for (auto const &rep : report.repeats) {
    for (auto const *r : {&rep.cine, &rep.epi}) {
      repeats.rows.push_back({std::to_string(rep.index), std::to_string(rep.seed), to_string(r->mode),
                              format_number(r->mean_flow), format_number(r->area),
                              r->cycle ? std::to_string(r->cycle->n_cycles) : "",
                              r->cycle ? format_number(r->cycle->period_estimate) : ""});
    }
    auto const tag = two_digits(rep.index);
    write_text_file(dir / "curves" / ("cine_r" + tag + ".csv"),
                    [&](std::ostream &out) { write_flow_curve_csv(out, rep.cine.curve); });
    write_text_file(dir / "curves" / ("epi_r" + tag + ".csv"),
                    [&](std::ostream &out) { write_flow_curve_csv(out, rep.epi.curve); });
    write_text_file(dir / "curves" / ("epi_cycle_r" + tag + ".csv"),
                    [&](std::ostream &out) { write_cycle_csv(out, rep.epi_aligned); });
  }
  write_csv_file(dir / "repeats.csv", repeats);

  CsvTable curves;
  curves.header = {"index", "cine_flow_mm3_s", "epi_flow_mm3_s", "epi_sd_mm3_s"};
  for (std::size_t j = 0; j < kCyclePoints; ++j) {
    curves.rows.push_back({std::to_string(j), format_number(report.cine_mean[j]), format_number(report.epi_mean[j]),
                           format_number(report.epi_sd[j])});
  }
  write_csv_file(dir / "fig4_curves.csv", curves);

  auto const &ba = report.bland_altman;
  CsvTable bat;
  bat.meta["mean_diff"] = format_number(ba.mean_diff);
  bat.meta["sd_diff"] = format_number(ba.sd_diff);
  bat.meta["loa_low"] = format_number(ba.loa_low);
  bat.meta["loa_high"] = format_number(ba.loa_high);
  bat.meta["agreement"] = yes_no(report.agreement);
  bat.meta["note"] = "limits are the data's own mean +- 1.96 SD; the verdict screens for gross shape mismatch and "
                     "is not a significance test";
  bat.header = {"pair_mean", "diff"};
  for (std::size_t i = 0; i < ba.diffs.size(); ++i) {
    bat.rows.push_back({format_number(ba.pair_means[i]), format_number(ba.diffs[i])});
  }
  write_csv_file(dir / "bland_altman.csv", bat);

  render_directory(dir, dir);
}

void write_sweep_outputs(std::vector<SweepRecord> const &records, ExperimentConfig const &config, fs::path const &dir)
{
  make_dir(dir);
  write_config_copy(config, dir);
  CsvTable t;
  t.meta["base_seed"] = std::to_string(config.base_seed);
  t.meta["noiseless"] = yes_no(config.noiseless);
  t.meta["gate"] = sweep_gate(records) ? "pass" : "fail";
  t.header = {"pixel_size_mm", "mode", "repeat", "seed", "status", "area_mm2", "mean_flow_mm3_s", "in_flow_ci",
              "message"};
  for (auto const &r : records) {
    bool const in_ci = r.ok && confidence_check(r.mean_flow, kGoldFlow, kConfidencePercent).inside;
    t.rows.push_back({format_number(r.pixel_size), to_string(r.mode), std::to_string(r.repeat_index),
                      std::to_string(r.seed), r.ok ? "ok" : "failed", r.ok ? format_number(r.area) : "",
                      r.ok ? format_number(r.mean_flow) : "", yes_no(in_ci), r.error});
  }
  write_csv_file(dir / "sweep.csv", t);
  render_directory(dir, dir);
}

void write_analysis_outputs(PipelineResult const &result, fs::path const &dir)
{
  make_dir(dir);
  CsvTable summary;
  summary.header = {"mode", "area_mm2", "mean_flow_mm3_s", "frames", "n_cycles", "period_estimate_s"};
  summary.rows.push_back({to_string(result.mode), format_number(result.area), format_number(result.mean_flow),
                          std::to_string(result.curve.size()),
                          result.cycle ? std::to_string(result.cycle->n_cycles) : "",
                          result.cycle ? format_number(result.cycle->period_estimate) : ""});
  write_csv_file(dir / "analysis.csv", summary);
  write_text_file(dir / "curve.csv", [&](std::ostream &out) { write_flow_curve_csv(out, result.curve); });
  if (result.cycle) {
    write_text_file(dir / "cycle.csv", [&](std::ostream &out) { write_cycle_csv(out, *result.cycle); });
    CsvTable minima;
    minima.header = {"sample", "time_s"};
    for (auto i : result.minima) { minima.rows.push_back({std::to_string(i), format_number(result.curve.times[i])}); }
    write_csv_file(dir / "minima.csv", minima);
  }
}

std::vector<fs::path> render_directory(fs::path const &in, fs::path const &out)
{
  std::vector<fs::path> written;
  bool const fig4 = fs::exists(in / "fig4_curves.csv") && fs::exists(in / "bland_altman.csv");
  bool const fig5 = fs::exists(in / "sweep.csv");
  if (!fig4 && !fig5) { fail(ErrorKind::Io, "nothing to render in " + in.string()); }
  make_dir(out);
  if (fig4) {
    render_fig4_curves(read_csv_file(in / "fig4_curves.csv"), out / "fig4_curves.svg");
    render_fig4_bland_altman(read_csv_file(in / "bland_altman.csv"), out / "fig4_bland_altman.svg");
    written.push_back(out / "fig4_curves.svg");
    written.push_back(out / "fig4_bland_altman.svg");
  }
  if (fig5) {
    render_fig5(read_csv_file(in / "sweep.csv"), out / "fig5_sweep.svg");
    written.push_back(out / "fig5_sweep.svg");
  }
  return written;
}

} // namespace pcflow
