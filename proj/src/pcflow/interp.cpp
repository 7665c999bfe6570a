#include "pcflow/interp.hpp"

#include "pcflow/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace pcflow {

namespace {

double tangent(std::span<double const> t, std::span<double const> v, std::size_t i)
{
  std::size_t const n = t.size();
  if (i == 0) { return (v[1] - v[0]) / (t[1] - t[0]); }
  if (i == n - 1) { return (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2]); }
  return (v[i + 1] - v[i - 1]) / (t[i + 1] - t[i - 1]);
}

// Cubic on interval [t_i, t_{i+1}] in local s in [0, 1]: c0 + c1 s + c2 s^2 + c3 s^3.
std::array<double, 4> hermite_coeffs(std::span<double const> t, std::span<double const> v, std::size_t i)
{
  double const h = t[i + 1] - t[i];
  double const y0 = v[i], y1 = v[i + 1];
  double const m0 = h * tangent(t, v, i), m1 = h * tangent(t, v, i + 1);
  return {y0, m0, -3.0 * y0 - 2.0 * m0 + 3.0 * y1 - m1, 2.0 * y0 + m0 - 2.0 * y1 + m1};
}

double eval(std::array<double, 4> const &c, double s) { return c[0] + s * (c[1] + s * (c[2] + s * c[3])); }

} // namespace

double interpolate(std::span<double const> times, std::span<double const> values, double t, Interpolation kind)
{
  require(times.size() == values.size() && !times.empty(), "interpolation needs matching, non-empty samples");
  std::size_t const n = times.size();
  if (n == 1 || t <= times.front()) { return values.front(); }
  if (t >= times.back()) { return values.back(); }
  auto const it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t const i = static_cast<std::size_t>(it - times.begin()) - 1;
  double const s = (t - times[i]) / (times[i + 1] - times[i]);
  if (kind == Interpolation::Linear) { return values[i] + s * (values[i + 1] - values[i]); }
  return eval(hermite_coeffs(times, values, i), s);
}

double refine_minimum(std::span<double const> times, std::span<double const> values, std::size_t i)
{
  require(i > 0 && i + 1 < times.size(), "minimum refinement needs an interior sample");
  double best_t = times[i], best_v = values[i];
  for (std::size_t k = i - 1; k <= i; ++k) {
    auto const c = hermite_coeffs(times, values, k);
    // Roots of 3 c3 s^2 + 2 c2 s + c1 inside (0, 1).
    double const a = 3.0 * c[3], b = 2.0 * c[2], d = c[1];
    std::array<double, 2> roots{-1.0, -1.0};
    // Cancellation-free form: near-quadratic data leaves a tiny, noisy a.
    double const disc = b * b - 4.0 * a * d;
    if (disc >= 0.0) {
      double const q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
      if (q != 0.0) { roots[0] = d / q; }
      if (a != 0.0) { roots[1] = q / a; }
    }
    for (double s : roots) {
      if (s > 0.0 && s < 1.0) {
        double const v = eval(c, s);
        if (v < best_v) {
          best_v = v;
          best_t = times[k] + s * (times[k + 1] - times[k]);
        }
      }
    }
  }
  return best_t;
}

} // namespace pcflow
