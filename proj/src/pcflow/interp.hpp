#pragma once

#include <span>

namespace pcflow {

enum class Interpolation { Linear, CubicHermite };

// Piecewise interpolant through (times[i], values[i]); times strictly
// increasing. Outside [times.front(), times.back()] the end value is held.
// CubicHermite uses centred finite-difference tangents (one-sided at the
// ends), i.e. a Catmull-Rom spline generalised to uneven spacing.
double interpolate(std::span<double const> times, std::span<double const> values, double t,
                   Interpolation kind = Interpolation::CubicHermite);

/// Time of the interpolant's minimum on [times[i-1], times[i+1]], 0 < i < n-1.
double refine_minimum(std::span<double const> times, std::span<double const> values, std::size_t i);

} // namespace pcflow
