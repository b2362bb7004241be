#pragma once

#include <array>
#include <span>
#include <vector>

#include "ideo/moo.hpp"

namespace ideo {

/// (e, cvar) pair, both maximized.
using FrontPoint = std::array<double, 2>;

/// Non-empty point set sorted by e descending.
struct Front {
  std::vector<FrontPoint> points;

  static Front from_archive(const ParetoArchive& a);
  static Front from_points(std::vector<FrontPoint> pts);
};

/// Area dominated by the front and bounded below by ref. Dominated points are harmless.
double hypervolume(const Front& front, const FrontPoint& ref);

/// Additive epsilon: the smallest shift that lets approx weakly dominate every reference point.
double epsilon_indicator(const Front& approx, const Front& reference);

/// Mean over weight vectors of the best weighted Chebyshev distance to the ideal point.
double r2_indicator(const Front& front, std::span<const FrontPoint> weights, const FrontPoint& ideal);

/// (t, 1 − t) for t = 0, 1/(count−1), …, 1.
std::vector<FrontPoint> uniform_weights(std::size_t count = 21);

/// Componentwise worst point over the fronts, pushed out by 1% of the observed range.
FrontPoint hypervolume_reference(std::span<const Front> fronts);
/// Componentwise best point over the fronts.
FrontPoint ideal_point(std::span<const Front> fronts);

}  // namespace ideo
