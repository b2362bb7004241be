#include "ideo/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ideo {

Front Front::from_points(std::vector<FrontPoint> pts) {
  if (pts.empty()) throw Error("front must not be empty");
  std::stable_sort(pts.begin(), pts.end(), [](const FrontPoint& a, const FrontPoint& b) {
    return a[0] > b[0] || (a[0] == b[0] && a[1] > b[1]);
  });
  return Front{std::move(pts)};
}

Front Front::from_archive(const ParetoArchive& a) {
  std::vector<FrontPoint> pts;
  pts.reserve(a.size());
  for (const auto& m : a.members) pts.push_back({m.e, m.cvar});
  return from_points(std::move(pts));
}

double hypervolume(const Front& front, const FrontPoint& ref) {
  if (front.points.empty()) throw Error("hypervolume: empty front");
  for (const auto& p : front.points) {
    if (!(p[0] >= ref[0] && p[1] >= ref[1])) {
      throw Error("hypervolume: point (" + format_double(p[0]) + ", " + format_double(p[1]) +
                  ") does not dominate the reference point");
    }
  }
  auto pts = front.points;
  std::sort(pts.begin(), pts.end(), [](const FrontPoint& a, const FrontPoint& b) {
    return a[0] > b[0] || (a[0] == b[0] && a[1] > b[1]);
  });
  // Sweep from the largest e down; each point adds the slab above the best cvar so far.
  double volume = 0.0;
  double best_cvar = ref[1];
  for (const auto& p : pts) {
    if (p[1] > best_cvar) {
      volume += (p[0] - ref[0]) * (p[1] - best_cvar);
      best_cvar = p[1];
    }
  }
  return volume;
}

double epsilon_indicator(const Front& approx, const Front& reference) {
  if (approx.points.empty() || reference.points.empty()) throw Error("epsilon_indicator: empty front");
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& r : reference.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : approx.points) best = std::min(best, std::max(r[0] - a[0], r[1] - a[1]));
    worst = std::max(worst, best);
  }
  return worst;
}

double r2_indicator(const Front& front, std::span<const FrontPoint> weights, const FrontPoint& ideal) {
  if (front.points.empty()) throw Error("r2_indicator: empty front");
  if (weights.empty()) throw Error("r2_indicator: no weight vectors");
  for (const auto& w : weights) {
    if (!(w[0] >= 0.0 && w[1] >= 0.0) || std::abs(w[0] + w[1] - 1.0) > 1e-9) {
      throw Error("r2_indicator: weight vectors must be non-negative and sum to 1");
    }
  }
  double total = 0.0;
  for (const auto& w : weights) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& a : front.points) {
      best = std::min(best, std::max(w[0] * (ideal[0] - a[0]), w[1] * (ideal[1] - a[1])));
    }
    total += best;
  }
  return total / static_cast<double>(weights.size());
}

std::vector<FrontPoint> uniform_weights(std::size_t count) {
  if (count < 2) throw Error("uniform_weights: need at least 2 vectors");
  std::vector<FrontPoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back({t, 1.0 - t});
  }
  return out;
}

FrontPoint hypervolume_reference(std::span<const Front> fronts) {
  FrontPoint lo{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  FrontPoint hi{-lo[0], -lo[1]};
  for (const auto& f : fronts) {
    for (const auto& p : f.points) {
      for (int j = 0; j < 2; ++j) {
        lo[j] = std::min(lo[j], p[j]);
        hi[j] = std::max(hi[j], p[j]);
      }
    }
  }
  if (!std::isfinite(lo[0])) throw Error("hypervolume_reference: no points");
  FrontPoint ref{};
  for (int j = 0; j < 2; ++j) {
    const double span = hi[j] - lo[j];
    const double margin = span > 0.0 ? 0.01 * span : 0.01 * std::max(1.0, std::abs(lo[j]));
    ref[j] = lo[j] - margin;
  }
  return ref;
}

FrontPoint ideal_point(std::span<const Front> fronts) {
  FrontPoint hi{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& f : fronts) {
    for (const auto& p : f.points) {
      hi[0] = std::max(hi[0], p[0]);
      hi[1] = std::max(hi[1], p[1]);
    }
  }
  if (!std::isfinite(hi[0])) throw Error("ideal_point: no points");
  return hi;
}

}  // namespace ideo
