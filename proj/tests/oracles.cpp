#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace oracle {

namespace {

void walk(const std::vector<double>& a, const std::vector<double>& b, std::size_t w, std::size_t i,
          std::size_t j, double acc, double& best) {
  const std::size_t gap = i > j ? i - j : j - i;
  if (gap > w) return;
  acc += std::fabs(a[i] - b[j]);
  const std::size_t n = a.size();
  if (i == n - 1 && j == n - 1) {
    best = std::min(best, acc);
    return;
  }
  if (i + 1 < n) walk(a, b, w, i + 1, j, acc, best);
  if (j + 1 < n) walk(a, b, w, i, j + 1, acc, best);
  if (i + 1 < n && j + 1 < n) walk(a, b, w, i + 1, j + 1, acc, best);
}

void enumerate(const std::vector<std::vector<double>>& d, std::size_t k, std::size_t pos,
               std::size_t used, std::vector<std::size_t>& cur, double& best,
               std::vector<std::size_t>& arg) {
  const std::size_t n = d.size();
  if (pos == n) {
    if (used != k) return;
    const double e = centroid_energy(d, cur, k);
    if (e < best) {
      best = e;
      arg = cur;
    }
    return;
  }
  // restricted growth strings: each labelling of a partition is visited once
  for (std::size_t c = 0; c <= std::min(used, k - 1); ++c) {
    cur[pos] = c;
    enumerate(d, k, pos + 1, std::max(used, c + 1), cur, best, arg);
  }
}

}  // namespace

double dtw_paths(const std::vector<double>& a, const std::vector<double>& b, std::size_t window) {
  double best = std::numeric_limits<double>::infinity();
  walk(a, b, window, 0, 0, 0.0, best);
  return best;
}

double centroid_energy(const std::vector<std::vector<double>>& d, const std::vector<std::size_t>& labels,
                       std::size_t k) {
  double total = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double s = 0.0;
    std::size_t m = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (labels[i] != c) continue;
      ++m;
      for (std::size_t j = 0; j < d.size(); ++j)
        if (labels[j] == c) s += d[i][j];
    }
    if (m) total += s / (2.0 * static_cast<double>(m));
  }
  return total;
}

double best_partition(const std::vector<std::vector<double>>& d, std::size_t k,
                      std::vector<std::size_t>* labels) {
  std::vector<std::size_t> cur(d.size(), 0), arg;
  double best = std::numeric_limits<double>::infinity();
  enumerate(d, k, 0, 0, cur, best, arg);
  if (labels) *labels = arg;
  return best;
}

double flat_cvar(std::vector<double> v, double alpha) {
  std::sort(v.begin(), v.end());
  const auto m = static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(v.size()) - 1e-9));
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) s += v[i];
  return s / static_cast<double>(m);
}

double mc_hypervolume(const std::vector<std::array<double, 2>>& front, std::array<double, 2> ref,
                      std::size_t samples, std::uint64_t seed) {
  double hi0 = ref[0], hi1 = ref[1];
  for (const auto& p : front) {
    hi0 = std::max(hi0, p[0]);
    hi1 = std::max(hi1, p[1]);
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u0(ref[0], hi0), u1(ref[1], hi1);
  std::size_t hits = 0;
  for (std::size_t s = 0; s < samples; ++s) {
    const double x = u0(rng), y = u1(rng);
    for (const auto& p : front)
      if (p[0] >= x && p[1] >= y) {
        ++hits;
        break;
      }
  }
  return (hi0 - ref[0]) * (hi1 - ref[1]) * static_cast<double>(hits) / static_cast<double>(samples);
}

std::vector<std::size_t> nondominated(const std::vector<std::array<double, 2>>& pts) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dom = false;
    for (std::size_t j = 0; j < pts.size() && !dom; ++j)
      dom = pts[j][0] >= pts[i][0] && pts[j][1] >= pts[i][1] &&
            (pts[j][0] > pts[i][0] || pts[j][1] > pts[i][1]);
    if (!dom) out.push_back(i);
  }
  return out;
}

}  // namespace oracle
