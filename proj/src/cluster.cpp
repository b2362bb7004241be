#include "ideo/cluster.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <random>

#include <json.hpp>

namespace ideo {

void ClusteringConfig::validate(std::size_t n) const {
  if (k < 1) throw Error("clustering: K must be at least 1");
  if (k > n) {
    throw Error("clustering: K = " + std::to_string(k) + " exceeds N = " + std::to_string(n));
  }
  if (iterations < 1) throw Error("clustering: iterations must be at least 1");
  if (restarts < 1) throw Error("clustering: restarts must be at least 1");
  if (!(eps0 > 0.0 && eps0 <= 1.0)) throw Error("clustering: eps0 must be in (0, 1]");
  if (!(c0 > 0.0)) throw Error("clustering: c0 must be > 0");
}

std::vector<std::size_t> ClusterModel::members(std::size_t c) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    if (assignment[i] == c) out.push_back(i);
  }
  return out;
}

namespace {

// Cached Δβ_k (as g) and β_k Δ β_kᵀ (as q) for every prototype.
struct PrototypeCache {
  Matrix g;
  std::vector<double> q;

  void rebuild_row(const DissimilarityMatrix& delta, const Matrix& beta, std::size_t k) {
    const std::size_t n = delta.size();
    auto b = beta.row(k);
    double qk = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      auto di = delta.row(i);
      double acc = 0.0;
      for (std::size_t m = 0; m < n; ++m) acc += di[m] * b[m];
      g(k, i) = acc;
      qk += b[i] * acc;
    }
    q[k] = qk;
  }

  PrototypeCache(const DissimilarityMatrix& delta, const Matrix& beta)
      : g(beta.rows(), delta.size()), q(beta.rows(), 0.0) {
    for (std::size_t k = 0; k < beta.rows(); ++k) rebuild_row(delta, beta, k);
  }

  double score(std::size_t k, std::size_t i) const { return g(k, i) - 0.5 * q[k]; }

  std::size_t closest(std::size_t i) const {
    std::size_t best = 0;
    double best_score = score(0, i);
    for (std::size_t k = 1; k < q.size(); ++k) {
      const double s = score(k, i);
      if (s < best_score) {
        best_score = s;
        best = k;
      }
    }
    return best;
  }
};

[[maybe_unused]] bool on_simplex(std::span<const double> row) {
  double sum = 0.0;
  for (double v : row) {
    if (v < 0.0) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) < 1e-9;
}

}  // namespace

double prototype_score(const DissimilarityMatrix& delta, const Matrix& beta, std::size_t k,
                       std::size_t i) {
  const std::size_t n = delta.size();
  auto b = beta.row(k);
  double lin = 0.0;
  for (std::size_t m = 0; m < n; ++m) lin += b[m] * delta(i, m);
  double quad = 0.0;
  for (std::size_t a = 0; a < n; ++a) {
    if (b[a] == 0.0) continue;
    auto da = delta.row(a);
    double acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) acc += da[m] * b[m];
    quad += b[a] * acc;
  }
  return lin - 0.5 * quad;
}

std::vector<std::size_t> assign_to_prototypes(const DissimilarityMatrix& delta, const Matrix& beta) {
  PrototypeCache cache(delta, beta);
  std::vector<std::size_t> out(delta.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cache.closest(i);
  return out;
}

double clustering_energy(const DissimilarityMatrix& delta, const Matrix& beta,
                         const std::vector<std::size_t>& assignment) {
  PrototypeCache cache(delta, beta);
  double e = 0.0;
  for (std::size_t i = 0; i < assignment.size(); ++i) e += cache.score(assignment[i], i);
  return e;
}

KMeansRun relational_kmeans_run(const DissimilarityMatrix& delta, const ClusteringConfig& cfg,
                                std::uint64_t run_seed, const KMeansObserver& observer) {
  const std::size_t n = delta.size();
  cfg.validate(n);
  const std::size_t K = cfg.k;
  std::mt19937_64 rng(run_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);

  // Random simplex points via normalized exponentials.
  Matrix beta(K, n);
  for (std::size_t k = 0; k < K; ++k) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      beta(k, i) = -std::log1p(-unit(rng));
      sum += beta(k, i);
    }
    for (std::size_t i = 0; i < n; ++i) beta(k, i) /= sum;
  }

  PrototypeCache cache(delta, beta);
  const double dk = static_cast<double>(K);
  for (std::size_t t = 1; t <= cfg.iterations; ++t) {
    const std::size_t i = pick(rng);
    const std::size_t j = cache.closest(i);
    const double r = cfg.eps0 / (1.0 + cfg.c0 * static_cast<double>(t) / dk);
    const double keep = 1.0 - r;

    // β_j ← β_j + r (e_i − β_j), with the cached products updated in O(N).
    cache.q[j] = keep * keep * cache.q[j] + 2.0 * r * keep * cache.g(j, i) + r * r * delta(i, i);
    auto di = delta.row(i);
    for (std::size_t m = 0; m < n; ++m) cache.g(j, m) = keep * cache.g(j, m) + r * di[m];
    for (std::size_t m = 0; m < n; ++m) beta(j, m) *= keep;
    beta(j, i) += r;

    assert(on_simplex(beta.row(j)));
    if (observer) observer(t, beta);
  }

  // Online passes leave stale assignments: rebuild the cache exactly and reassign everything.
  cache = PrototypeCache(delta, beta);
  std::vector<std::size_t> assignment(n);
  for (std::size_t i = 0; i < n; ++i) assignment[i] = cache.closest(i);

  // Empty-class repair: reseed an empty prototype on the worst-fitted element of a
  // class that can spare it; pin that element if the reseeded prototype still loses it.
  KMeansRun run;
  std::vector<bool> pinned(n, false);
  for (std::size_t guard = 0; guard <= n; ++guard) {
    std::vector<std::size_t> sizes(K, 0);
    for (auto a : assignment) ++sizes[a];
    auto empty = std::find(sizes.begin(), sizes.end(), std::size_t{0});
    if (empty == sizes.end()) break;
    const std::size_t k = static_cast<std::size_t>(empty - sizes.begin());

    std::size_t worst = n;
    double worst_score = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (pinned[i] || sizes[assignment[i]] < 2) continue;
      const double s = cache.score(assignment[i], i);
      if (s > worst_score) {
        worst_score = s;
        worst = i;
      }
    }
    assert(worst < n);
    for (std::size_t m = 0; m < n; ++m) beta(k, m) = 0.0;
    beta(k, worst) = 1.0;
    cache.rebuild_row(delta, beta, k);
    for (std::size_t i = 0; i < n; ++i) {
      if (!pinned[i]) assignment[i] = cache.closest(i);
    }
    if (assignment[worst] != k) assignment[worst] = k;
    pinned[worst] = true;
    ++run.repaired_classes;
  }

  run.energy = 0.0;
  for (std::size_t i = 0; i < n; ++i) run.energy += cache.score(assignment[i], i);
  run.beta = std::move(beta);
  run.assignment = std::move(assignment);
  return run;
}

ClusterModel relational_kmeans(const DissimilarityMatrix& delta, const ClusteringConfig& cfg) {
  cfg.validate(delta.size());
  ClusterModel best;
  KMeansRun best_run;
  bool have = false;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    auto run = relational_kmeans_run(delta, cfg, derive_seed(cfg.seed, {r}));
    best.restart_energies.push_back(run.energy);
    if (!have || run.energy < best_run.energy) {
      best_run = std::move(run);
      best.best_restart = r;
      have = true;
    }
  }
  best.beta = std::move(best_run.beta);
  best.assignment = std::move(best_run.assignment);
  best.energy = best_run.energy;
  best.class_sizes.assign(cfg.k, 0);
  for (auto a : best.assignment) ++best.class_sizes[a];
  best.representatives = select_representatives(delta, best.assignment);
  return best;
}

std::vector<std::size_t> select_representatives(const DissimilarityMatrix& delta,
                                                const std::vector<std::size_t>& assignment) {
  const std::size_t n = delta.size();
  if (assignment.size() != n) throw Error("select_representatives: assignment size mismatch");
  if (n == 0) return {};
  const std::size_t K = *std::max_element(assignment.begin(), assignment.end()) + 1;
  std::vector<std::vector<std::size_t>> classes(K);
  for (std::size_t i = 0; i < n; ++i) classes[assignment[i]].push_back(i);

  std::vector<std::size_t> reps(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& members = classes[k];
    if (members.empty()) throw Error("select_representatives: class " + std::to_string(k) + " is empty");
    double best = std::numeric_limits<double>::infinity();
    for (auto i : members) {
      double sum = 0.0;
      for (auto j : members) sum += delta(i, j);
      if (sum < best) {
        best = sum;
        reps[k] = i;
      }
    }
  }
  return reps;
}

std::string cluster_model_to_json(const ClusterModel& m, const std::vector<std::string>& ids) {
  nlohmann::json j;
  j["k"] = m.k();
  j["energy"] = m.energy;
  j["best_restart"] = m.best_restart;
  j["restart_energies"] = m.restart_energies;
  j["assignment"] = m.assignment;
  j["class_sizes"] = m.class_sizes;
  j["representatives"] = m.representatives;
  if (!ids.empty()) {
    std::vector<std::string> rep_ids;
    for (auto r : m.representatives) rep_ids.push_back(ids.at(r));
    j["representative_ids"] = rep_ids;
    j["series_ids"] = ids;
  }
  return j.dump(2);
}

}  // namespace ideo
