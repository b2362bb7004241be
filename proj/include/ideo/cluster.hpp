#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "ideo/common.hpp"
#include "ideo/dissim.hpp"

namespace ideo {

struct ClusteringConfig {
  std::size_t k = 10;
  std::size_t iterations = 500;
  std::size_t restarts = 10;
  double eps0 = 0.5;  ///< initial learning rate
  double c0 = 1.0;    ///< learning-rate decay constant
  std::uint64_t seed = 0;

  void validate(std::size_t n) const;
};

/// Partition of Ω with simplex-weighted prototypes and one medoid per class.
struct ClusterModel {
  Matrix beta;                               ///< K×N, rows on the probability simplex
  std::vector<std::size_t> assignment;       ///< class of each element
  std::vector<std::size_t> class_sizes;
  std::vector<std::size_t> representatives;  ///< ω^k, an element of class k
  double energy = 0.0;
  std::vector<double> restart_energies;
  std::size_t best_restart = 0;

  std::size_t k() const noexcept { return class_sizes.size(); }
  /// Members of class c in increasing element order.
  std::vector<std::size_t> members(std::size_t c) const;
};

/// Distance-like score of element i against prototype row k of beta:
/// β_k·Δ_i − ½ β_k Δ β_kᵀ.
double prototype_score(const DissimilarityMatrix& delta, const Matrix& beta, std::size_t k,
                       std::size_t i);

/// argmin over classes of prototype_score, ties to the lowest class.
std::vector<std::size_t> assign_to_prototypes(const DissimilarityMatrix& delta, const Matrix& beta);

/// Σ_i prototype_score(assignment[i], i).
double clustering_energy(const DissimilarityMatrix& delta, const Matrix& beta,
                         const std::vector<std::size_t>& assignment);

struct KMeansRun {
  Matrix beta;
  std::vector<std::size_t> assignment;
  double energy = 0.0;
  std::size_t repaired_classes = 0;
};

/// Called after every online representation step with (step, beta).
using KMeansObserver = std::function<void(std::size_t, const Matrix&)>;

/// One seeded run of the online relational k-means, followed by a synchronous
/// reassignment pass and empty-class repair.
KMeansRun relational_kmeans_run(const DissimilarityMatrix& delta, const ClusteringConfig& cfg,
                                std::uint64_t run_seed, const KMeansObserver& observer = {});

/// Best-energy model over cfg.restarts runs; restart r uses derive_seed(cfg.seed, {r}).
ClusterModel relational_kmeans(const DissimilarityMatrix& delta, const ClusteringConfig& cfg);

/// Within-class row-sum minimizer per class, ties to the lowest element index.
std::vector<std::size_t> select_representatives(const DissimilarityMatrix& delta,
                                                const std::vector<std::size_t>& assignment);

std::string cluster_model_to_json(const ClusterModel& m, const std::vector<std::string>& ids);

}  // namespace ideo
