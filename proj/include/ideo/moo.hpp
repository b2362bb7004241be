#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ideo/climate.hpp"
#include "ideo/cluster.hpp"
#include "ideo/cropmodel.hpp"
#include "ideo/dissim.hpp"
#include "ideo/reconstruct.hpp"

namespace ideo {

/// A phenotype scored on (expected yield, CVaR), both maximized.
struct ObjectivePoint {
  Phenotype phenotype;
  double e = 0.0;
  double cvar = 0.0;
  std::uint64_t sims_used = 0;
};

/// a is at least as good in both objectives and strictly better in one.
bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) noexcept;

struct ParetoArchive {
  std::vector<ObjectivePoint> members;
  std::size_t capacity = std::numeric_limits<std::size_t>::max();

  std::size_t size() const noexcept { return members.size(); }
  bool empty() const noexcept { return members.empty(); }
};

/// Maximal non-dominated subset, first occurrence kept for repeated phenotypes,
/// ordered by e descending (cvar descending on ties).
ParetoArchive pareto_filter(std::span<const ObjectivePoint> points);

/// Bi-objective crowding distance; extremes of either objective get +inf.
std::vector<double> crowding_distance(std::span<const ObjectivePoint> front);

/// Drops the least crowded member until the archive fits its capacity.
void prune_to_capacity(ParetoArchive& archive);

/// Scores one phenotype. Implementations must be deterministic.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual ObjectivePoint evaluate(const Phenotype& x) const = 0;
  virtual std::uint64_t sims_per_evaluation() const noexcept = 0;
};

/// Runs the simulator on all N series.
class FullEvaluator final : public Evaluator {
 public:
  FullEvaluator(const ClimateSet& climate, const Simulator& sim, double alpha);
  ObjectivePoint evaluate(const Phenotype& x) const override;
  std::uint64_t sims_per_evaluation() const noexcept override { return climate_.size(); }

 private:
  const ClimateSet& climate_;
  const Simulator& sim_;
  double alpha_;
};

/// Runs the simulator on the K representatives only and reconstructs the N-point distribution.
class ReconstructedEvaluator final : public Evaluator {
 public:
  ReconstructedEvaluator(const ClimateSet& climate, const Simulator& sim, ResidualTable table,
                         double alpha);
  ObjectivePoint evaluate(const Phenotype& x) const override;
  std::uint64_t sims_per_evaluation() const noexcept override { return table_.k(); }

  ReconstructedYield reconstruct(const Phenotype& x) const;
  const ResidualTable& table() const noexcept { return table_; }

 private:
  const ClimateSet& climate_;
  const Simulator& sim_;
  ResidualTable table_;
  double alpha_;
};

ObjectivePoint evaluate_full(const Phenotype& x, const ClimateSet& climate, const Simulator& sim,
                             double alpha);
ObjectivePoint evaluate_reconstructed(const Phenotype& x, const ClimateSet& climate,
                                      const Simulator& sim, const ResidualTable& table, double alpha);

struct OptimizerConfig {
  std::size_t pop_size = 10;
  std::size_t iterations = 50;
  std::uint64_t seed = 0;
  double inertia = 0.4;
  double c1 = 1.0;
  double c2 = 1.0;
  double mutation_rate = 0.5;
  double mutation_exponent = 1.5;
  std::size_t archive_capacity = 0;  ///< 0 means 2·pop_size
  double alpha = 0.2;

  void validate() const;
  std::size_t capacity() const noexcept { return archive_capacity ? archive_capacity : 2 * pop_size; }
};

struct BudgetEntry {
  std::string label;
  std::uint64_t calls = 0;
};

/// Simulator calls of one strategy run, read from a call counter.
struct BudgetReport {
  std::string strategy;
  std::uint64_t total = 0;
  std::vector<BudgetEntry> breakdown;
  std::uint64_t evaluations = 0;  ///< objective evaluations made by optimizers / sampling

  std::string to_json() const;
};

struct OptimizationResult {
  ParetoArchive archive;
  BudgetReport budget;
};

/// Called once per generation (0 = initial population) with the updated archive.
using GenerationObserver = std::function<void(std::size_t, const ParetoArchive&)>;

/// Multi-objective particle swarm with a crowding-distance archive.
/// Makes exactly (T + 1)·q objective evaluations.
OptimizationResult mopso_cd(const Evaluator& evaluator, const PhenotypeBounds& bounds,
                            const OptimizerConfig& cfg, const GenerationObserver& observer = {});

struct TwoStepConfig {
  std::size_t basis_size = 10;
  ClusteringConfig clustering;
  DtwConfig dtw;
  DissimWeights weights;
  ResidualMethod method = ResidualMethod::rescaled;
  OptimizerConfig optimizer;
  PhenotypeBounds bounds = PhenotypeBounds::defaults();
};

struct TwoStepResult {
  OptimizationResult result;
  ClusterModel clustering;
  ParetoArchive first_run;
  std::vector<Phenotype> first_basis;
  std::vector<Phenotype> second_basis;
};

/// l phenotypes from a front sorted by e: equally spaced picks when the front is
/// large enough, otherwise the whole front padded by alternating its extremes.
std::vector<Phenotype> select_basis_from_front(const ParetoArchive& front, std::size_t l);

TwoStepResult two_step(const ClimateSet& climate, const Simulator& sim, const TwoStepConfig& cfg);

OptimizationResult naive_mopso(const ClimateSet& climate, const Simulator& sim,
                               const OptimizerConfig& cfg,
                               const PhenotypeBounds& bounds = PhenotypeBounds::defaults());

OptimizationResult random_search(const ClimateSet& climate, const Simulator& sim, std::size_t n,
                                 double alpha, std::uint64_t seed,
                                 const PhenotypeBounds& bounds = PhenotypeBounds::defaults());

/// Re-evaluates every member on the full set and keeps the non-dominated ones.
ParetoArchive rescore_full(const ParetoArchive& archive, const ClimateSet& climate,
                           const Simulator& sim, double alpha);

enum class Strategy { random, naive, two_step };
const char* to_string(Strategy s) noexcept;
Strategy strategy_from_string(const std::string& s);

/// Sizes of one budget level for each strategy.
struct BudgetPreset {
  std::string name;
  std::size_t random_n = 0;
  std::size_t naive_iterations = 0;
  std::size_t naive_pop = 0;
  std::size_t two_step_iterations = 0;
  std::size_t two_step_pop = 0;
};

/// very-small, small, medium, large.
const std::vector<BudgetPreset>& budget_presets();
const BudgetPreset& budget_preset(const std::string& name);

/// Simulator calls a strategy makes under a preset: n·N, (T+1)·q·N, or 2·l·N + 2·(T+1)·q·K.
std::uint64_t expected_budget(Strategy s, const BudgetPreset& p, std::size_t n_series,
                              std::size_t k, std::size_t basis_size);

void write_archive_csv(std::ostream& out, const ParetoArchive& archive);
ParetoArchive read_archive_csv(std::istream& in);

}  // namespace ideo
