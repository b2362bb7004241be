#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ideo/climate.hpp"
#include "ideo/cluster.hpp"
#include "ideo/cropmodel.hpp"
#include "ideo/dissim.hpp"
#include "ideo/indicators.hpp"
#include "ideo/moo.hpp"
#include "ideo/reconstruct.hpp"

namespace ideo {

/// The comparison grid: strategies × budgets × replications on one climate set.
struct ExperimentConfig {
  std::optional<std::string> climate_file;
  std::size_t climate_length = 180;
  GeneratorConfig generator = GeneratorConfig::defaults();
  std::optional<std::uint64_t> climate_seed;  ///< defaults to one derived from the master seed

  std::vector<std::string> budgets{"very-small"};
  std::vector<BudgetPreset> custom_presets;  ///< extra presets, looked up before the built-in ones
  std::vector<Strategy> strategies{Strategy::random, Strategy::naive, Strategy::two_step};
  std::size_t replications = 10;

  double alpha = 0.2;
  std::size_t basis_size = 10;
  ClusteringConfig clustering;  ///< K = 10, 500 iterations, 10 restarts
  DtwConfig dtw;
  DissimWeights weights;
  ResidualMethod method = ResidualMethod::rescaled;
  OptimizerConfig optimizer;  ///< swarm constants; size and length come from the preset

  double reference_multiplier = 20.0;  ///< reference run budget / largest compared budget
  std::size_t reference_pop = 20;

  void validate() const;
  const BudgetPreset& preset(const std::string& name) const;

  static ExperimentConfig from_json(const std::string& text);
  std::string to_json() const;
};

struct CellResult {
  Strategy strategy = Strategy::random;
  std::string budget;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::string status = "ok";
  ParetoArchive archive;  ///< re-scored on the full climate set
  BudgetReport report;
  std::uint64_t expected_simulations = 0;
  std::string archive_file;
  std::string archive_hash;
  double hypervolume = 0.0;
  double epsilon = 0.0;
  double r2 = 0.0;
};

struct ExperimentReport {
  std::vector<CellResult> cells;
  ParetoArchive reference;
  std::uint64_t reference_simulations = 0;
  std::size_t reference_iterations = 0;
  FrontPoint hv_reference{};
  FrontPoint ideal{};
};

/// Runs every cell, scores it against a long full-evaluation reference run, and writes
/// archives/, indicators.csv, budget_audit.csv, summary.csv, reference_front.csv and
/// reference.json under out_dir (when non-empty).
ExperimentReport run_experiment(const ExperimentConfig& cfg, std::uint64_t master_seed,
                                const std::string& out_dir, const Simulator& sim);

/// Type-7 (linear interpolation) sample quantile; p in [0, 1].
double sample_quantile(std::vector<double> values, double p);

}  // namespace ideo
