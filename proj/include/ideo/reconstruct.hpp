#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ideo/cluster.hpp"
#include "ideo/common.hpp"

namespace ideo {

enum class ResidualMethod { naive, rescaled };
const char* to_string(ResidualMethod m) noexcept;
ResidualMethod residual_method_from_string(const std::string& s);

/// Averaged residual profile of one class, aligned with its members.
struct ClassResiduals {
  std::size_t representative = 0;
  std::vector<std::size_t> members;  ///< element indices, increasing
  std::vector<double> naive;         ///< ε̂_j: mean raw residual over the basis
  std::vector<double> rescaled;      ///< ε̄_j: mean residual divided by σ_K(x_i); empty for naive tables
};

struct ResidualTable {
  ResidualMethod method = ResidualMethod::rescaled;
  std::size_t total = 0;  ///< N
  std::vector<ClassResiduals> classes;
  std::vector<double> basis_scales;  ///< σ_K(x_i) per basis phenotype (rescaled only)
  std::vector<std::size_t> skipped_basis;  ///< basis rows with σ_K ≤ kEpsNum

  std::size_t k() const noexcept { return classes.size(); }
  std::vector<std::size_t> class_sizes() const;
  std::vector<std::size_t> representatives() const;
};

/// Weighted point of an empirical distribution.
struct Atom {
  double value = 0.0;
  double weight = 0.0;
};

struct ReconstructedYield {
  std::vector<Atom> atoms;
  std::vector<std::size_t> labels;  ///< class of each atom
  std::size_t clamped = 0;          ///< atoms raised from a negative value to 0
  bool naive_fallback = false;      ///< rescaled table, but σ_K(x) was degenerate
};

/// Class-size-weighted standard deviation of the representative yields.
double representative_scale(std::span<const double> y_rep, std::span<const std::size_t> class_sizes);

/// Residual profiles from the basis yields y (l×N) and a clustering of the N series.
ResidualTable compute_residuals(const Matrix& y, const ClusterModel& model, ResidualMethod method);

/// Enumerates the mixture: one atom per (class, member) with weight 1/N.
ReconstructedYield reconstruct_sample(std::span<const double> y_rep, const ResidualTable& table);

double expectation(std::span<const Atom> s);
double expectation(std::span<const double> values);

/// Lower empirical quantile: smallest v whose cumulative weight reaches alpha.
double quantile(std::span<const Atom> s, double alpha);
double quantile(std::span<const double> values, double alpha);

/// Lower-tail mean. Equal weights: mean of the ⌈αN⌉ smallest values. Otherwise the
/// weighted mean of the lowest α mass, taking a fraction of the boundary atom.
double cvar(std::span<const Atom> s, double alpha);
double cvar(std::span<const double> values, double alpha);

/// Atoms at the representatives with weights N^k / N.
std::vector<Atom> subset_sample(std::span<const double> y_rep, std::span<const std::size_t> class_sizes);

struct GaussianEstimate {
  double mean = 0.0;
  double stddev = 0.0;
  double quantile = 0.0;
  double cvar = 0.0;
};

/// Normal fit to the class-size-weighted representative yields, with closed-form tail statistics.
GaussianEstimate gaussian_estimate(std::span<const double> y_rep,
                                   std::span<const std::size_t> class_sizes, double alpha);

std::string residual_table_to_json(const ResidualTable& t);
ResidualTable residual_table_from_json(const std::string& text);

}  // namespace ideo
