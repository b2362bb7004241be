#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "ideo/climate.hpp"
#include "ideo/common.hpp"
#include "ideo/cropmodel.hpp"

namespace ideo {

enum class DissimKind { tmin, tmax, rad, etp, rain, model, normalized, combined };
const char* to_string(DissimKind k) noexcept;

/// Symmetric N×N matrix with zero diagonal and non-negative finite entries.
class DissimilarityMatrix {
 public:
  DissimilarityMatrix() = default;
  DissimilarityMatrix(Matrix values, DissimKind kind);

  std::size_t size() const noexcept { return values_.rows(); }
  double operator()(std::size_t i, std::size_t j) const noexcept { return values_(i, j); }
  std::span<const double> row(std::size_t i) const noexcept { return values_.row(i); }
  const Matrix& values() const noexcept { return values_; }
  DissimKind kind() const noexcept { return kind_; }

  /// Same matrix with rows/columns reordered: out(a, b) = this(perm[a], perm[b]).
  DissimilarityMatrix permuted(const std::vector<std::size_t>& perm) const;

 private:
  Matrix values_;
  DissimKind kind_ = DissimKind::combined;
};

/// Convex weights for the six normalized dissimilarities.
struct DissimWeights {
  double tmin = 0.1;
  double tmax = 0.1;
  double rad = 0.1;
  double etp = 0.1;
  double rain = 0.1;
  double model = 0.5;

  void validate() const;
  static DissimWeights from_json(const std::string& text);
  std::string to_json() const;
};

/// Sakoe-Chiba half-widths in days, per weather variable.
struct DtwConfig {
  std::array<std::size_t, kWeatherVarCount> window{7, 7, 7, 7, 3};

  std::size_t window_for(WeatherVar v) const noexcept {
    return window[static_cast<std::size_t>(v)];
  }
};

/// Banded DTW with |a_i − b_j| local cost and unit-weight steps
/// (i−1, j), (i, j−1), (i−1, j−1), restricted to |i − j| ≤ window.
double dtw_distance(std::span<const double> a, std::span<const double> b, std::size_t window);

/// One DTW matrix per weather variable, in WeatherVar order.
std::array<DissimilarityMatrix, kWeatherVarCount> variable_dissim(const ClimateSet& climate,
                                                                   const DtwConfig& cfg);

/// Root-mean-square yield difference over the basis phenotypes (rows of y).
DissimilarityMatrix model_dissim(const Matrix& y);

/// Double-centres D into similarities, rescales to unit self-similarity and maps
/// back to d̄ = 2 − 2 s̄ ∈ [0, 4]. Rows whose self-similarity is ≤ kEpsNum get 0.
DissimilarityMatrix cosine_normalize(const DissimilarityMatrix& d);

/// Weighted sum of the six normalized matrices: five variables (WeatherVar order) then model.
DissimilarityMatrix combine(const std::array<DissimilarityMatrix, kWeatherVarCount>& variables,
                            const DissimilarityMatrix& model, const DissimWeights& w);

/// Everything the combined Δ is built from, kept for reporting.
struct DissimPipeline {
  std::array<DissimilarityMatrix, kWeatherVarCount> raw_variables;
  DissimilarityMatrix raw_model;
  std::array<DissimilarityMatrix, kWeatherVarCount> normalized_variables;
  DissimilarityMatrix normalized_model;
  DissimilarityMatrix combined;
};

DissimPipeline build_dissimilarity(const ClimateSet& climate, const Matrix& basis_yields,
                                   const DtwConfig& dtw, const DissimWeights& w);

void write_dissim_csv(std::ostream& out, const DissimilarityMatrix& d,
                      const std::vector<std::string>& ids);
/// Reads a labelled matrix; fills ids with the header labels.
DissimilarityMatrix read_dissim_csv(std::istream& in, std::vector<std::string>& ids);

}  // namespace ideo
