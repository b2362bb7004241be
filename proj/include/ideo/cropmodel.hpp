#pragma once

#include <array>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ideo/climate.hpp"
#include "ideo/common.hpp"

namespace ideo {

inline constexpr std::size_t kTraitCount = 8;

/// The eight optimized plant traits.
struct Phenotype {
  double tdf1 = 0.0;  ///< thermal time to flowering, °C·day
  double tdm3 = 0.0;  ///< thermal time to maturity, °C·day
  double tln = 0.0;   ///< potential number of leaves
  double k = 0.0;     ///< light extinction coefficient
  double llh = 0.0;   ///< rank of the largest leaf
  double lls = 0.0;   ///< area of the largest leaf, cm²
  double le = 0.0;    ///< leaf-expansion response threshold to water stress
  double tr = 0.0;    ///< transpiration response threshold to water stress

  std::array<double, kTraitCount> to_array() const noexcept;
  static Phenotype from_array(const std::array<double, kTraitCount>& v) noexcept;

  bool operator==(const Phenotype&) const = default;
};

/// Column names, in to_array() order.
const std::array<const char*, kTraitCount>& trait_names() noexcept;

struct TraitRange {
  double min = 0.0;
  double max = 0.0;
};

/// Box constraints on the traits.
struct PhenotypeBounds {
  std::array<TraitRange, kTraitCount> ranges;

  /// The reference trait bounds used for optimization.
  static PhenotypeBounds defaults() noexcept;

  void validate() const;
  bool contains(const Phenotype& x) const noexcept;
  /// Throws Error naming the first trait outside its interval.
  void check(const Phenotype& x) const;
  Phenotype clip(const Phenotype& x) const noexcept;
};

/// Parameters × one climate series → scalar yield (t/ha).
class Simulator {
 public:
  virtual ~Simulator() = default;
  virtual double yield(const Phenotype& x, const ClimateSeries& c) const = 0;
};

/// Deterministic toy crop model built on thermal time, a bucket water balance,
/// leaf-area dynamics and radiation-use efficiency.
class ToyCropModel final : public Simulator {
 public:
  explicit ToyCropModel(PhenotypeBounds bounds = PhenotypeBounds::defaults()) : bounds_(bounds) {}

  static constexpr double kBaseTemp = 4.8;           // °C
  static constexpr double kInitialWater = 100.0;     // mm
  static constexpr double kMaxWater = 150.0;         // mm
  static constexpr double kPsiScale = -15.0;         // ψ at FTSW = 0
  static constexpr double kStressSlope = 1.2;
  static constexpr double kLeafDensity = 0.5 * 7e-4;
  static constexpr double kLargestLeafPos = 0.55;
  static constexpr double kFullCoverLai = 3.0;
  static constexpr double kRue = 2.2;                // g/MJ
  static constexpr double kParFraction = 0.48;
  static constexpr double kHarvestIndexCap = 0.4;
  static constexpr int kFloweringWindow = 10;        // days either side of flowering
  static constexpr double kYieldScale = 0.01;        // g/m² → t/ha

  double yield(const Phenotype& x, const ClimateSeries& c) const override;

  const PhenotypeBounds& bounds() const noexcept { return bounds_; }

 private:
  PhenotypeBounds bounds_;
};

/// Wraps a simulator and counts every call; the counter is atomic so cells may be
/// evaluated from several threads.
class CountingSimulator final : public Simulator {
 public:
  explicit CountingSimulator(const Simulator& inner) : inner_(inner) {}

  double yield(const Phenotype& x, const ClimateSeries& c) const override {
    calls_.fetch_add(1, std::memory_order_relaxed);
    return inner_.yield(x, c);
  }

  std::uint64_t calls() const noexcept { return calls_.load(std::memory_order_relaxed); }
  void reset() noexcept { calls_.store(0, std::memory_order_relaxed); }

 private:
  const Simulator& inner_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

/// I×J yields, rows = phenotypes, columns = climate series.
struct YieldMatrix {
  Matrix values;
  std::vector<std::string> series_ids;

  std::size_t phenotypes() const noexcept { return values.rows(); }
  std::size_t series() const noexcept { return values.cols(); }
};

YieldMatrix yield_matrix(const Simulator& sim, const std::vector<Phenotype>& xs, const ClimateSet& climate);

/// Latin hypercube: for each trait the n values fall one per equal-width stratum.
std::vector<Phenotype> lhs_sample(const PhenotypeBounds& bounds, std::size_t n, std::uint64_t seed);

std::vector<Phenotype> read_phenotypes_csv(std::istream& in);
void write_phenotypes_csv(std::ostream& out, const std::vector<Phenotype>& xs);

YieldMatrix read_yield_matrix_csv(std::istream& in);
void write_yield_matrix_csv(std::ostream& out, const YieldMatrix& y);

}  // namespace ideo
