#include "ideo/cropmodel.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <string>

namespace ideo {

std::array<double, kTraitCount> Phenotype::to_array() const noexcept {
  return {tdf1, tdm3, tln, k, llh, lls, le, tr};
}

Phenotype Phenotype::from_array(const std::array<double, kTraitCount>& v) noexcept {
  return {v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]};
}

const std::array<const char*, kTraitCount>& trait_names() noexcept {
  static constexpr std::array<const char*, kTraitCount> names{"tdf1", "tdm3", "tln", "k",
                                                              "llh",  "lls",  "le",  "tr"};
  return names;
}

PhenotypeBounds PhenotypeBounds::defaults() noexcept {
  return {{{{765.0, 907.0},
            {1540.0, 1830.0},
            {22.2, 36.7},
            {0.780, 0.950},
            {13.5, 20.6},
            {334.0, 670.0},
            {-15.6, -2.31},
            {-14.2, -5.81}}}};
}

void PhenotypeBounds::validate() const {
  for (std::size_t i = 0; i < kTraitCount; ++i) {
    const auto& r = ranges[i];
    if (!std::isfinite(r.min) || !std::isfinite(r.max) || !(r.min < r.max)) {
      throw Error(std::string("bounds for trait '") + trait_names()[i] + "' need min < max");
    }
  }
}

bool PhenotypeBounds::contains(const Phenotype& x) const noexcept {
  const auto v = x.to_array();
  for (std::size_t i = 0; i < kTraitCount; ++i) {
    if (!std::isfinite(v[i]) || v[i] < ranges[i].min || v[i] > ranges[i].max) return false;
  }
  return true;
}

void PhenotypeBounds::check(const Phenotype& x) const {
  const auto v = x.to_array();
  for (std::size_t i = 0; i < kTraitCount; ++i) {
    if (!std::isfinite(v[i]) || v[i] < ranges[i].min || v[i] > ranges[i].max) {
      throw Error(std::string("trait '") + trait_names()[i] + "' = " + format_double(v[i]) +
                  " outside [" + format_double(ranges[i].min) + ", " +
                  format_double(ranges[i].max) + "]");
    }
  }
}

Phenotype PhenotypeBounds::clip(const Phenotype& x) const noexcept {
  auto v = x.to_array();
  for (std::size_t i = 0; i < kTraitCount; ++i) v[i] = std::clamp(v[i], ranges[i].min, ranges[i].max);
  return Phenotype::from_array(v);
}

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

double ToyCropModel::yield(const Phenotype& x, const ClimateSeries& c) const {
  bounds_.check(x);
  const auto& days = c.days;
  const std::size_t L = days.size();
  if (L == 0) return 0.0;

  // Phenology from thermal time; day numbers are 1-based.
  std::size_t flowering = 0;
  std::size_t maturity = L;
  double tt = 0.0;
  for (std::size_t d = 1; d <= L; ++d) {
    const auto& w = days[d - 1];
    tt += std::max(0.0, 0.5 * (w.tmin + w.tmax) - kBaseTemp);
    if (flowering == 0 && tt >= x.tdf1) flowering = d;
    if (tt >= x.tdm3) {
      maturity = d;
      break;
    }
  }
  if (flowering == 0) return 0.0;

  const double lai_max =
      kLeafDensity * x.tln * x.lls * (1.0 - std::abs(x.llh / x.tln - kLargestLeafPos));
  auto potential_lai = [&](std::size_t d) {
    if (d <= flowering) {
      return flowering == 1 ? lai_max
                            : lai_max * static_cast<double>(d - 1) / static_cast<double>(flowering - 1);
    }
    if (d <= maturity) {
      return lai_max * static_cast<double>(maturity - d) / static_cast<double>(maturity - flowering);
    }
    return 0.0;
  };

  std::vector<double> s_tr(L);
  double water = kInitialWater;
  double sum_le = 0.0;
  double biomass = 0.0;
  for (std::size_t d = 1; d <= L; ++d) {
    const auto& w = days[d - 1];
    const double psi = kPsiScale * (1.0 - water / kMaxWater);
    const double stress_le = logistic(kStressSlope * (psi - x.le));
    const double stress_tr = logistic(kStressSlope * (psi - x.tr));
    s_tr[d - 1] = stress_tr;
    sum_le += stress_le;
    const double lai = potential_lai(d) * (sum_le / static_cast<double>(d));
    if (d <= maturity) {
      biomass += kRue * stress_tr * (1.0 - std::exp(-x.k * lai)) * kParFraction * w.rad;
    }
    const double demand = w.etp * std::min(1.0, lai / kFullCoverLai) * stress_tr;
    water = std::clamp(water + w.rain - demand, 0.0, kMaxWater);
  }

  const std::size_t lo = flowering > static_cast<std::size_t>(kFloweringWindow)
                             ? flowering - kFloweringWindow
                             : 1;
  const std::size_t hi = std::min(L, flowering + kFloweringWindow);
  double sum_tr = 0.0;
  for (std::size_t d = lo; d <= hi; ++d) sum_tr += s_tr[d - 1];
  const double harvest_index =
      kHarvestIndexCap * std::sqrt(sum_tr / static_cast<double>(hi - lo + 1));
  return kYieldScale * harvest_index * biomass;
}

YieldMatrix yield_matrix(const Simulator& sim, const std::vector<Phenotype>& xs,
                         const ClimateSet& climate) {
  if (xs.empty()) throw Error("yield_matrix: no phenotypes");
  YieldMatrix y{Matrix(xs.size(), climate.size()), climate.ids()};
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t j = 0; j < climate.size(); ++j) {
      try {
        y.values(i, j) = sim.yield(xs[i], climate[j]);
      } catch (const Error& e) {
        throw Error("yield_matrix cell (" + std::to_string(i) + ", " + std::to_string(j) +
                    "): " + e.what());
      }
    }
  }
  return y;
}

std::vector<Phenotype> lhs_sample(const PhenotypeBounds& bounds, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw Error("lhs_sample: n must be at least 1");
  bounds.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::array<double, kTraitCount>> pts(n);
  std::vector<std::size_t> strata(n);
  const double dn = static_cast<double>(n);
  for (std::size_t t = 0; t < kTraitCount; ++t) {
    std::iota(strata.begin(), strata.end(), std::size_t{0});
    std::shuffle(strata.begin(), strata.end(), rng);
    const auto [lo, hi] = bounds.ranges[t];
    const double width = (hi - lo) / dn;
    for (std::size_t i = 0; i < n; ++i) {
      const double s = static_cast<double>(strata[i]);
      const double stratum_lo = lo + s * width;
      const double stratum_hi = lo + (s + 1.0) * width;
      double v = stratum_lo + unit(rng) * width;
      // Keep rounding from pushing a value into the next stratum.
      if (v >= stratum_hi) v = std::nextafter(stratum_hi, stratum_lo);
      pts[i][t] = std::clamp(v, lo, hi);
    }
  }
  std::vector<Phenotype> out;
  out.reserve(n);
  for (const auto& p : pts) out.push_back(Phenotype::from_array(p));
  return out;
}

std::vector<Phenotype> read_phenotypes_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("phenotype CSV: empty input");
  auto header = split_csv(line);
  if (header.size() != kTraitCount) throw Error("phenotype CSV: expected 8 columns");
  for (std::size_t i = 0; i < kTraitCount; ++i) {
    if (header[i] != trait_names()[i]) {
      throw Error(std::string("phenotype CSV: column ") + std::to_string(i + 1) + " must be '" +
                  trait_names()[i] + "'");
    }
  }
  std::vector<Phenotype> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv(line);
    if (f.size() != kTraitCount) {
      throw Error("phenotype CSV line " + std::to_string(lineno) + ": expected 8 fields");
    }
    std::array<double, kTraitCount> v{};
    for (std::size_t i = 0; i < kTraitCount; ++i) {
      v[i] = parse_double(f[i], "phenotype CSV line " + std::to_string(lineno) + " " + trait_names()[i]);
    }
    out.push_back(Phenotype::from_array(v));
  }
  return out;
}

void write_phenotypes_csv(std::ostream& out, const std::vector<Phenotype>& xs) {
  const auto& names = trait_names();
  for (std::size_t i = 0; i < kTraitCount; ++i) out << (i ? "," : "") << names[i];
  out << '\n';
  for (const auto& x : xs) {
    const auto v = x.to_array();
    for (std::size_t i = 0; i < kTraitCount; ++i) out << (i ? "," : "") << format_double(v[i]);
    out << '\n';
  }
}

YieldMatrix read_yield_matrix_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("yield CSV: empty input");
  auto header = split_csv(line);
  if (header.size() < 2 || header[0] != "phenotype") {
    throw Error("yield CSV: header must be 'phenotype,<series ids...>'");
  }
  YieldMatrix y;
  for (std::size_t j = 1; j < header.size(); ++j) y.series_ids.emplace_back(header[j]);
  std::vector<double> data;
  std::size_t rows = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv(line);
    if (f.size() != header.size()) {
      throw Error("yield CSV line " + std::to_string(lineno) + ": wrong field count");
    }
    for (std::size_t j = 1; j < f.size(); ++j) {
      const double v = parse_double(f[j], "yield CSV line " + std::to_string(lineno));
      if (!std::isfinite(v) || v < 0.0) {
        throw Error("yield CSV line " + std::to_string(lineno) + ": yields must be finite and >= 0");
      }
      data.push_back(v);
    }
    ++rows;
  }
  if (rows == 0) throw Error("yield CSV: no rows");
  y.values = Matrix(rows, y.series_ids.size());
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t j = 0; j < y.series_ids.size(); ++j) {
      y.values(i, j) = data[i * y.series_ids.size() + j];
    }
  }
  return y;
}

void write_yield_matrix_csv(std::ostream& out, const YieldMatrix& y) {
  out << "phenotype";
  for (const auto& id : y.series_ids) out << ',' << id;
  out << '\n';
  for (std::size_t i = 0; i < y.values.rows(); ++i) {
    out << i;
    for (std::size_t j = 0; j < y.values.cols(); ++j) out << ',' << format_double(y.values(i, j));
    out << '\n';
  }
}

}  // namespace ideo
