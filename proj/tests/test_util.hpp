#pragma once

#include <random>
#include <string>
#include <vector>

#include "ideo/climate.hpp"
#include "ideo/cropmodel.hpp"

namespace testutil {

// Warm, wet season with enough thermal time for every phenotype in the default box.
inline ideo::ClimateSeries warm_series(std::string id, std::size_t L = 180, double rain = 4.0) {
  ideo::ClimateSeries s;
  s.id = std::move(id);
  for (std::size_t d = 0; d < L; ++d) s.days.push_back({14.0, 28.0, 20.0, 4.0, rain});
  return s;
}

inline ideo::Phenotype random_phenotype(std::mt19937_64& rng,
                                        const ideo::PhenotypeBounds& b = ideo::PhenotypeBounds::defaults()) {
  std::array<double, ideo::kTraitCount> v{};
  for (std::size_t t = 0; t < ideo::kTraitCount; ++t)
    v[t] = std::uniform_real_distribution<double>(b.ranges[t].min, b.ranges[t].max)(rng);
  return ideo::Phenotype::from_array(v);
}

inline ideo::ClimateSet small_climate(std::size_t years, std::uint64_t seed) {
  auto g = ideo::GeneratorConfig::defaults();
  g.years_per_site = years;
  return ideo::generate_climate(g, seed);
}

}  // namespace testutil
