#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ideo {

/// One day of weather. Temperatures in °C, radiation in MJ/m², etp and rain in mm.
struct DailyWeather {
  double tmin = 0.0;
  double tmax = 0.0;
  double rad = 0.0;
  double etp = 0.0;
  double rain = 0.0;

  bool operator==(const DailyWeather&) const = default;
};

enum class WeatherVar { tmin, tmax, rad, etp, rain };
inline constexpr std::size_t kWeatherVarCount = 5;
const char* to_string(WeatherVar v) noexcept;

/// A single growing season (site_year) of daily weather.
struct ClimateSeries {
  std::string id;
  std::vector<DailyWeather> days;

  std::size_t length() const noexcept { return days.size(); }
  std::vector<double> variable(WeatherVar v) const;

  bool operator==(const ClimateSeries&) const = default;
};

/// An immutable collection of N ≥ 2 equal-length climate series with unique ids.
class ClimateSet {
 public:
  explicit ClimateSet(std::vector<ClimateSeries> series);

  std::size_t size() const noexcept { return series_.size(); }
  std::size_t length() const noexcept { return series_.front().length(); }
  const ClimateSeries& operator[](std::size_t i) const { return series_[i]; }
  const std::vector<ClimateSeries>& series() const noexcept { return series_; }
  std::vector<std::string> ids() const;

  /// Subset by index, keeping the given order.
  ClimateSet subset(const std::vector<std::size_t>& indices) const;

  bool operator==(const ClimateSet&) const = default;

 private:
  std::vector<ClimateSeries> series_;
};

/// Throws Error if a series breaks the per-day invariants or has the wrong length.
void validate_series(const ClimateSeries& s, std::size_t expected_length);

ClimateSet read_climate_csv(std::istream& in, std::size_t expected_length);
ClimateSet load_climate(const std::string& path, std::size_t expected_length);
void write_climate_csv(std::ostream& out, const ClimateSet& set);
void save_climate(const std::string& path, const ClimateSet& set);

struct SiteParams {
  std::string name;
  double mean_temp = 18.0;  ///< season-average daily mean temperature, °C
  double amplitude = 8.0;   ///< peak-to-mean seasonal swing, °C (> 0)
  double wet_prob = 0.25;   ///< base probability of a wet day, in [0, 1]
  double mean_rain = 6.0;   ///< mean depth on wet days, mm (> 0)
};

struct GeneratorConfig {
  std::size_t length = 180;
  std::size_t years_per_site = 38;
  int start_year = 1975;
  std::vector<SiteParams> sites;

  /// Five contrasted sites; with the default 38 years this yields N = 190.
  static GeneratorConfig defaults();
};

/// Deterministic synthetic climate for (config, seed). Each series draws from
/// its own stream derived from (seed, site index, year index).
ClimateSet generate_climate(const GeneratorConfig& cfg, std::uint64_t seed);

GeneratorConfig generator_config_from_json(const std::string& json_text);
std::string generator_config_to_json(const GeneratorConfig& cfg);

}  // namespace ideo
