#include "ideo/climate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "ideo/common.hpp"

namespace ideo {

const char* to_string(WeatherVar v) noexcept {
  switch (v) {
    case WeatherVar::tmin: return "tmin";
    case WeatherVar::tmax: return "tmax";
    case WeatherVar::rad: return "rad";
    case WeatherVar::etp: return "etp";
    case WeatherVar::rain: return "rain";
  }
  return "?";
}

std::vector<double> ClimateSeries::variable(WeatherVar v) const {
  std::vector<double> out;
  out.reserve(days.size());
  for (const auto& d : days) {
    switch (v) {
      case WeatherVar::tmin: out.push_back(d.tmin); break;
      case WeatherVar::tmax: out.push_back(d.tmax); break;
      case WeatherVar::rad: out.push_back(d.rad); break;
      case WeatherVar::etp: out.push_back(d.etp); break;
      case WeatherVar::rain: out.push_back(d.rain); break;
    }
  }
  return out;
}

namespace {

std::string where(const std::string& id, std::size_t day) {
  return "series '" + id + "', day " + std::to_string(day);
}

}  // namespace

void validate_series(const ClimateSeries& s, std::size_t expected_length) {
  if (s.days.size() != expected_length) {
    throw Error("series '" + s.id + "': length " + std::to_string(s.days.size()) +
                " differs from expected " + std::to_string(expected_length));
  }
  for (std::size_t t = 0; t < s.days.size(); ++t) {
    const auto& d = s.days[t];
    if (!std::isfinite(d.tmin) || !std::isfinite(d.tmax) || !std::isfinite(d.rad) ||
        !std::isfinite(d.etp) || !std::isfinite(d.rain)) {
      throw Error(where(s.id, t + 1) + ": non-finite value");
    }
    if (d.tmax < d.tmin) throw Error(where(s.id, t + 1) + ": tmax < tmin");
    if (d.rad < 0.0) throw Error(where(s.id, t + 1) + ": negative rad");
    if (d.etp < 0.0) throw Error(where(s.id, t + 1) + ": negative etp");
    if (d.rain < 0.0) throw Error(where(s.id, t + 1) + ": negative rain");
  }
}

ClimateSet::ClimateSet(std::vector<ClimateSeries> series) : series_(std::move(series)) {
  if (series_.size() < 2) throw Error("a climate set needs at least 2 series");
  const std::size_t len = series_.front().length();
  if (len == 0) throw Error("climate series must not be empty");
  std::unordered_set<std::string> seen;
  for (const auto& s : series_) {
    validate_series(s, len);
    if (!seen.insert(s.id).second) throw Error("duplicate series id '" + s.id + "'");
  }
}

std::vector<std::string> ClimateSet::ids() const {
  std::vector<std::string> out;
  out.reserve(series_.size());
  for (const auto& s : series_) out.push_back(s.id);
  return out;
}

ClimateSet ClimateSet::subset(const std::vector<std::size_t>& indices) const {
  std::vector<ClimateSeries> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(series_.at(i));
  return ClimateSet(std::move(out));
}

ClimateSet read_climate_csv(std::istream& in, std::size_t expected_length) {
  static constexpr std::string_view kHeader = "series_id,day,tmin,tmax,rad,etp,rain";
  std::string line;
  if (!std::getline(in, line)) throw Error("climate CSV: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw Error("climate CSV: expected header '" + std::string(kHeader) + "'");

  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<std::optional<DailyWeather>>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv(line);
    if (f.size() != 7) {
      throw Error("climate CSV line " + std::to_string(lineno) + ": expected 7 fields");
    }
    std::string id(f[0]);
    const std::string ctx_id = "series '" + id + "'";
    const auto day = parse_u64(f[1], ctx_id + " line " + std::to_string(lineno) + " day");
    if (day == 0) throw Error(ctx_id + ": day index must start at 1");
    const std::string ctx = where(id, day);
    DailyWeather w{parse_double(f[2], ctx + " tmin"), parse_double(f[3], ctx + " tmax"),
                   parse_double(f[4], ctx + " rad"), parse_double(f[5], ctx + " etp"),
                   parse_double(f[6], ctx + " rain")};
    if (w.tmax < w.tmin) throw Error(ctx + ": tmax < tmin");

    auto [it, inserted] = rows.try_emplace(id);
    if (inserted) order.push_back(id);
    auto& days = it->second;
    if (days.size() < day) days.resize(day);
    if (days[day - 1]) throw Error(ctx + ": duplicate day index");
    days[day - 1] = w;
  }

  std::vector<ClimateSeries> series;
  series.reserve(order.size());
  for (const auto& id : order) {
    const auto& days = rows.at(id);
    ClimateSeries s{id, {}};
    s.days.reserve(days.size());
    for (std::size_t t = 0; t < days.size(); ++t) {
      if (!days[t]) throw Error(where(id, t + 1) + ": missing day index");
      s.days.push_back(*days[t]);
    }
    validate_series(s, expected_length);
    series.push_back(std::move(s));
  }
  return ClimateSet(std::move(series));
}

ClimateSet load_climate(const std::string& path, std::size_t expected_length) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open climate file '" + path + "'");
  return read_climate_csv(in, expected_length);
}

void write_climate_csv(std::ostream& out, const ClimateSet& set) {
  out << "series_id,day,tmin,tmax,rad,etp,rain\n";
  for (const auto& s : set.series()) {
    for (std::size_t t = 0; t < s.days.size(); ++t) {
      const auto& d = s.days[t];
      out << s.id << ',' << (t + 1) << ',' << format_double(d.tmin) << ','
          << format_double(d.tmax) << ',' << format_double(d.rad) << ','
          << format_double(d.etp) << ',' << format_double(d.rain) << '\n';
    }
  }
}

void save_climate(const std::string& path, const ClimateSet& set) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write climate file '" + path + "'");
  write_climate_csv(out, set);
}

GeneratorConfig GeneratorConfig::defaults() {
  GeneratorConfig cfg;
  cfg.sites = {
      {"avignon", 20.5, 9.0, 0.16, 8.0},
      {"blagnac", 19.5, 8.5, 0.22, 7.0},
      {"lusignan", 17.5, 8.0, 0.28, 6.0},
      {"dijon", 17.0, 9.5, 0.26, 6.5},
      {"rennes", 16.5, 7.0, 0.34, 5.0},
  };
  return cfg;
}

namespace {

void validate_generator(const GeneratorConfig& cfg) {
  if (cfg.length < 30) throw Error("generator: season length must be at least 30 days");
  if (cfg.years_per_site == 0) throw Error("generator: years_per_site must be positive");
  if (cfg.sites.empty()) throw Error("generator: no sites configured");
  for (const auto& s : cfg.sites) {
    if (!(s.amplitude > 0.0)) throw Error("generator: site '" + s.name + "' amplitude must be > 0");
    if (!(s.wet_prob >= 0.0 && s.wet_prob <= 1.0)) {
      throw Error("generator: site '" + s.name + "' wet_prob must be in [0, 1]");
    }
    if (!(s.mean_rain > 0.0)) throw Error("generator: site '" + s.name + "' mean_rain must be > 0");
    if (!std::isfinite(s.mean_temp)) throw Error("generator: site '" + s.name + "' mean_temp");
  }
}

// Season model, all constants fixed:
//   shape(t)  = sin(pi (t + 0.5) / L), a half-sine peaking mid-season
//   tmean     = mean_temp + year anomaly (N(0, 1.5) clipped to ±3) +
//               amplitude (shape - 2/pi) + U(-2.5, 2.5) - 1.5 on wet days
//   wet day   ~ Bernoulli(wet_prob * year wetness U(0.5, 1.5) * (1 + 0.4 cos(2 pi t / L))), clipped
//   rain      = Exponential(mean_rain) on wet days, else 0
//   dtr       = 11 + U(-2, 2), scaled by 0.6 on wet days; tmin/tmax = tmean ∓ dtr / 2
//   rad       = (12 + 12 shape) * (0.5 if wet) * (1 + U(-0.1, 0.1))
//   etp       = max(0, 0.0135 (tmean + 17.8) rad 0.408)
ClimateSeries generate_series(const SiteParams& site, std::size_t length, std::string id,
                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  std::normal_distribution<double> anomaly_dist(0.0, 1.5);

  const double anomaly = std::clamp(anomaly_dist(rng), -3.0, 3.0);
  const double wetness = uniform(0.5, 1.5);
  const double L = static_cast<double>(length);

  ClimateSeries s{std::move(id), {}};
  s.days.reserve(length);
  for (std::size_t t = 0; t < length; ++t) {
    const double td = static_cast<double>(t);
    const double shape = std::sin(std::numbers::pi * (td + 0.5) / L);
    const double p_wet = std::clamp(
        site.wet_prob * wetness * (1.0 + 0.4 * std::cos(2.0 * std::numbers::pi * td / L)), 0.0, 1.0);
    const double u_wet = unit(rng);
    const bool wet = site.wet_prob > 0.0 && u_wet < p_wet;
    const double u_depth = unit(rng);
    const double rain = wet ? -site.mean_rain * std::log1p(-u_depth) : 0.0;

    const double tmean = site.mean_temp + anomaly +
                         site.amplitude * (shape - 2.0 / std::numbers::pi) + uniform(-2.5, 2.5) -
                         (wet ? 1.5 : 0.0);
    const double dtr = (11.0 + uniform(-2.0, 2.0)) * (wet ? 0.6 : 1.0);
    const double rad = (12.0 + 12.0 * shape) * (wet ? 0.5 : 1.0) * (1.0 + uniform(-0.1, 0.1));
    const double etp = std::max(0.0, 0.0135 * (tmean + 17.8) * rad * 0.408);
    s.days.push_back({tmean - 0.5 * dtr, tmean + 0.5 * dtr, rad, etp, rain});
  }
  return s;
}

}  // namespace

ClimateSet generate_climate(const GeneratorConfig& cfg, std::uint64_t seed) {
  validate_generator(cfg);
  std::vector<ClimateSeries> out;
  out.reserve(cfg.sites.size() * cfg.years_per_site);
  for (std::size_t si = 0; si < cfg.sites.size(); ++si) {
    const auto& site = cfg.sites[si];
    const std::string name = site.name.empty() ? "site" + std::to_string(si) : site.name;
    for (std::size_t y = 0; y < cfg.years_per_site; ++y) {
      std::string id = name + "_" + std::to_string(cfg.start_year + static_cast<int>(y));
      out.push_back(generate_series(site, cfg.length, std::move(id), derive_seed(seed, {si, y})));
    }
  }
  return ClimateSet(std::move(out));
}

GeneratorConfig generator_config_from_json(const std::string& json_text) {
  GeneratorConfig cfg;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("generator config: ") + e.what());
  }
  try {
    cfg.length = j.value("length", cfg.length);
    cfg.years_per_site = j.value("years_per_site", cfg.years_per_site);
    cfg.start_year = j.value("start_year", cfg.start_year);
    if (j.contains("sites")) {
      for (const auto& js : j.at("sites")) {
        SiteParams s;
        s.name = js.value("name", std::string{});
        s.mean_temp = js.value("mean_temp", s.mean_temp);
        s.amplitude = js.value("amplitude", s.amplitude);
        s.wet_prob = js.value("wet_prob", s.wet_prob);
        s.mean_rain = js.value("mean_rain", s.mean_rain);
        cfg.sites.push_back(std::move(s));
      }
    } else {
      cfg.sites = GeneratorConfig::defaults().sites;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("generator config: ") + e.what());
  }
  return cfg;
}

std::string generator_config_to_json(const GeneratorConfig& cfg) {
  nlohmann::json j;
  j["length"] = cfg.length;
  j["years_per_site"] = cfg.years_per_site;
  j["start_year"] = cfg.start_year;
  j["sites"] = nlohmann::json::array();
  for (const auto& s : cfg.sites) {
    j["sites"].push_back({{"name", s.name},
                          {"mean_temp", s.mean_temp},
                          {"amplitude", s.amplitude},
                          {"wet_prob", s.wet_prob},
                          {"mean_rain", s.mean_rain}});
  }
  return j.dump(2);
}

}  // namespace ideo
