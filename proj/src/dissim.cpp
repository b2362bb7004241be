#include "ideo/dissim.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>

#include <json.hpp>

namespace ideo {

const char* to_string(DissimKind k) noexcept {
  switch (k) {
    case DissimKind::tmin: return "tmin";
    case DissimKind::tmax: return "tmax";
    case DissimKind::rad: return "rad";
    case DissimKind::etp: return "etp";
    case DissimKind::rain: return "rain";
    case DissimKind::model: return "model";
    case DissimKind::normalized: return "normalized";
    case DissimKind::combined: return "combined";
  }
  return "?";
}

DissimilarityMatrix::DissimilarityMatrix(Matrix values, DissimKind kind)
    : values_(std::move(values)), kind_(kind) {
  const std::size_t n = values_.rows();
  if (values_.cols() != n) throw Error("dissimilarity matrix must be square");
  for (std::size_t i = 0; i < n; ++i) {
    if (values_(i, i) != 0.0) {
      throw Error("dissimilarity matrix: nonzero diagonal at " + std::to_string(i));
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double v = values_(i, j);
      if (!std::isfinite(v) || v < 0.0) {
        throw Error("dissimilarity matrix: entries must be finite and >= 0");
      }
      if (j > i && std::abs(v - values_(j, i)) > 1e-12 * std::max(1.0, std::abs(v))) {
        throw Error("dissimilarity matrix: asymmetric at (" + std::to_string(i) + ", " +
                    std::to_string(j) + ")");
      }
    }
  }
}

DissimilarityMatrix DissimilarityMatrix::permuted(const std::vector<std::size_t>& perm) const {
  const std::size_t n = size();
  if (perm.size() != n) throw Error("permutation size mismatch");
  Matrix m(n, n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = 0; b < n; ++b) m(a, b) = values_(perm[a], perm[b]);
  }
  return DissimilarityMatrix(std::move(m), kind_);
}

void DissimWeights::validate() const {
  const double ws[] = {tmin, tmax, rad, etp, rain, model};
  double sum = 0.0;
  for (double w : ws) {
    if (!std::isfinite(w) || w < 0.0) throw Error("dissimilarity weights must be >= 0");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    throw Error("dissimilarity weights must sum to 1 (got " + format_double(sum) + ")");
  }
}

DissimWeights DissimWeights::from_json(const std::string& text) {
  DissimWeights w;
  try {
    auto j = nlohmann::json::parse(text);
    w.tmin = j.value("tmin", w.tmin);
    w.tmax = j.value("tmax", w.tmax);
    w.rad = j.value("rad", w.rad);
    w.etp = j.value("etp", w.etp);
    w.rain = j.value("rain", w.rain);
    w.model = j.value("model", w.model);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("weights JSON: ") + e.what());
  }
  w.validate();
  return w;
}

std::string DissimWeights::to_json() const {
  nlohmann::json j{{"tmin", tmin}, {"tmax", tmax}, {"rad", rad},
                   {"etp", etp},   {"rain", rain}, {"model", model}};
  return j.dump(2);
}

double dtw_distance(std::span<const double> a, std::span<const double> b, std::size_t window) {
  const std::size_t n = a.size();
  if (n == 0 || b.empty()) throw Error("dtw_distance: empty sequence");
  if (b.size() != n) throw Error("dtw_distance: sequences differ in length");
  constexpr double inf = std::numeric_limits<double>::infinity();
  const std::size_t w = std::min(window, n - 1);

  std::vector<double> prev(n, inf), cur(n, inf);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t jlo = i > w ? i - w : 0;
    const std::size_t jhi = std::min(n - 1, i + w);
    if (i > 0 && jlo > 0) cur[jlo - 1] = inf;
    for (std::size_t j = jlo; j <= jhi; ++j) {
      const double cost = std::abs(a[i] - b[j]);
      double best;
      if (i == 0 && j == 0) {
        best = 0.0;
      } else {
        best = inf;
        if (i > 0) best = std::min(best, prev[j]);
        if (j > 0) best = std::min(best, cur[j - 1]);
        if (i > 0 && j > 0) best = std::min(best, prev[j - 1]);
      }
      cur[j] = cost + best;
    }
    // Cells outside this row's band must read as unreachable in the next row.
    if (jhi + 1 < n) cur[jhi + 1] = inf;
    std::swap(prev, cur);
  }
  return prev[n - 1];
}

namespace {

DissimKind kind_of(WeatherVar v) {
  return static_cast<DissimKind>(static_cast<int>(v));
}

}  // namespace

std::array<DissimilarityMatrix, kWeatherVarCount> variable_dissim(const ClimateSet& climate,
                                                                   const DtwConfig& cfg) {
  const std::size_t n = climate.size();
  std::array<DissimilarityMatrix, kWeatherVarCount> out;
  for (std::size_t v = 0; v < kWeatherVarCount; ++v) {
    const auto var = static_cast<WeatherVar>(v);
    std::vector<std::vector<double>> seqs;
    seqs.reserve(n);
    for (const auto& s : climate.series()) seqs.push_back(s.variable(var));
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const double d = dtw_distance(seqs[i], seqs[j], cfg.window_for(var));
        m(i, j) = d;
        m(j, i) = d;
      }
    }
    out[v] = DissimilarityMatrix(std::move(m), kind_of(var));
  }
  return out;
}

DissimilarityMatrix model_dissim(const Matrix& y) {
  const std::size_t l = y.rows();
  const std::size_t n = y.cols();
  if (l == 0) throw Error("model_dissim: empty phenotype basis");
  if (n < 2) throw Error("model_dissim: need at least 2 climate series");
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = 0.0;
      for (std::size_t k = 0; k < l; ++k) {
        const double diff = y(k, i) - y(k, j);
        acc += diff * diff;
      }
      const double d = std::sqrt(acc / static_cast<double>(l));
      m(i, j) = d;
      m(j, i) = d;
    }
  }
  return DissimilarityMatrix(std::move(m), DissimKind::model);
}

DissimilarityMatrix cosine_normalize(const DissimilarityMatrix& d) {
  const std::size_t n = d.size();
  const double dn = static_cast<double>(n);
  std::vector<double> row_mean(n, 0.0);
  double grand = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < n; ++k) row_mean[i] += d(i, k);
    grand += row_mean[i];
    row_mean[i] /= dn;
  }
  grand /= dn * dn;

  Matrix s(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      s(i, j) = -0.5 * (d(i, j) - row_mean[i] - row_mean[j] + grand);
    }
  }

  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double sii = s(i, i);
      const double sjj = s(j, j);
      double v = 0.0;
      if (sii > kEpsNum && sjj > kEpsNum) {
        // Averaging the two triangles keeps the output exactly symmetric.
        const double sij = 0.5 * (s(i, j) + s(j, i));
        const double sbar = std::clamp(sij / std::sqrt(sii * sjj), -1.0, 1.0);
        v = 2.0 - 2.0 * sbar;
      }
      out(i, j) = v;
      out(j, i) = v;
    }
  }
  return DissimilarityMatrix(std::move(out), DissimKind::normalized);
}

DissimilarityMatrix combine(const std::array<DissimilarityMatrix, kWeatherVarCount>& variables,
                            const DissimilarityMatrix& model, const DissimWeights& w) {
  w.validate();
  const std::size_t n = model.size();
  for (const auto& m : variables) {
    if (m.size() != n) throw Error("combine: matrices differ in size");
  }
  const std::array<double, kWeatherVarCount> wv{w.tmin, w.tmax, w.rad, w.etp, w.rain};
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double acc = w.model * model(i, j);
      for (std::size_t v = 0; v < kWeatherVarCount; ++v) acc += wv[v] * variables[v](i, j);
      out(i, j) = acc;
      out(j, i) = acc;
    }
  }
  return DissimilarityMatrix(std::move(out), DissimKind::combined);
}

DissimPipeline build_dissimilarity(const ClimateSet& climate, const Matrix& basis_yields,
                                   const DtwConfig& dtw, const DissimWeights& w) {
  if (basis_yields.cols() != climate.size()) {
    throw Error("basis yields have " + std::to_string(basis_yields.cols()) +
                " columns but the climate set has " + std::to_string(climate.size()) + " series");
  }
  DissimPipeline p;
  p.raw_variables = variable_dissim(climate, dtw);
  p.raw_model = model_dissim(basis_yields);
  for (std::size_t v = 0; v < kWeatherVarCount; ++v) {
    p.normalized_variables[v] = cosine_normalize(p.raw_variables[v]);
  }
  p.normalized_model = cosine_normalize(p.raw_model);
  p.combined = combine(p.normalized_variables, p.normalized_model, w);
  return p;
}

void write_dissim_csv(std::ostream& out, const DissimilarityMatrix& d,
                      const std::vector<std::string>& ids) {
  if (ids.size() != d.size()) throw Error("write_dissim_csv: id count mismatch");
  out << "id";
  for (const auto& id : ids) out << ',' << id;
  out << '\n';
  for (std::size_t i = 0; i < d.size(); ++i) {
    out << ids[i];
    for (std::size_t j = 0; j < d.size(); ++j) out << ',' << format_double(d(i, j));
    out << '\n';
  }
}

DissimilarityMatrix read_dissim_csv(std::istream& in, std::vector<std::string>& ids) {
  std::string line;
  if (!std::getline(in, line)) throw Error("dissimilarity CSV: empty input");
  auto header = split_csv(line);
  if (header.size() < 2 || header[0] != "id") {
    throw Error("dissimilarity CSV: header must be 'id,<series ids...>'");
  }
  ids.clear();
  for (std::size_t j = 1; j < header.size(); ++j) ids.emplace_back(header[j]);
  const std::size_t n = ids.size();
  Matrix m(n, n);
  std::size_t r = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    auto f = split_csv(line);
    if (r >= n || f.size() != n + 1) throw Error("dissimilarity CSV: malformed row " + std::to_string(r + 1));
    if (f[0] != ids[r]) throw Error("dissimilarity CSV: row label does not match header order");
    for (std::size_t j = 0; j < n; ++j) m(r, j) = parse_double(f[j + 1], "dissimilarity CSV");
    ++r;
  }
  if (r != n) throw Error("dissimilarity CSV: expected " + std::to_string(n) + " rows");
  return DissimilarityMatrix(std::move(m), DissimKind::combined);
}

}  // namespace ideo
