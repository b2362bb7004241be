#include "ideo/reconstruct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <json.hpp>

namespace ideo {

const char* to_string(ResidualMethod m) noexcept {
  return m == ResidualMethod::naive ? "naive" : "rescaled";
}

ResidualMethod residual_method_from_string(const std::string& s) {
  if (s == "naive") return ResidualMethod::naive;
  if (s == "rescaled") return ResidualMethod::rescaled;
  throw Error("unknown residual method '" + s + "' (expected naive|rescaled)");
}

std::vector<std::size_t> ResidualTable::class_sizes() const {
  std::vector<std::size_t> out;
  out.reserve(classes.size());
  for (const auto& c : classes) out.push_back(c.members.size());
  return out;
}

std::vector<std::size_t> ResidualTable::representatives() const {
  std::vector<std::size_t> out;
  out.reserve(classes.size());
  for (const auto& c : classes) out.push_back(c.representative);
  return out;
}

double representative_scale(std::span<const double> y_rep, std::span<const std::size_t> class_sizes) {
  if (y_rep.size() != class_sizes.size()) throw Error("representative_scale: size mismatch");
  double n = 0.0;
  double mean = 0.0;
  for (std::size_t k = 0; k < y_rep.size(); ++k) {
    n += static_cast<double>(class_sizes[k]);
    mean += static_cast<double>(class_sizes[k]) * y_rep[k];
  }
  if (n <= 0.0) throw Error("representative_scale: empty classes");
  mean /= n;
  double var = 0.0;
  for (std::size_t k = 0; k < y_rep.size(); ++k) {
    const double d = y_rep[k] - mean;
    var += static_cast<double>(class_sizes[k]) * d * d;
  }
  return std::sqrt(var / n);
}

ResidualTable compute_residuals(const Matrix& y, const ClusterModel& model, ResidualMethod method) {
  const std::size_t l = y.rows();
  const std::size_t n = y.cols();
  if (l == 0) throw Error("compute_residuals: empty phenotype basis");
  if (model.assignment.size() != n) {
    throw Error("compute_residuals: yield columns do not match the clustered series");
  }
  const std::size_t K = model.k();
  if (model.representatives.size() != K) throw Error("compute_residuals: missing representatives");

  ResidualTable t;
  t.method = method;
  t.total = n;
  t.classes.resize(K);
  for (std::size_t k = 0; k < K; ++k) {
    t.classes[k].representative = model.representatives[k];
    t.classes[k].members = model.members(k);
    if (t.classes[k].members.empty()) {
      throw Error("compute_residuals: class " + std::to_string(k) + " is empty");
    }
    if (model.assignment[model.representatives[k]] != k) {
      throw Error("compute_residuals: representative of class " + std::to_string(k) +
                  " is not a member");
    }
  }

  const double dl = static_cast<double>(l);
  for (auto& c : t.classes) {
    c.naive.assign(c.members.size(), 0.0);
    for (std::size_t i = 0; i < l; ++i) {
      const double at_rep = y(i, c.representative);
      for (std::size_t j = 0; j < c.members.size(); ++j) c.naive[j] += y(i, c.members[j]) - at_rep;
    }
    for (auto& v : c.naive) v /= dl;
  }

  if (method == ResidualMethod::rescaled) {
    const auto sizes = t.class_sizes();
    std::vector<double> rep(K);
    std::vector<std::size_t> kept;
    t.basis_scales.resize(l);
    for (std::size_t i = 0; i < l; ++i) {
      for (std::size_t k = 0; k < K; ++k) rep[k] = y(i, t.classes[k].representative);
      t.basis_scales[i] = representative_scale(rep, sizes);
      if (t.basis_scales[i] > kEpsNum) {
        kept.push_back(i);
      } else {
        t.skipped_basis.push_back(i);
      }
    }
    if (kept.empty()) {
      throw Error("compute_residuals: every basis phenotype has a degenerate representative scale");
    }
    const double dk = static_cast<double>(kept.size());
    for (auto& c : t.classes) {
      c.rescaled.assign(c.members.size(), 0.0);
      for (auto i : kept) {
        const double at_rep = y(i, c.representative);
        const double inv = 1.0 / t.basis_scales[i];
        for (std::size_t j = 0; j < c.members.size(); ++j) {
          c.rescaled[j] += (y(i, c.members[j]) - at_rep) * inv;
        }
      }
      for (auto& v : c.rescaled) v /= dk;
    }
  }
  return t;
}

ReconstructedYield reconstruct_sample(std::span<const double> y_rep, const ResidualTable& table) {
  const std::size_t K = table.k();
  if (y_rep.size() != K) {
    throw Error("reconstruct_sample: got " + std::to_string(y_rep.size()) +
                " representative yields for " + std::to_string(K) + " classes");
  }
  ReconstructedYield out;
  bool rescaled = table.method == ResidualMethod::rescaled;
  double scale = 0.0;
  if (rescaled) {
    const auto sizes = table.class_sizes();
    scale = representative_scale(y_rep, sizes);
    if (!(scale > kEpsNum)) {
      rescaled = false;
      out.naive_fallback = true;
    }
  }
  const double w = 1.0 / static_cast<double>(table.total);
  out.atoms.reserve(table.total);
  out.labels.reserve(table.total);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& c = table.classes[k];
    for (std::size_t j = 0; j < c.members.size(); ++j) {
      double v = rescaled ? y_rep[k] + scale * c.rescaled[j] : y_rep[k] + c.naive[j];
      if (v < 0.0) {
        v = 0.0;
        ++out.clamped;
      }
      out.atoms.push_back({v, w});
      out.labels.push_back(k);
    }
  }
  return out;
}

namespace {

void check_sample(std::size_t n, const char* what) {
  if (n == 0) throw Error(std::string(what) + ": empty sample");
}

void check_alpha(double alpha, const char* what) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(std::string(what) + ": alpha must be in (0, 1], got " + format_double(alpha));
  }
}

std::vector<Atom> sorted_atoms(std::span<const Atom> s) {
  std::vector<Atom> v(s.begin(), s.end());
  std::stable_sort(v.begin(), v.end(), [](const Atom& a, const Atom& b) { return a.value < b.value; });
  return v;
}

std::vector<Atom> equal_atoms(std::span<const double> values) {
  std::vector<Atom> out;
  out.reserve(values.size());
  const double w = values.empty() ? 0.0 : 1.0 / static_cast<double>(values.size());
  for (double v : values) out.push_back({v, w});
  return out;
}

bool equal_weights(std::span<const Atom> s) {
  const double w0 = s.front().weight;
  return std::all_of(s.begin(), s.end(),
                     [&](const Atom& a) { return std::abs(a.weight - w0) <= 1e-12 * std::abs(w0); });
}

double total_weight(std::span<const Atom> s) {
  double total = 0.0;
  for (const auto& a : s) {
    if (!(a.weight >= 0.0)) throw Error("weighted sample: negative weight");
    total += a.weight;
  }
  if (!(total > 0.0)) throw Error("weighted sample: zero total weight");
  return total;
}

// ⌈αn⌉, guarding against α·n landing a hair above an integer.
std::size_t tail_count(double alpha, std::size_t n) {
  const double x = alpha * static_cast<double>(n);
  auto m = static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, x)));
  return std::clamp<std::size_t>(m, 1, n);
}

}  // namespace

double expectation(std::span<const Atom> s) {
  check_sample(s.size(), "expectation");
  const double total = total_weight(s);
  double acc = 0.0;
  for (const auto& a : s) acc += a.weight * a.value;
  return acc / total;
}

double expectation(std::span<const double> values) {
  check_sample(values.size(), "expectation");
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double quantile(std::span<const Atom> s, double alpha) {
  check_sample(s.size(), "quantile");
  check_alpha(alpha, "quantile");
  auto v = sorted_atoms(s);
  if (equal_weights(v)) return v[tail_count(alpha, v.size()) - 1].value;
  const double target = alpha * total_weight(v);
  double cum = 0.0;
  for (const auto& a : v) {
    cum += a.weight;
    if (cum >= target * (1.0 - 1e-12)) return a.value;
  }
  return v.back().value;
}

double quantile(std::span<const double> values, double alpha) {
  auto atoms = equal_atoms(values);
  return quantile(std::span<const Atom>(atoms), alpha);
}

double cvar(std::span<const Atom> s, double alpha) {
  check_sample(s.size(), "cvar");
  check_alpha(alpha, "cvar");
  auto v = sorted_atoms(s);
  if (equal_weights(v)) {
    const std::size_t m = tail_count(alpha, v.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < m; ++i) acc += v[i].value;
    return acc / static_cast<double>(m);
  }
  const double target = alpha * total_weight(v);
  double mass = 0.0;
  double acc = 0.0;
  for (const auto& a : v) {
    const double take = std::min(a.weight, target - mass);
    if (take <= 0.0) break;
    acc += take * a.value;
    mass += take;
  }
  return acc / mass;
}

double cvar(std::span<const double> values, double alpha) {
  auto atoms = equal_atoms(values);
  return cvar(std::span<const Atom>(atoms), alpha);
}

std::vector<Atom> subset_sample(std::span<const double> y_rep, std::span<const std::size_t> class_sizes) {
  if (y_rep.size() != class_sizes.size()) throw Error("subset_sample: size mismatch");
  const double n = static_cast<double>(std::accumulate(class_sizes.begin(), class_sizes.end(), std::size_t{0}));
  std::vector<Atom> out;
  for (std::size_t k = 0; k < y_rep.size(); ++k) {
    out.push_back({y_rep[k], static_cast<double>(class_sizes[k]) / n});
  }
  return out;
}

GaussianEstimate gaussian_estimate(std::span<const double> y_rep,
                                   std::span<const std::size_t> class_sizes, double alpha) {
  check_alpha(alpha, "gaussian_estimate");
  const auto atoms = subset_sample(y_rep, class_sizes);
  GaussianEstimate g;
  g.mean = expectation(std::span<const Atom>(atoms));
  g.stddev = representative_scale(y_rep, class_sizes);
  if (alpha >= 1.0 || g.stddev <= 0.0) {
    g.quantile = alpha >= 1.0 ? std::numeric_limits<double>::infinity() : g.mean;
    g.cvar = g.mean;
    return g;
  }
  const boost::math::normal_distribution<double> standard(0.0, 1.0);
  const double z = boost::math::quantile(standard, alpha);
  g.quantile = g.mean + g.stddev * z;
  g.cvar = g.mean - g.stddev * boost::math::pdf(standard, z) / alpha;
  return g;
}

std::string residual_table_to_json(const ResidualTable& t) {
  nlohmann::json j;
  j["method"] = to_string(t.method);
  j["total"] = t.total;
  j["basis_scales"] = t.basis_scales;
  j["skipped_basis"] = t.skipped_basis;
  j["classes"] = nlohmann::json::array();
  for (const auto& c : t.classes) {
    nlohmann::json jc{{"representative", c.representative},
                      {"members", c.members},
                      {"naive", c.naive}};
    if (!c.rescaled.empty()) jc["rescaled"] = c.rescaled;
    j["classes"].push_back(std::move(jc));
  }
  return j.dump(2);
}

ResidualTable residual_table_from_json(const std::string& text) {
  ResidualTable t;
  try {
    auto j = nlohmann::json::parse(text);
    t.method = residual_method_from_string(j.at("method").get<std::string>());
    t.total = j.at("total").get<std::size_t>();
    t.basis_scales = j.value("basis_scales", std::vector<double>{});
    t.skipped_basis = j.value("skipped_basis", std::vector<std::size_t>{});
    for (const auto& jc : j.at("classes")) {
      ClassResiduals c;
      c.representative = jc.at("representative").get<std::size_t>();
      c.members = jc.at("members").get<std::vector<std::size_t>>();
      c.naive = jc.at("naive").get<std::vector<double>>();
      c.rescaled = jc.value("rescaled", std::vector<double>{});
      if (c.naive.size() != c.members.size() ||
          (t.method == ResidualMethod::rescaled && c.rescaled.size() != c.members.size())) {
        throw Error("residual JSON: residual vector length differs from class size");
      }
      t.classes.push_back(std::move(c));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("residual JSON: ") + e.what());
  }
  std::size_t sum = 0;
  for (const auto& c : t.classes) sum += c.members.size();
  if (sum != t.total || t.classes.empty()) throw Error("residual JSON: class sizes do not sum to total");
  return t;
}

}  // namespace ideo
