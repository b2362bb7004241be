#include "ideo/moo.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>

#include <json.hpp>

namespace ideo {

bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) noexcept {
  return a.e >= b.e && a.cvar >= b.cvar && (a.e > b.e || a.cvar > b.cvar);
}

ParetoArchive pareto_filter(std::span<const ObjectivePoint> points) {
  ParetoArchive out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    bool keep = true;
    for (std::size_t j = 0; j < points.size() && keep; ++j) {
      if (j != i && dominates(points[j], p)) keep = false;
    }
    for (std::size_t j = 0; j < i && keep; ++j) {
      if (points[j].phenotype == p.phenotype) keep = false;
    }
    if (keep) out.members.push_back(p);
  }
  std::stable_sort(out.members.begin(), out.members.end(),
                   [](const ObjectivePoint& a, const ObjectivePoint& b) {
                     return a.e > b.e || (a.e == b.e && a.cvar > b.cvar);
                   });
  return out;
}

std::vector<double> crowding_distance(std::span<const ObjectivePoint> front) {
  const std::size_t n = front.size();
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(n, 0.0);
  if (n <= 2) {
    std::fill(dist.begin(), dist.end(), inf);
    return dist;
  }
  std::vector<std::size_t> idx(n);
  for (int obj = 0; obj < 2; ++obj) {
    auto value = [&](std::size_t i) { return obj == 0 ? front[i].e : front[i].cvar; };
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return value(a) < value(b); });
    dist[idx.front()] = inf;
    dist[idx.back()] = inf;
    const double range = value(idx.back()) - value(idx.front());
    if (range <= 0.0) continue;
    for (std::size_t r = 1; r + 1 < n; ++r) {
      dist[idx[r]] += (value(idx[r + 1]) - value(idx[r - 1])) / range;
    }
  }
  return dist;
}

void prune_to_capacity(ParetoArchive& archive) {
  while (archive.members.size() > archive.capacity) {
    const auto dist = crowding_distance(archive.members);
    // Lowest distance goes; among ties the last member in archive order.
    std::size_t victim = 0;
    for (std::size_t i = 1; i < dist.size(); ++i) {
      if (dist[i] <= dist[victim]) victim = i;
    }
    archive.members.erase(archive.members.begin() + static_cast<std::ptrdiff_t>(victim));
  }
}

FullEvaluator::FullEvaluator(const ClimateSet& climate, const Simulator& sim, double alpha)
    : climate_(climate), sim_(sim), alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("alpha must be in (0, 1]");
}

ObjectivePoint FullEvaluator::evaluate(const Phenotype& x) const {
  std::vector<double> ys(climate_.size());
  for (std::size_t j = 0; j < climate_.size(); ++j) ys[j] = sim_.yield(x, climate_[j]);
  const double e = expectation(std::span<const double>(ys));
  // The tail mean never exceeds the mean; min() only absorbs rounding.
  return {x, e, std::min(e, cvar(std::span<const double>(ys), alpha_)), climate_.size()};
}

ReconstructedEvaluator::ReconstructedEvaluator(const ClimateSet& climate, const Simulator& sim,
                                               ResidualTable table, double alpha)
    : climate_(climate), sim_(sim), table_(std::move(table)), alpha_(alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("alpha must be in (0, 1]");
  if (table_.total != climate_.size()) {
    throw Error("residual table covers " + std::to_string(table_.total) +
                " series but the climate set has " + std::to_string(climate_.size()));
  }
  for (auto r : table_.representatives()) {
    if (r >= climate_.size()) throw Error("residual table representative out of range");
  }
}

ReconstructedYield ReconstructedEvaluator::reconstruct(const Phenotype& x) const {
  const auto reps = table_.representatives();
  std::vector<double> y_rep(reps.size());
  for (std::size_t k = 0; k < reps.size(); ++k) y_rep[k] = sim_.yield(x, climate_[reps[k]]);
  return reconstruct_sample(y_rep, table_);
}

ObjectivePoint ReconstructedEvaluator::evaluate(const Phenotype& x) const {
  const auto r = reconstruct(x);
  const double e = expectation(std::span<const Atom>(r.atoms));
  return {x, e, std::min(e, cvar(std::span<const Atom>(r.atoms), alpha_)), table_.k()};
}

ObjectivePoint evaluate_full(const Phenotype& x, const ClimateSet& climate, const Simulator& sim,
                             double alpha) {
  return FullEvaluator(climate, sim, alpha).evaluate(x);
}

ObjectivePoint evaluate_reconstructed(const Phenotype& x, const ClimateSet& climate,
                                      const Simulator& sim, const ResidualTable& table, double alpha) {
  return ReconstructedEvaluator(climate, sim, table, alpha).evaluate(x);
}

void OptimizerConfig::validate() const {
  if (pop_size < 2) throw Error("optimizer: population size must be at least 2");
  if (iterations < 1) throw Error("optimizer: iterations must be at least 1");
  if (!(inertia >= 0.0 && inertia < 1.0)) throw Error("optimizer: inertia must be in [0, 1)");
  if (!(c1 >= 0.0) || !(c2 >= 0.0)) throw Error("optimizer: c1 and c2 must be >= 0");
  if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0)) {
    throw Error("optimizer: mutation_rate must be in [0, 1]");
  }
  if (!(mutation_exponent > 0.0)) throw Error("optimizer: mutation_exponent must be > 0");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("optimizer: alpha must be in (0, 1]");
}

std::string BudgetReport::to_json() const {
  nlohmann::json j;
  j["strategy"] = strategy;
  j["total"] = total;
  j["evaluations"] = evaluations;
  j["breakdown"] = nlohmann::json::array();
  for (const auto& b : breakdown) j["breakdown"].push_back({{"label", b.label}, {"calls", b.calls}});
  return j.dump(2);
}

namespace {

using Vec = std::array<double, kTraitCount>;

struct Particle {
  Vec position{};
  Vec velocity{};
  ObjectivePoint current;
  ObjectivePoint best;
};

void update_archive(ParetoArchive& archive, const std::vector<Particle>& swarm) {
  std::vector<ObjectivePoint> pool = archive.members;
  for (const auto& p : swarm) pool.push_back(p.current);
  const std::size_t cap = archive.capacity;
  archive = pareto_filter(pool);
  archive.capacity = cap;
  prune_to_capacity(archive);
#ifndef NDEBUG
  for (const auto& a : archive.members) {
    for (const auto& b : archive.members) assert(!dominates(a, b));
  }
#endif
}

}  // namespace

OptimizationResult mopso_cd(const Evaluator& evaluator, const PhenotypeBounds& bounds,
                            const OptimizerConfig& cfg, const GenerationObserver& observer) {
  cfg.validate();
  bounds.validate();
  const std::size_t q = cfg.pop_size;
  const std::size_t T = cfg.iterations;

  OptimizationResult result;
  result.budget.strategy = "mopso-cd";
  result.archive.capacity = cfg.capacity();

  std::vector<Particle> swarm(q);
  const auto init = lhs_sample(bounds, q, derive_seed(cfg.seed, {0xA11CEULL}));
  for (std::size_t i = 0; i < q; ++i) {
    auto& p = swarm[i];
    p.position = init[i].to_array();
    p.velocity.fill(0.0);
    p.current = evaluator.evaluate(init[i]);
    p.best = p.current;
    result.budget.evaluations += 1;
    result.budget.total += p.current.sims_used;
  }
  update_archive(result.archive, swarm);
  if (observer) observer(0, result.archive);

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t t = 1; t <= T; ++t) {
    // Leaders come from the less crowded half of the archive.
    const auto dist = crowding_distance(result.archive.members);
    std::vector<std::size_t> order(dist.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return dist[a] > dist[b]; });
    const std::size_t top = std::max<std::size_t>(1, (order.size() + 1) / 2);

    const double progress = static_cast<double>(t - 1) / static_cast<double>(T);
    const double decay = std::pow(1.0 - progress, cfg.mutation_exponent);

    for (std::size_t i = 0; i < q; ++i) {
      auto& p = swarm[i];
      std::mt19937_64 rng(derive_seed(cfg.seed, {i, t}));
      const auto& leader =
          result.archive.members[order[std::min(top - 1, static_cast<std::size_t>(unit(rng) * top))]];
      const Vec pbest = p.best.phenotype.to_array();
      const Vec lead = leader.phenotype.to_array();
      for (std::size_t d = 0; d < kTraitCount; ++d) {
        const double r1 = unit(rng);
        const double r2 = unit(rng);
        p.velocity[d] = cfg.inertia * p.velocity[d] + cfg.c1 * r1 * (pbest[d] - p.position[d]) +
                        cfg.c2 * r2 * (lead[d] - p.position[d]);
        p.position[d] = std::clamp(p.position[d] + p.velocity[d], bounds.ranges[d].min,
                                   bounds.ranges[d].max);
      }
      if (unit(rng) < cfg.mutation_rate * decay) {
        const auto d = static_cast<std::size_t>(unit(rng) * kTraitCount) % kTraitCount;
        const auto [lo, hi] = bounds.ranges[d];
        const double range = 0.5 * (hi - lo) * decay;
        const double a = std::max(lo, p.position[d] - range);
        const double b = std::min(hi, p.position[d] + range);
        p.position[d] = a + (b - a) * unit(rng);
      }
      p.current = evaluator.evaluate(Phenotype::from_array(p.position));
      result.budget.evaluations += 1;
      result.budget.total += p.current.sims_used;
      if (!dominates(p.best, p.current)) p.best = p.current;
    }
    update_archive(result.archive, swarm);
    if (observer) observer(t, result.archive);
  }
  result.budget.breakdown.push_back({"optimizer", result.budget.total});
  return result;
}

std::vector<Phenotype> select_basis_from_front(const ParetoArchive& front, std::size_t l) {
  if (front.empty()) throw Error("select_basis_from_front: empty front");
  if (l == 0) throw Error("select_basis_from_front: basis size must be positive");
  std::vector<ObjectivePoint> sorted = front.members;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.e > b.e; });
  const std::size_t m = sorted.size();
  std::vector<Phenotype> out;
  out.reserve(l);
  if (m >= l) {
    for (std::size_t i = 0; i < l; ++i) {
      const std::size_t pos =
          l == 1 ? 0
                 : static_cast<std::size_t>(std::llround(static_cast<double>(i) *
                                                         static_cast<double>(m - 1) /
                                                         static_cast<double>(l - 1)));
      out.push_back(sorted[pos].phenotype);
    }
  } else {
    for (const auto& p : sorted) out.push_back(p.phenotype);
    for (std::size_t extra = 0; out.size() < l; ++extra) {
      out.push_back(extra % 2 == 0 ? sorted.front().phenotype : sorted.back().phenotype);
    }
  }
  return out;
}

TwoStepResult two_step(const ClimateSet& climate, const Simulator& sim, const TwoStepConfig& cfg) {
  cfg.optimizer.validate();
  cfg.weights.validate();
  cfg.bounds.validate();
  if (cfg.basis_size == 0) throw Error("two_step: basis size must be positive");
  CountingSimulator counter(sim);
  TwoStepResult out;
  auto& budget = out.result.budget;
  budget.strategy = "two-step";
  const std::uint64_t seed = cfg.optimizer.seed;
  auto mark = [&](const char* label, std::uint64_t& last) {
    budget.breakdown.push_back({label, counter.calls() - last});
    last = counter.calls();
  };
  std::uint64_t last = 0;

  // Initialization: basis yields, dissimilarities, clustering, residuals.
  out.first_basis = lhs_sample(cfg.bounds, cfg.basis_size, derive_seed(seed, {1}));
  const auto y1 = yield_matrix(counter, out.first_basis, climate);
  mark("basis_1", last);
  const auto dissim = build_dissimilarity(climate, y1.values, cfg.dtw, cfg.weights);
  ClusteringConfig ccfg = cfg.clustering;
  ccfg.seed = derive_seed(seed, {2, cfg.clustering.seed});
  out.clustering = relational_kmeans(dissim.combined, ccfg);

  // Run 1 on the uniform basis.
  OptimizerConfig ocfg = cfg.optimizer;
  ocfg.seed = derive_seed(seed, {3});
  ReconstructedEvaluator eval1(climate, counter,
                               compute_residuals(y1.values, out.clustering, cfg.method),
                               cfg.optimizer.alpha);
  auto run1 = mopso_cd(eval1, cfg.bounds, ocfg);
  budget.evaluations += run1.budget.evaluations;
  mark("optimizer_1", last);
  out.first_run = run1.archive;

  // Replace the basis with phenotypes spread along the interim front.
  out.second_basis = select_basis_from_front(run1.archive, cfg.basis_size);
  const auto y2 = yield_matrix(counter, out.second_basis, climate);
  mark("basis_2", last);

  ocfg.seed = derive_seed(seed, {4});
  ReconstructedEvaluator eval2(climate, counter,
                               compute_residuals(y2.values, out.clustering, cfg.method),
                               cfg.optimizer.alpha);
  auto run2 = mopso_cd(eval2, cfg.bounds, ocfg);
  budget.evaluations += run2.budget.evaluations;
  mark("optimizer_2", last);

  out.result.archive = std::move(run2.archive);
  budget.total = counter.calls();
  return out;
}

OptimizationResult naive_mopso(const ClimateSet& climate, const Simulator& sim,
                               const OptimizerConfig& cfg, const PhenotypeBounds& bounds) {
  CountingSimulator counter(sim);
  FullEvaluator eval(climate, counter, cfg.alpha);
  auto r = mopso_cd(eval, bounds, cfg);
  r.budget.strategy = "naive";
  r.budget.total = counter.calls();
  r.budget.breakdown = {{"optimizer", counter.calls()}};
  return r;
}

OptimizationResult random_search(const ClimateSet& climate, const Simulator& sim, std::size_t n,
                                 double alpha, std::uint64_t seed, const PhenotypeBounds& bounds) {
  if (n == 0) throw Error("random_search: n must be at least 1");
  CountingSimulator counter(sim);
  FullEvaluator eval(climate, counter, alpha);
  std::vector<ObjectivePoint> pts;
  pts.reserve(n);
  for (const auto& x : lhs_sample(bounds, n, seed)) pts.push_back(eval.evaluate(x));
  OptimizationResult r;
  r.archive = pareto_filter(pts);
  r.budget.strategy = "random";
  r.budget.total = counter.calls();
  r.budget.evaluations = n;
  r.budget.breakdown = {{"sampling", counter.calls()}};
  return r;
}

ParetoArchive rescore_full(const ParetoArchive& archive, const ClimateSet& climate,
                           const Simulator& sim, double alpha) {
  FullEvaluator eval(climate, sim, alpha);
  std::vector<ObjectivePoint> pts;
  pts.reserve(archive.size());
  for (const auto& m : archive.members) pts.push_back(eval.evaluate(m.phenotype));
  return pareto_filter(pts);
}

const char* to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::random: return "random";
    case Strategy::naive: return "naive";
    case Strategy::two_step: return "two-step";
  }
  return "?";
}

Strategy strategy_from_string(const std::string& s) {
  if (s == "random") return Strategy::random;
  if (s == "naive") return Strategy::naive;
  if (s == "two-step") return Strategy::two_step;
  throw Error("unknown strategy '" + s + "' (expected random|naive|two-step)");
}

const std::vector<BudgetPreset>& budget_presets() {
  static const std::vector<BudgetPreset> presets{
      {"very-small", 60, 12, 5, 42, 9},
      {"small", 125, 25, 5, 71, 14},
      {"medium", 500, 50, 10, 152, 30},
      {"large", 2000, 100, 20, 308, 61},
  };
  return presets;
}

const BudgetPreset& budget_preset(const std::string& name) {
  for (const auto& p : budget_presets()) {
    if (p.name == name) return p;
  }
  throw Error("unknown budget preset '" + name + "'");
}

std::uint64_t expected_budget(Strategy s, const BudgetPreset& p, std::size_t n_series,
                              std::size_t k, std::size_t basis_size) {
  const std::uint64_t n = n_series;
  switch (s) {
    case Strategy::random: return p.random_n * n;
    case Strategy::naive: return (p.naive_iterations + 1) * p.naive_pop * n;
    case Strategy::two_step:
      return 2 * basis_size * n + 2 * (p.two_step_iterations + 1) * p.two_step_pop * std::uint64_t{k};
  }
  return 0;
}

void write_archive_csv(std::ostream& out, const ParetoArchive& archive) {
  for (const auto* name : trait_names()) out << name << ',';
  out << "e,cvar,sims_used\n";
  for (const auto& m : archive.members) {
    for (double v : m.phenotype.to_array()) out << format_double(v) << ',';
    out << format_double(m.e) << ',' << format_double(m.cvar) << ',' << m.sims_used << '\n';
  }
}

ParetoArchive read_archive_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error("archive CSV: empty input");
  if (split_csv(line).size() != kTraitCount + 3) throw Error("archive CSV: expected 11 columns");
  ParetoArchive a;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    auto f = split_csv(line);
    const std::string ctx = "archive CSV line " + std::to_string(lineno);
    if (f.size() != kTraitCount + 3) throw Error(ctx + ": expected 11 fields");
    std::array<double, kTraitCount> v{};
    for (std::size_t i = 0; i < kTraitCount; ++i) v[i] = parse_double(f[i], ctx);
    a.members.push_back({Phenotype::from_array(v), parse_double(f[kTraitCount], ctx),
                         parse_double(f[kTraitCount + 1], ctx), parse_u64(f[kTraitCount + 2], ctx)});
  }
  return a;
}

}  // namespace ideo
