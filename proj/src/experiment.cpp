#include "ideo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include <json.hpp>

#include "ideo/io.hpp"

namespace ideo {

using nlohmann::json;

void ExperimentConfig::validate() const {
  if (replications < 1) throw Error("experiment: replications must be at least 1");
  if (budgets.empty()) throw Error("experiment: no budgets listed");
  if (strategies.empty()) throw Error("experiment: no strategies listed");
  for (const auto& b : budgets) (void)preset(b);
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error("experiment: alpha must be in (0, 1]");
  if (basis_size < 1) throw Error("experiment: basis_size must be at least 1");
  if (!(reference_multiplier > 0.0)) throw Error("experiment: reference multiplier must be > 0");
  if (reference_pop < 2) throw Error("experiment: reference population must be at least 2");
  weights.validate();
}

const BudgetPreset& ExperimentConfig::preset(const std::string& name) const {
  for (const auto& p : custom_presets) {
    if (p.name == name) return p;
  }
  return budget_preset(name);
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  ExperimentConfig c;
  try {
    const auto j = json::parse(text);
    if (j.contains("climate")) {
      const auto& jc = j.at("climate");
      if (jc.contains("file")) c.climate_file = jc.at("file").get<std::string>();
      c.climate_length = jc.value("length", c.climate_length);
      if (jc.contains("seed")) c.climate_seed = jc.at("seed").get<std::uint64_t>();
      if (jc.contains("generator")) c.generator = generator_config_from_json(jc.at("generator").dump());
    }
    if (j.contains("budgets")) c.budgets = j.at("budgets").get<std::vector<std::string>>();
    for (const auto& jp : j.value("presets", json::array())) {
      BudgetPreset p;
      p.name = jp.at("name").get<std::string>();
      p.random_n = jp.value("random_n", std::size_t{0});
      if (jp.contains("naive")) {
        p.naive_iterations = jp.at("naive").at("iterations").get<std::size_t>();
        p.naive_pop = jp.at("naive").at("pop_size").get<std::size_t>();
      }
      if (jp.contains("two_step")) {
        p.two_step_iterations = jp.at("two_step").at("iterations").get<std::size_t>();
        p.two_step_pop = jp.at("two_step").at("pop_size").get<std::size_t>();
      }
      c.custom_presets.push_back(std::move(p));
    }
    if (j.contains("strategies")) {
      c.strategies.clear();
      for (const auto& s : j.at("strategies")) c.strategies.push_back(strategy_from_string(s.get<std::string>()));
    }
    c.replications = j.value("replications", c.replications);
    c.alpha = j.value("alpha", c.alpha);
    c.basis_size = j.value("basis_size", c.basis_size);
    if (j.contains("clustering")) {
      const auto& jc = j.at("clustering");
      c.clustering.k = jc.value("k", c.clustering.k);
      c.clustering.iterations = jc.value("iterations", c.clustering.iterations);
      c.clustering.restarts = jc.value("restarts", c.clustering.restarts);
      c.clustering.eps0 = jc.value("eps0", c.clustering.eps0);
      c.clustering.c0 = jc.value("c0", c.clustering.c0);
      c.clustering.seed = jc.value("seed", c.clustering.seed);
    }
    if (j.contains("dtw")) {
      const auto& jd = j.at("dtw");
      for (std::size_t v = 0; v < kWeatherVarCount; ++v) {
        c.dtw.window[v] = jd.value(to_string(static_cast<WeatherVar>(v)), c.dtw.window[v]);
      }
    }
    if (j.contains("weights")) c.weights = DissimWeights::from_json(j.at("weights").dump());
    if (j.contains("method")) c.method = residual_method_from_string(j.at("method").get<std::string>());
    if (j.contains("optimizer")) {
      const auto& jo = j.at("optimizer");
      c.optimizer.inertia = jo.value("inertia", c.optimizer.inertia);
      c.optimizer.c1 = jo.value("c1", c.optimizer.c1);
      c.optimizer.c2 = jo.value("c2", c.optimizer.c2);
      c.optimizer.mutation_rate = jo.value("mutation_rate", c.optimizer.mutation_rate);
      c.optimizer.mutation_exponent = jo.value("mutation_exponent", c.optimizer.mutation_exponent);
      c.optimizer.archive_capacity = jo.value("archive_capacity", c.optimizer.archive_capacity);
    }
    if (j.contains("reference")) {
      c.reference_multiplier = j.at("reference").value("multiplier", c.reference_multiplier);
      c.reference_pop = j.at("reference").value("pop_size", c.reference_pop);
    }
  } catch (const json::exception& e) {
    throw Error(std::string("experiment config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string ExperimentConfig::to_json() const {
  json j;
  json jc;
  if (climate_file) jc["file"] = *climate_file;
  jc["length"] = climate_length;
  if (climate_seed) jc["seed"] = *climate_seed;
  jc["generator"] = json::parse(generator_config_to_json(generator));
  j["climate"] = jc;
  j["budgets"] = budgets;
  j["presets"] = json::array();
  for (const auto& p : custom_presets) {
    j["presets"].push_back({{"name", p.name},
                            {"random_n", p.random_n},
                            {"naive", {{"iterations", p.naive_iterations}, {"pop_size", p.naive_pop}}},
                            {"two_step", {{"iterations", p.two_step_iterations}, {"pop_size", p.two_step_pop}}}});
  }
  j["strategies"] = json::array();
  for (auto s : strategies) j["strategies"].push_back(to_string(s));
  j["replications"] = replications;
  j["alpha"] = alpha;
  j["basis_size"] = basis_size;
  j["clustering"] = {{"k", clustering.k},       {"iterations", clustering.iterations},
                     {"restarts", clustering.restarts}, {"eps0", clustering.eps0},
                     {"c0", clustering.c0},     {"seed", clustering.seed}};
  json jd;
  for (std::size_t v = 0; v < kWeatherVarCount; ++v) jd[to_string(static_cast<WeatherVar>(v))] = dtw.window[v];
  j["dtw"] = jd;
  j["weights"] = json::parse(weights.to_json());
  j["method"] = to_string(method);
  j["optimizer"] = {{"inertia", optimizer.inertia},
                    {"c1", optimizer.c1},
                    {"c2", optimizer.c2},
                    {"mutation_rate", optimizer.mutation_rate},
                    {"mutation_exponent", optimizer.mutation_exponent},
                    {"archive_capacity", optimizer.archive_capacity}};
  j["reference"] = {{"multiplier", reference_multiplier}, {"pop_size", reference_pop}};
  return j.dump(2);
}

double sample_quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error("sample_quantile: empty input");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

namespace {

std::string archive_text(const ParetoArchive& a) {
  std::ostringstream ss;
  write_archive_csv(ss, a);
  return ss.str();
}

std::string two_digits(std::size_t v) {
  return (v < 10 ? "0" : "") + std::to_string(v);
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& cfg, std::uint64_t master_seed,
                                const std::string& out_dir, const Simulator& sim) {
  cfg.validate();
  const ClimateSet climate =
      cfg.climate_file ? load_climate(*cfg.climate_file, cfg.climate_length)
                       : generate_climate(cfg.generator,
                                          cfg.climate_seed.value_or(derive_seed(master_seed, {0xC11AULL})));
  const std::size_t n = climate.size();

  ExperimentReport report;
  for (std::size_t bi = 0; bi < cfg.budgets.size(); ++bi) {
    const auto& preset = cfg.preset(cfg.budgets[bi]);
    for (auto strategy : cfg.strategies) {
      for (std::size_t rep = 0; rep < cfg.replications; ++rep) {
        CellResult cell;
        cell.strategy = strategy;
        cell.budget = preset.name;
        cell.replication = rep;
        // Strategies share the seed of a (budget, replication) pair.
        cell.seed = derive_seed(master_seed, {bi, rep});
        cell.expected_simulations = expected_budget(strategy, preset, n, cfg.clustering.k, cfg.basis_size);
        try {
          OptimizerConfig ocfg = cfg.optimizer;
          ocfg.seed = cell.seed;
          ocfg.alpha = cfg.alpha;
          OptimizationResult result;
          switch (strategy) {
            case Strategy::random:
              result = random_search(climate, sim, preset.random_n, cfg.alpha, cell.seed);
              break;
            case Strategy::naive:
              ocfg.pop_size = preset.naive_pop;
              ocfg.iterations = preset.naive_iterations;
              result = naive_mopso(climate, sim, ocfg);
              break;
            case Strategy::two_step: {
              ocfg.pop_size = preset.two_step_pop;
              ocfg.iterations = preset.two_step_iterations;
              TwoStepConfig tcfg;
              tcfg.basis_size = cfg.basis_size;
              tcfg.clustering = cfg.clustering;
              tcfg.dtw = cfg.dtw;
              tcfg.weights = cfg.weights;
              tcfg.method = cfg.method;
              tcfg.optimizer = ocfg;
              result = two_step(climate, sim, tcfg).result;
              break;
            }
          }
          cell.report = std::move(result.budget);
          cell.archive = rescore_full(result.archive, climate, sim, cfg.alpha);
        } catch (const std::exception& e) {
          cell.status = std::string("error: ") + e.what();
        }
        report.cells.push_back(std::move(cell));
      }
    }
  }

  // Reference front: one long full-evaluation run.
  std::uint64_t largest = 0;
  for (const auto& c : report.cells) largest = std::max(largest, c.expected_simulations);
  {
    OptimizerConfig rcfg = cfg.optimizer;
    rcfg.pop_size = cfg.reference_pop;
    rcfg.alpha = cfg.alpha;
    rcfg.seed = derive_seed(master_seed, {0x5EFULL});
    const double target = cfg.reference_multiplier * static_cast<double>(largest);
    const auto per_gen = static_cast<double>(rcfg.pop_size * n);
    rcfg.iterations = static_cast<std::size_t>(std::max(1.0, std::round(target / per_gen) - 1.0));
    auto r = naive_mopso(climate, sim, rcfg);
    report.reference = std::move(r.archive);
    report.reference_simulations = r.budget.total;
    report.reference_iterations = rcfg.iterations;
  }

  std::vector<Front> fronts{Front::from_archive(report.reference)};
  for (const auto& c : report.cells) {
    if (c.status == "ok" && !c.archive.empty()) fronts.push_back(Front::from_archive(c.archive));
  }
  report.hv_reference = hypervolume_reference(fronts);
  report.ideal = ideal_point(fronts);
  const Front ref_front = fronts.front();
  const auto weights = uniform_weights();
  for (auto& c : report.cells) {
    if (c.status != "ok") continue;
    const auto f = Front::from_archive(c.archive);
    c.hypervolume = hypervolume(f, report.hv_reference);
    c.epsilon = epsilon_indicator(f, ref_front);
    c.r2 = r2_indicator(f, weights, report.ideal);
  }

  if (out_dir.empty()) return report;

  namespace fs = std::filesystem;
  fs::create_directories(fs::path(out_dir) / "archives");
  for (auto& c : report.cells) {
    c.archive_file = std::string("archives/") + to_string(c.strategy) + "_" + c.budget + "_rep" +
                     two_digits(c.replication) + ".csv";
    const auto text = archive_text(c.archive);
    c.archive_hash = content_hash(text);
    write_text_file((fs::path(out_dir) / c.archive_file).string(), text);
  }

  std::ostringstream ind;
  ind << "strategy,budget,replication,seed,status,archive_file,archive_hash,front_size,"
         "simulations,expected_simulations,budget_match,hypervolume,epsilon,r2\n";
  std::ostringstream audit;
  audit << "strategy,budget,replication,label,calls\n";
  for (const auto& c : report.cells) {
    std::string status = c.status;
    std::replace(status.begin(), status.end(), ',', ';');
    std::replace(status.begin(), status.end(), '\n', ' ');
    ind << to_string(c.strategy) << ',' << c.budget << ',' << c.replication << ',' << c.seed << ','
        << status << ',' << c.archive_file << ',' << c.archive_hash << ',' << c.archive.size() << ','
        << c.report.total << ',' << c.expected_simulations << ','
        << (c.report.total == c.expected_simulations ? "true" : "false") << ','
        << format_double(c.hypervolume) << ',' << format_double(c.epsilon) << ','
        << format_double(c.r2) << '\n';
    for (const auto& b : c.report.breakdown) {
      audit << to_string(c.strategy) << ',' << c.budget << ',' << c.replication << ',' << b.label
            << ',' << b.calls << '\n';
    }
    audit << to_string(c.strategy) << ',' << c.budget << ',' << c.replication << ",total,"
          << c.report.total << '\n';
  }
  write_text_file((fs::path(out_dir) / "indicators.csv").string(), ind.str());
  write_text_file((fs::path(out_dir) / "budget_audit.csv").string(), audit.str());

  std::ostringstream summary;
  summary << "strategy,budget,metric,runs,median,q1,q3\n";
  for (const auto& budget : cfg.budgets) {
    const auto& name = cfg.preset(budget).name;
    for (auto strategy : cfg.strategies) {
      std::vector<double> hv, eps, r2, sims;
      for (const auto& c : report.cells) {
        if (c.strategy != strategy || c.budget != name || c.status != "ok") continue;
        hv.push_back(c.hypervolume);
        eps.push_back(c.epsilon);
        r2.push_back(c.r2);
        sims.push_back(static_cast<double>(c.report.total));
      }
      const std::pair<const char*, const std::vector<double>*> metrics[] = {
          {"hypervolume", &hv}, {"epsilon", &eps}, {"r2", &r2}, {"simulations", &sims}};
      for (const auto& [metric, vals] : metrics) {
        summary << to_string(strategy) << ',' << name << ',' << metric << ',' << vals->size();
        if (vals->empty()) {
          summary << ",,,\n";
        } else {
          summary << ',' << format_double(sample_quantile(*vals, 0.5)) << ','
                  << format_double(sample_quantile(*vals, 0.25)) << ','
                  << format_double(sample_quantile(*vals, 0.75)) << '\n';
        }
      }
    }
  }
  write_text_file((fs::path(out_dir) / "summary.csv").string(), summary.str());
  write_text_file((fs::path(out_dir) / "reference_front.csv").string(), archive_text(report.reference));

  json ref;
  ref["note"] = "approximate reference front from one long full-evaluation MOPSO-CD run";
  ref["simulations"] = report.reference_simulations;
  ref["iterations"] = report.reference_iterations;
  ref["pop_size"] = cfg.reference_pop;
  ref["hypervolume_reference_point"] = {report.hv_reference[0], report.hv_reference[1]};
  ref["ideal_point"] = {report.ideal[0], report.ideal[1]};
  ref["climate_series"] = n;
  ref["master_seed"] = master_seed;
  write_text_file((fs::path(out_dir) / "reference.json").string(), ref.dump(2));
  write_text_file((fs::path(out_dir) / "experiment.json").string(), cfg.to_json());
  return report;
}

}  // namespace ideo
