// Command-line front end: climate generation, simulation, dissimilarities,
// clustering, reconstruction, optimization, indicator evaluation and full experiments.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ideo/climate.hpp"
#include "ideo/cluster.hpp"
#include "ideo/cropmodel.hpp"
#include "ideo/dissim.hpp"
#include "ideo/experiment.hpp"
#include "ideo/indicators.hpp"
#include "ideo/io.hpp"
#include "ideo/moo.hpp"
#include "ideo/reconstruct.hpp"

namespace fs = std::filesystem;
using namespace ideo;

namespace {

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

ClusterModel cluster_model_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  ClusterModel m;
  m.assignment = j.at("assignment").get<std::vector<std::size_t>>();
  m.class_sizes = j.at("class_sizes").get<std::vector<std::size_t>>();
  m.representatives = j.at("representatives").get<std::vector<std::size_t>>();
  m.energy = j.value("energy", 0.0);
  return m;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phenotype optimization under climatic uncertainty"};
  app.require_subcommand(1);
  std::size_t length = 180;

  // gen-climate
  auto* gen = app.add_subcommand("gen-climate", "Generate a synthetic climate set");
  std::string gen_config, gen_out;
  std::uint64_t gen_seed = 0;
  gen->add_option("--config", gen_config, "generator JSON (defaults: 5 sites x 38 years)");
  gen->add_option("--seed", gen_seed)->required();
  gen->add_option("--out", gen_out, "climate CSV")->required();

  // simulate
  auto* simc = app.add_subcommand("simulate", "Yield matrix for phenotypes x climate series");
  std::string sim_climate, sim_pheno, sim_out;
  simc->add_option("--climate", sim_climate)->required();
  simc->add_option("--phenotypes", sim_pheno)->required();
  simc->add_option("--out", sim_out)->required();
  simc->add_option("--length", length, "season length in days");

  // dissim
  auto* dis = app.add_subcommand("dissim", "Combined DTW + model-based dissimilarity");
  std::string dis_climate, dis_yields, dis_weights, dis_out, dis_inter;
  std::size_t window = 7, rain_window = 3;
  dis->add_option("--climate", dis_climate)->required();
  dis->add_option("--basis-yields", dis_yields)->required();
  dis->add_option("--weights", dis_weights, "weights JSON (default: model 1/2, others 1/10)");
  dis->add_option("--out", dis_out)->required();
  dis->add_option("--intermediates", dis_inter, "directory for the raw and normalized matrices");
  dis->add_option("--window", window, "DTW window for tmin/tmax/rad/etp");
  dis->add_option("--rain-window", rain_window, "DTW window for rain");
  dis->add_option("--length", length, "season length in days");

  // cluster
  auto* clu = app.add_subcommand("cluster", "Relational k-means on a dissimilarity matrix");
  std::string clu_dissim, clu_out;
  ClusteringConfig ccfg;
  clu->add_option("--dissim", clu_dissim)->required();
  clu->add_option("--k", ccfg.k);
  clu->add_option("--iters", ccfg.iterations);
  clu->add_option("--restarts", ccfg.restarts);
  clu->add_option("--eps0", ccfg.eps0);
  clu->add_option("--c0", ccfg.c0);
  clu->add_option("--seed", ccfg.seed)->required();
  clu->add_option("--out", clu_out)->required();

  // residuals
  auto* res = app.add_subcommand("residuals", "Residual table from basis yields and a clustering");
  std::string res_yields, res_clusters, res_method = "rescaled", res_out;
  res->add_option("--basis-yields", res_yields)->required();
  res->add_option("--clusters", res_clusters, "output of the cluster subcommand")->required();
  res->add_option("--method", res_method)->check(CLI::IsMember({"naive", "rescaled"}));
  res->add_option("--out", res_out)->required();

  // reconstruct
  auto* rec = app.add_subcommand("reconstruct", "Estimate E, quantile and CVaR from representative yields");
  std::string rec_yields, rec_residuals, rec_method;
  double rec_alpha = 0.2;
  rec->add_option("--rep-yields", rec_yields, "CSV, one row of K representative yields per phenotype")->required();
  rec->add_option("--residuals", rec_residuals)->required();
  rec->add_option("--alpha", rec_alpha);
  rec->add_option("--method", rec_method)->check(CLI::IsMember({"naive", "rescaled"}));

  // optimize
  auto* opt = app.add_subcommand("optimize", "Run one strategy at a budget preset");
  std::string opt_strategy, opt_preset = "very-small", opt_climate, opt_out;
  std::uint64_t opt_seed = 0;
  double opt_alpha = 0.2;
  std::size_t opt_k = 10, opt_basis = 10;
  opt->add_option("--strategy", opt_strategy)->required()->check(CLI::IsMember({"random", "naive", "two-step"}));
  opt->add_option("--budget-preset", opt_preset)->check(CLI::IsMember({"very-small", "small", "medium", "large"}));
  opt->add_option("--climate", opt_climate)->required();
  opt->add_option("--seed", opt_seed);
  opt->add_option("--alpha", opt_alpha);
  opt->add_option("--k", opt_k);
  opt->add_option("--basis-size", opt_basis);
  opt->add_option("--length", length, "season length in days");
  opt->add_option("--out", opt_out)->required();

  // evaluate
  auto* eva = app.add_subcommand("evaluate", "Hypervolume, epsilon and R2 for archive CSVs");
  std::vector<std::string> eva_fronts;
  std::string eva_reference, eva_out;
  eva->add_option("--fronts", eva_fronts)->required();
  eva->add_option("--reference", eva_reference)->required();
  eva->add_option("--out", eva_out)->required();

  // run
  auto* run = app.add_subcommand("run", "Full comparison experiment");
  std::string run_config, run_out;
  std::uint64_t run_seed = 0;
  run->add_option("--config", run_config)->required();
  run->add_option("--seed", run_seed);
  run->add_option("--out", run_out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const ToyCropModel model;
    if (*gen) {
      const auto cfg = gen_config.empty() ? GeneratorConfig::defaults()
                                          : generator_config_from_json(read_text_file(gen_config));
      const auto set = generate_climate(cfg, gen_seed);
      save_climate(gen_out, set);
      std::cout << "wrote " << set.size() << " series of " << set.length() << " days to " << gen_out << '\n';
    } else if (*simc) {
      const auto climate = load_climate(sim_climate, length);
      auto in = open_in(sim_pheno);
      const auto xs = read_phenotypes_csv(in);
      CountingSimulator counter(model);
      const auto y = yield_matrix(counter, xs, climate);
      auto out = open_out(sim_out);
      write_yield_matrix_csv(out, y);
      std::cout << "simulator calls: " << counter.calls() << '\n';
    } else if (*dis) {
      const auto climate = load_climate(dis_climate, length);
      auto in = open_in(dis_yields);
      const auto y = read_yield_matrix_csv(in);
      const auto w = dis_weights.empty() ? DissimWeights{} : DissimWeights::from_json(read_text_file(dis_weights));
      DtwConfig dtw;
      dtw.window = {window, window, window, window, rain_window};
      const auto p = build_dissimilarity(climate, y.values, dtw, w);
      const auto ids = climate.ids();
      auto out = open_out(dis_out);
      write_dissim_csv(out, p.combined, ids);
      if (!dis_inter.empty()) {
        fs::create_directories(dis_inter);
        auto dump = [&](const DissimilarityMatrix& m, const std::string& name) {
          auto o = open_out((fs::path(dis_inter) / name).string());
          write_dissim_csv(o, m, ids);
        };
        for (std::size_t v = 0; v < kWeatherVarCount; ++v) {
          const std::string var = to_string(static_cast<WeatherVar>(v));
          dump(p.raw_variables[v], "raw_" + var + ".csv");
          dump(p.normalized_variables[v], "normalized_" + var + ".csv");
        }
        dump(p.raw_model, "raw_model.csv");
        dump(p.normalized_model, "normalized_model.csv");
      }
    } else if (*clu) {
      auto in = open_in(clu_dissim);
      std::vector<std::string> ids;
      const auto d = read_dissim_csv(in, ids);
      const auto m = relational_kmeans(d, ccfg);
      write_text_file(clu_out, cluster_model_to_json(m, ids));
      std::cout << "energy " << format_double(m.energy) << ", class sizes";
      for (auto s : m.class_sizes) std::cout << ' ' << s;
      std::cout << '\n';
    } else if (*res) {
      auto in = open_in(res_yields);
      const auto y = read_yield_matrix_csv(in);
      const auto m = cluster_model_from_json(read_text_file(res_clusters));
      const auto t = compute_residuals(y.values, m, residual_method_from_string(res_method));
      write_text_file(res_out, residual_table_to_json(t));
      if (!t.skipped_basis.empty()) {
        std::cerr << t.skipped_basis.size() << " basis phenotype(s) skipped: degenerate scale\n";
      }
    } else if (*rec) {
      auto table = residual_table_from_json(read_text_file(rec_residuals));
      if (!rec_method.empty()) {
        const auto want = residual_method_from_string(rec_method);
        if (want == ResidualMethod::rescaled && table.method == ResidualMethod::naive) {
          throw Error("residual table has no rescaled residuals");
        }
        table.method = want;
      }
      auto in = open_in(rec_yields);
      std::string line;
      std::getline(in, line);  // header
      std::cout << "row,e,quantile,cvar,clamped,naive_fallback\n";
      std::size_t row = 0;
      while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        std::vector<double> y;
        for (auto f : split_csv(line)) y.push_back(parse_double(f, "rep-yields row " + std::to_string(row + 1)));
        const auto r = reconstruct_sample(y, table);
        const std::span<const Atom> atoms(r.atoms);
        std::cout << row << ',' << format_double(expectation(atoms)) << ','
                  << format_double(quantile(atoms, rec_alpha)) << ','
                  << format_double(cvar(atoms, rec_alpha)) << ',' << r.clamped << ','
                  << (r.naive_fallback ? "true" : "false") << '\n';
        ++row;
      }
    } else if (*opt) {
      const auto climate = load_climate(opt_climate, length);
      const auto strategy = strategy_from_string(opt_strategy);
      const auto& preset = budget_preset(opt_preset);
      OptimizerConfig ocfg;
      ocfg.seed = opt_seed;
      ocfg.alpha = opt_alpha;
      OptimizationResult r;
      switch (strategy) {
        case Strategy::random:
          r = random_search(climate, model, preset.random_n, opt_alpha, opt_seed);
          break;
        case Strategy::naive:
          ocfg.pop_size = preset.naive_pop;
          ocfg.iterations = preset.naive_iterations;
          r = naive_mopso(climate, model, ocfg);
          break;
        case Strategy::two_step: {
          ocfg.pop_size = preset.two_step_pop;
          ocfg.iterations = preset.two_step_iterations;
          TwoStepConfig tcfg;
          tcfg.basis_size = opt_basis;
          tcfg.clustering.k = opt_k;
          tcfg.optimizer = ocfg;
          r = two_step(climate, model, tcfg).result;
          break;
        }
      }
      fs::create_directories(opt_out);
      auto out = open_out((fs::path(opt_out) / "archive.csv").string());
      write_archive_csv(out, r.archive);
      write_text_file((fs::path(opt_out) / "budget.json").string(), r.budget.to_json());
      std::cout << r.archive.size() << " archive members, " << r.budget.total
                << " simulator calls (expected "
                << expected_budget(strategy, preset, climate.size(), opt_k, opt_basis) << ")\n";
    } else if (*eva) {
      auto ref_in = open_in(eva_reference);
      const auto reference = Front::from_archive(read_archive_csv(ref_in));
      std::vector<Front> fronts{reference};
      for (const auto& f : eva_fronts) {
        auto in = open_in(f);
        fronts.push_back(Front::from_archive(pareto_filter(read_archive_csv(in).members)));
      }
      const auto hv_ref = hypervolume_reference(fronts);
      const auto ideal = ideal_point(fronts);
      const auto weights = uniform_weights();
      auto out = open_out(eva_out);
      out << "front,hypervolume,epsilon,r2\n";
      for (std::size_t i = 0; i < eva_fronts.size(); ++i) {
        const auto& f = fronts[i + 1];
        out << eva_fronts[i] << ',' << format_double(hypervolume(f, hv_ref)) << ','
            << format_double(epsilon_indicator(f, reference)) << ','
            << format_double(r2_indicator(f, weights, ideal)) << '\n';
      }
    } else if (*run) {
      const auto cfg = ExperimentConfig::from_json(read_text_file(run_config));
      const auto report = run_experiment(cfg, run_seed, run_out, model);
      std::size_t failed = 0;
      for (const auto& c : report.cells) failed += c.status != "ok";
      std::cout << report.cells.size() << " runs (" << failed << " failed), reference front of "
                << report.reference.size() << " points; reports in " << run_out << '\n';
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
