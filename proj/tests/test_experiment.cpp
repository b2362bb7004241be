#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ideo/common.hpp"
#include "ideo/experiment.hpp"
#include "ideo/io.hpp"

using namespace ideo;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny() {
  ExperimentConfig c;
  c.generator.years_per_site = 2;  // N = 10
  c.generator.length = 60;
  c.climate_length = 60;
  c.custom_presets.push_back({"tiny", 6, 2, 3, 2, 3});
  c.budgets = {"tiny"};
  c.basis_size = 3;
  c.clustering.k = 3;
  c.clustering.iterations = 60;
  c.clustering.restarts = 2;
  c.reference_multiplier = 2.0;
  c.reference_pop = 4;
  return c;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("ideo_test_" + name);
  fs::remove_all(p);
  return p;
}

std::size_t lines(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string s;
  while (std::getline(in, s)) ++n;
  return n;
}

}  // namespace

TEST(Experiment, WritesEveryArtifact) {
  auto dir = scratch("artifacts");
  ToyCropModel m;
  auto rep = run_experiment(tiny(), 3, dir.string(), m);
  ASSERT_EQ(rep.cells.size(), 30u);
  std::size_t archives = 0;
  for (const auto& e : fs::directory_iterator(dir / "archives")) archives += e.is_regular_file();
  EXPECT_EQ(archives, 30u);
  for (const char* f : {"indicators.csv", "summary.csv", "budget_audit.csv", "reference_front.csv",
                        "reference.json", "experiment.json"})
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  EXPECT_EQ(lines(dir / "indicators.csv"), 31u);
  EXPECT_EQ(lines(dir / "summary.csv"), 1u + 3u * 4u);  // strategy x {hv, eps, r2, sims}
  for (const auto& c : rep.cells) {
    EXPECT_EQ(c.status, "ok");
    EXPECT_EQ(c.report.total, c.expected_simulations) << to_string(c.strategy);
    EXPECT_EQ(c.archive_hash, content_hash(read_text_file((dir / c.archive_file).string())));
    EXPECT_GE(c.hypervolume, 0.0);
  }
  const auto audit = read_text_file((dir / "budget_audit.csv").string());
  EXPECT_EQ(audit.find(",false"), std::string::npos);
}

TEST(Experiment, BudgetsFollowTheFormulas) {
  auto cfg = tiny();
  cfg.replications = 1;
  ToyCropModel m;
  auto rep = run_experiment(cfg, 1, "", m);
  for (const auto& c : rep.cells) {
    std::uint64_t expect = 0;
    switch (c.strategy) {
      case Strategy::random: expect = 6 * 10; break;
      case Strategy::naive: expect = 3 * 3 * 10; break;
      case Strategy::two_step: expect = 2 * 3 * 10 + 2 * 3 * 3 * 3; break;
    }
    EXPECT_EQ(c.report.total, expect);
  }
  // 2 x the largest budget (two-step, 114) with pop 4 over N = 10: T + 1 = round(5.7) = 6
  EXPECT_EQ(rep.reference_simulations, 6u * 4u * 10u);
}

TEST(Experiment, Deterministic) {
  auto a = scratch("det_a"), b = scratch("det_b");
  auto cfg = tiny();
  cfg.replications = 2;
  ToyCropModel m;
  run_experiment(cfg, 17, a.string(), m);
  run_experiment(cfg, 17, b.string(), m);
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), a);
    EXPECT_EQ(read_text_file(e.path().string()), read_text_file((b / rel).string())) << rel;
  }
}

TEST(Experiment, FailingCellIsRecorded) {
  auto cfg = tiny();
  cfg.replications = 1;
  cfg.clustering.k = 50;  // more classes than series
  ToyCropModel m;
  auto rep = run_experiment(cfg, 2, "", m);
  for (const auto& c : rep.cells) {
    if (c.strategy == Strategy::two_step)
      EXPECT_NE(c.status.find("error"), std::string::npos);
    else
      EXPECT_EQ(c.status, "ok");
  }
}

TEST(ExperimentConfig, JsonRoundTrip) {
  auto c = tiny();
  c.climate_seed = 5;
  c.strategies = {Strategy::two_step};
  auto back = ExperimentConfig::from_json(c.to_json());
  EXPECT_EQ(back.to_json(), c.to_json());
  EXPECT_EQ(back.preset("tiny").two_step_pop, 3u);
  EXPECT_EQ(back.preset("large").random_n, 2000u);
  EXPECT_THROW(ExperimentConfig::from_json(R"({"budgets":["nope"]})"), Error);
  EXPECT_THROW(ExperimentConfig::from_json(R"({"replications":0})"), Error);
  EXPECT_THROW(ExperimentConfig::from_json("{"), Error);
}

TEST(ExperimentConfig, ShippedExampleCarriesTheConstants) {
  const auto text = read_text_file(std::string(IDEO_SOURCE_DIR) + "/config/experiment.json");
  auto c = ExperimentConfig::from_json(text);
  EXPECT_EQ(c.clustering.k, 10u);
  EXPECT_EQ(c.clustering.iterations, 500u);
  EXPECT_EQ(c.clustering.restarts, 10u);
  EXPECT_EQ(c.basis_size, 10u);
  EXPECT_EQ(c.dtw.window[0], 7u);
  EXPECT_EQ(c.dtw.window[4], 3u);
  EXPECT_EQ(c.weights.model, 0.5);
  EXPECT_EQ(c.preset("very-small").two_step_iterations, 42u);
  for (const char* key : {"\"k\"", "\"restarts\"", "\"rain\"", "\"model\"", "\"very-small\"", "\"large\""})
    EXPECT_NE(text.find(key), std::string::npos) << key;
}

TEST(SampleQuantile, Type7) {
  EXPECT_EQ(sample_quantile({1, 2, 3, 4}, 0.5), 2.5);
  EXPECT_EQ(sample_quantile({1, 2, 3, 4}, 0.25), 1.75);
  EXPECT_EQ(sample_quantile({5}, 0.9), 5.0);
  EXPECT_EQ(sample_quantile({4, 1, 3, 2}, 1.0), 4.0);
  EXPECT_THROW(sample_quantile({}, 0.5), Error);
}
