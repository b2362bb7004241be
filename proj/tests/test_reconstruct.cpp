#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "ideo/common.hpp"
#include "ideo/cropmodel.hpp"
#include "ideo/reconstruct.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace ideo;

namespace {

ClusterModel model_of(std::vector<std::size_t> assignment, std::vector<std::size_t> reps) {
  ClusterModel m;
  m.class_sizes.assign(reps.size(), 0);
  for (auto a : assignment) ++m.class_sizes[a];
  m.assignment = std::move(assignment);
  m.representatives = std::move(reps);
  return m;
}

ClusterModel random_model(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::vector<std::size_t> a(n);
  for (std::size_t i = 0; i < n; ++i) a[i] = i < k ? i : rng() % k;
  std::shuffle(a.begin(), a.end(), rng);
  std::vector<std::size_t> reps(k);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<std::size_t> mem;
    for (std::size_t i = 0; i < n; ++i)
      if (a[i] == c) mem.push_back(i);
    reps[c] = mem[rng() % mem.size()];
  }
  return model_of(a, reps);
}

std::vector<double> rep_values(std::span<const double> row, const ClusterModel& m) {
  std::vector<double> v;
  for (auto r : m.representatives) v.push_back(row[r]);
  return v;
}

std::vector<double> values(const ReconstructedYield& r) {
  std::vector<double> v;
  for (const auto& a : r.atoms) v.push_back(a.value);
  return v;
}

std::vector<Atom> equal_atoms(std::vector<double> v) {
  std::vector<Atom> out;
  for (double x : v) out.push_back({x, 1.0 / static_cast<double>(v.size())});
  return out;
}

}  // namespace

TEST(Residuals, SinglePhenotypeNaive) {
  Matrix y(1, 4);
  const double row[4] = {3, 1, 4, 1.5};
  for (int j = 0; j < 4; ++j) y(0, j) = row[j];
  auto m = model_of({0, 0, 1, 1}, {1, 2});
  auto t = compute_residuals(y, m, ResidualMethod::naive);
  ASSERT_EQ(t.k(), 2u);
  EXPECT_EQ(t.classes[0].members, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(t.classes[0].naive, (std::vector<double>{2, 0}));
  EXPECT_EQ(t.classes[1].naive, (std::vector<double>{0, -2.5}));
  EXPECT_TRUE(t.classes[0].rescaled.empty());
}

TEST(Residuals, TwoPhenotypeHandValues) {
  Matrix y(2, 2);
  y(0, 0) = 1;
  y(0, 1) = 3;
  y(1, 0) = 2;
  y(1, 1) = 6;
  auto t = compute_residuals(y, model_of({0, 0}, {0}), ResidualMethod::naive);
  EXPECT_EQ(t.classes[0].naive, (std::vector<double>{0, 3}));
}

TEST(Residuals, RepresentativeSlotIsZero) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, 8);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 5 + rng() % 20, K = 1 + rng() % 4, l = 1 + rng() % 5;
    Matrix y(l, n);
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = 0; j < n; ++j) y(i, j) = u(rng);
    auto m = random_model(rng, n, K);
    for (auto method : {ResidualMethod::naive, ResidualMethod::rescaled}) {
      if (method == ResidualMethod::rescaled && K == 1) continue;  // sigma_K is 0 with one class
      auto t = compute_residuals(y, m, method);
      for (const auto& c : t.classes) {
        auto pos = std::find(c.members.begin(), c.members.end(), c.representative) - c.members.begin();
        EXPECT_EQ(c.naive[pos], 0.0);
        if (method == ResidualMethod::rescaled) EXPECT_EQ(c.rescaled[pos], 0.0);
      }
    }
  }
}

TEST(Residuals, DegenerateScales) {
  Matrix y(2, 4, 1.0);
  y(1, 2) = 3.0;
  auto m = model_of({0, 0, 1, 1}, {0, 2});
  auto t = compute_residuals(y, m, ResidualMethod::rescaled);
  EXPECT_EQ(t.skipped_basis, (std::vector<std::size_t>{0}));
  Matrix flat(2, 4, 1.0);
  EXPECT_THROW(compute_residuals(flat, m, ResidualMethod::rescaled), Error);
  EXPECT_NO_THROW(compute_residuals(flat, m, ResidualMethod::naive));
}

TEST(Residuals, Errors) {
  Matrix y(1, 3, 1.0);
  EXPECT_THROW(compute_residuals(Matrix(0, 3), model_of({0, 0, 0}, {0}), ResidualMethod::naive), Error);
  EXPECT_THROW(compute_residuals(y, model_of({0, 0}, {0}), ResidualMethod::naive), Error);
  EXPECT_THROW(compute_residuals(y, model_of({0, 0, 1}, {0, 0}), ResidualMethod::naive), Error);
}

TEST(Reconstruct, DirectConstruction) {
  ResidualTable t;
  t.method = ResidualMethod::naive;
  t.total = 3;
  t.classes.push_back({0, {0, 1, 2}, {-1, 0, 1}, {}});
  const double rep[] = {2.0};
  auto r = reconstruct_sample(rep, t);
  EXPECT_EQ(values(r), (std::vector<double>{1, 2, 3}));
  for (const auto& a : r.atoms) EXPECT_DOUBLE_EQ(a.weight, 1.0 / 3);
  EXPECT_EQ(r.clamped, 0u);

  const double low[] = {0.5};
  auto c = reconstruct_sample(low, t);
  EXPECT_EQ(values(c), (std::vector<double>{0, 0.5, 1.5}));
  EXPECT_EQ(c.clamped, 1u);
  const double two[] = {1.0, 2.0};
  EXPECT_THROW(reconstruct_sample(two, t), Error);
}

TEST(Reconstruct, ZeroResidualsRepeatRepresentatives) {
  Matrix y(1, 5, 2.0);
  auto m = model_of({0, 1, 1, 0, 1}, {0, 1});
  auto t = compute_residuals(y, m, ResidualMethod::naive);
  const double rep[] = {4.0, 7.0};
  auto r = reconstruct_sample(rep, t);
  auto v = values(r);
  std::sort(v.begin(), v.end());
  EXPECT_EQ(v, (std::vector<double>{4, 4, 7, 7, 7}));
  EXPECT_EQ(r.labels.size(), 5u);
}

TEST(Reconstruct, ExactnessIdentity) {
  auto set = testutil::small_climate(6, 3);
  const std::size_t n = set.size();
  std::mt19937_64 rng(4);
  ToyCropModel sim;
  for (int k = 0; k < 100; ++k) {
    auto x = testutil::random_phenotype(rng);
    auto y = yield_matrix(sim, {x}, set).values;
    auto m = random_model(rng, n, 1 + rng() % 8);
    auto rep = rep_values(y.row(0), m);
    auto truth = std::vector<double>(y.row(0).begin(), y.row(0).end());
    std::sort(truth.begin(), truth.end());
    for (auto method : {ResidualMethod::naive, ResidualMethod::rescaled}) {
      if (method == ResidualMethod::rescaled &&
          representative_scale(rep, m.class_sizes) <= kEpsNum)
        continue;
      auto r = reconstruct_sample(rep, compute_residuals(y, m, method));
      auto v = values(r);
      std::sort(v.begin(), v.end());
      ASSERT_EQ(v.size(), n);
      for (std::size_t j = 0; j < n; ++j) EXPECT_NEAR(v[j], truth[j], 1e-12);
      EXPECT_NEAR(expectation(r.atoms), expectation(truth), 1e-12);
      EXPECT_NEAR(cvar(r.atoms, 0.2), oracle::flat_cvar(truth, 0.2), 1e-12);
    }
  }
}

TEST(Reconstruct, WeightsSumToOne) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 8);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 3 + rng() % 30, K = 2 + rng() % 2;
    Matrix y(3, n);
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < n; ++j) y(i, j) = u(rng);
    auto m = random_model(rng, n, K);
    auto t = compute_residuals(y, m, ResidualMethod::rescaled);
    std::vector<double> rep(K);
    for (auto& v : rep) v = u(rng);
    auto r = reconstruct_sample(rep, t);
    ASSERT_EQ(r.atoms.size(), n);
    double w = 0;
    for (const auto& a : r.atoms) {
      w += a.weight;
      EXPECT_GE(a.value, 0.0);
    }
    EXPECT_NEAR(w, 1.0, 1e-12);
  }
}

TEST(Reconstruct, RescaledIsScaleCovariant) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0, 8), lam(0.1, 10);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = 4 + rng() % 20, K = 2 + rng() % 3, l = 1 + rng() % 4;
    Matrix y(l, n);
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = 0; j < n; ++j) y(i, j) = u(rng);
    auto m = random_model(rng, n, K);
    std::vector<double> rep(K);
    for (auto& v : rep) v = u(rng);
    const double s = lam(rng);
    Matrix ys = y;
    for (std::size_t i = 0; i < l; ++i)
      for (std::size_t j = 0; j < n; ++j) ys(i, j) *= s;
    auto reps = rep;
    for (auto& v : reps) v *= s;
    auto a = reconstruct_sample(rep, compute_residuals(y, m, ResidualMethod::rescaled));
    auto b = reconstruct_sample(reps, compute_residuals(ys, m, ResidualMethod::rescaled));
    for (std::size_t j = 0; j < n; ++j)
      EXPECT_NEAR(b.atoms[j].value, s * a.atoms[j].value, 1e-10 * (1 + s * a.atoms[j].value));
  }
}

TEST(Reconstruct, NaiveFallbackOnFlatRepresentatives) {
  Matrix y(1, 4);
  const double row[4] = {1, 2, 3, 5};
  for (int j = 0; j < 4; ++j) y(0, j) = row[j];
  auto m = model_of({0, 0, 1, 1}, {0, 2});
  auto t = compute_residuals(y, m, ResidualMethod::rescaled);
  const double flat[] = {2.0, 2.0};
  auto r = reconstruct_sample(flat, t);
  EXPECT_TRUE(r.naive_fallback);
  auto v = values(r);
  EXPECT_EQ(v, (std::vector<double>{2, 3, 2, 4}));
}

TEST(Estimators, Examples) {
  std::vector<double> v(10);
  std::iota(v.begin(), v.end(), 1.0);
  EXPECT_DOUBLE_EQ(expectation(v), 5.5);
  EXPECT_EQ(quantile(v, 0.2), 2.0);
  EXPECT_DOUBLE_EQ(cvar(v, 0.2), 1.5);
  EXPECT_EQ(quantile(v, 1.0), 10.0);
  EXPECT_DOUBLE_EQ(cvar(v, 1.0), 5.5);
  auto atoms = equal_atoms(v);
  EXPECT_DOUBLE_EQ(expectation(atoms), 5.5);
  EXPECT_EQ(quantile(atoms, 0.2), 2.0);
  EXPECT_DOUBLE_EQ(cvar(atoms, 0.2), 1.5);

  const double single[] = {4.25};
  EXPECT_EQ(expectation(std::span<const double>(single)), 4.25);
  std::vector<double> same(7, 3.0);
  for (double a : {0.01, 0.3, 1.0}) {
    EXPECT_EQ(quantile(same, a), 3.0);
    EXPECT_DOUBLE_EQ(cvar(same, a), 3.0);
  }
}

TEST(Estimators, MixtureWeights) {
  const double rep[] = {1.0, 5.0};
  const std::size_t sizes[] = {3, 1};
  auto s = subset_sample(rep, sizes);
  EXPECT_DOUBLE_EQ(expectation(s), 2.0);
  // equal weights use the order-statistic convention
  std::vector<Atom> half{{1.0, 0.5}, {3.0, 0.5}};
  EXPECT_DOUBLE_EQ(cvar(half, 0.75), 2.0);
  // otherwise the boundary atom contributes a fraction of its mass
  std::vector<Atom> uneven{{3.0, 0.4}, {1.0, 0.6}};
  EXPECT_DOUBLE_EQ(cvar(uneven, 0.2), 1.0);
  EXPECT_DOUBLE_EQ(cvar(uneven, 0.75), (0.6 * 1 + 0.15 * 3) / 0.75);
  EXPECT_EQ(quantile(uneven, 0.6), 1.0);
  EXPECT_EQ(quantile(uneven, 0.61), 3.0);
}

TEST(Estimators, Errors) {
  std::vector<double> v{1, 2};
  std::vector<double> none;
  EXPECT_THROW(quantile(v, 0.0), Error);
  EXPECT_THROW(cvar(v, 1.5), Error);
  EXPECT_THROW(expectation(none), Error);
  EXPECT_THROW(cvar(none, 0.5), Error);
}

TEST(Estimators, TailOrdering) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 10), a01(0.01, 1.0);
  for (int k = 0; k < 200; ++k) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<Atom> s(n);
    const bool equal = k % 2 == 0;
    for (auto& a : s) a = {std::floor(u(rng)), equal ? 1.0 : u(rng) + 0.01};
    double total = 0;
    for (const auto& a : s) total += a.weight;
    for (auto& a : s) a.weight /= total;
    const double e = expectation(s);
    double prev = -1;
    std::vector<double> alphas;
    for (int i = 0; i < 6; ++i) alphas.push_back(a01(rng));
    std::sort(alphas.begin(), alphas.end());
    for (double a : alphas) {
      const double c = cvar(s, a);
      EXPECT_LE(c, quantile(s, a) + 1e-12);
      EXPECT_LE(c, e + 1e-12);
      EXPECT_GE(c, prev - 1e-12);
      prev = c;
    }
    EXPECT_NEAR(cvar(s, 1.0), e, 1e-12);
    if (equal) {
      std::vector<double> flat;
      for (const auto& a : s) flat.push_back(a.value);
      EXPECT_NEAR(cvar(s, 0.2), oracle::flat_cvar(flat, 0.2), 1e-12);
    }
  }
}

TEST(Gaussian, ClosedForm) {
  const double rep[] = {2.0, 6.0};
  const std::size_t sizes[] = {1, 1};
  auto g = gaussian_estimate(rep, sizes, 0.2);
  EXPECT_DOUBLE_EQ(g.mean, 4.0);
  EXPECT_DOUBLE_EQ(g.stddev, 2.0);
  const double z = -0.8416212335729143;
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2 * M_PI);
  EXPECT_NEAR(g.quantile, 4.0 + 2.0 * z, 1e-12);
  EXPECT_NEAR(g.cvar, 4.0 - 2.0 * pdf / 0.2, 1e-12);
}

TEST(ResidualJson, RoundTrip) {
  std::mt19937_64 rng(8);
  Matrix y(2, 9);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 9; ++j) y(i, j) = 0.37 * static_cast<double>((i + 2) * (j + 1) % 7);
  auto t = compute_residuals(y, random_model(rng, 9, 3), ResidualMethod::rescaled);
  auto back = residual_table_from_json(residual_table_to_json(t));
  EXPECT_EQ(back.method, t.method);
  EXPECT_EQ(back.total, 9u);
  ASSERT_EQ(back.k(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(back.classes[k].members, t.classes[k].members);
    EXPECT_EQ(back.classes[k].rescaled, t.classes[k].rescaled);
    EXPECT_EQ(back.classes[k].naive, t.classes[k].naive);
  }
  EXPECT_THROW(residual_table_from_json("{}"), Error);
}
