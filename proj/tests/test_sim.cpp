// SPDX-License-Identifier: MIT
#include "gdlm/sim.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace gdlm;

TEST(SampleModel, SatisfiesInvariants) {
  SimConfig cfg;
  cfg.p = 5;
  cfg.k = 3;
  cfg.d = 4;
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    cfg.seed = seed;
    EXPECT_NO_THROW(sample_model(cfg).validate());
  }
}

TEST(SampleModel, ConcentratedPriorGivesUniformColumns) {
  SimConfig cfg;
  cfg.p = 4;
  cfg.k = 3;
  cfg.d = 4;
  cfg.theta_prior = VectorXd::Constant(4, 1e6 / 4.0);
  cfg.seed = 2;
  const ModelParams m = sample_model(cfg);
  for (const MatrixXd& th : m.thetas)
    EXPECT_LT((th.array() - 0.25).abs().maxCoeff(), 1e-2);
}

TEST(SampleModel, Deterministic) {
  SimConfig cfg;
  cfg.p = 3;
  cfg.k = 2;
  cfg.d = 4;
  cfg.seed = 17;
  const ModelParams a = sample_model(cfg);
  const ModelParams b = sample_model(cfg);
  for (int j = 0; j < 3; ++j)
    EXPECT_EQ((a.thetas[j] - b.thetas[j]).cwiseAbs().maxCoeff(), 0.0);
}

TEST(SimulateDataset, DegenerateEmission) {
  // every component emits category 1 in every variable
  ModelParams m;
  m.thetas.assign(3, [] {
    MatrixXd th = MatrixXd::Zero(4, 2);
    th.row(1).setOnes();
    return th;
  }());
  m.alpha = VectorXd::Constant(2, 0.5);
  m.alpha0 = 1.0;
  SimConfig cfg;
  cfg.p = 3;
  cfg.k = 2;
  cfg.d = 4;
  cfg.n = 50;
  cfg.seed = 3;
  const Dataset data = simulate_dataset(m, cfg);
  for (double v : data.values) EXPECT_EQ(v, 1.0);
}

TEST(SimulateDataset, MarginalFrequenciesMatchMean) {
  SimConfig cfg;
  cfg.p = 3;
  cfg.k = 3;
  cfg.d = 4;
  cfg.n = 50000;
  cfg.alpha_h = 0.4;
  cfg.seed = 4;
  const ModelParams m = sample_model(cfg);
  const Dataset data = simulate_dataset(m, cfg);
  const VectorXd mean = m.alpha / m.alpha0;
  for (int j = 0; j < cfg.p; ++j) {
    const VectorXd expected = m.thetas[j] * mean;
    VectorXd freq = VectorXd::Zero(cfg.d);
    for (int i = 0; i < cfg.n; ++i) freq[static_cast<int>(data(i, j))] += 1.0;
    freq /= cfg.n;
    for (int c = 0; c < cfg.d; ++c) {
      const double sigma = std::sqrt(expected[c] * (1.0 - expected[c]) / cfg.n);
      EXPECT_NEAR(freq[c], expected[c], 3.0 * sigma + 1e-9) << "var " << j << " cat " << c;
    }
  }
}

TEST(SimulateDataset, DeterministicAndValidRange) {
  SimConfig cfg;
  cfg.p = 4;
  cfg.k = 2;
  cfg.d = 3;
  cfg.n = 200;
  cfg.seed = 5;
  const ModelParams m = sample_model(cfg);
  const Dataset a = simulate_dataset(m, cfg);
  const Dataset b = simulate_dataset(m, cfg);
  EXPECT_EQ(a.values, b.values);
  EXPECT_NO_THROW(a.validate());
}

TEST(Contaminate, ZeroDeltaIsIdentity) {
  SimConfig cfg;
  cfg.p = 4;
  cfg.k = 2;
  cfg.d = 3;
  cfg.n = 100;
  cfg.seed = 6;
  const Dataset data = simulate_dataset(sample_model(cfg), cfg);
  const Dataset same = contaminate(data, 0.0, 999);
  EXPECT_EQ(data.values, same.values);
}

TEST(Contaminate, FullDeltaIsUniform) {
  SimConfig cfg;
  cfg.p = 2;
  cfg.k = 2;
  cfg.d = 4;
  cfg.n = 50000;
  cfg.seed = 7;
  // start from a degenerate dataset so the uniformity comes from the noise
  Dataset data;
  data.n = cfg.n;
  data.p = cfg.p;
  data.categories.assign(cfg.p, cfg.d);
  data.values.assign(static_cast<std::size_t>(cfg.n) * cfg.p, 0.0);
  const Dataset noisy = contaminate(data, 1.0, 8);
  for (int j = 0; j < cfg.p; ++j) {
    VectorXd freq = VectorXd::Zero(cfg.d);
    for (int i = 0; i < cfg.n; ++i) freq[static_cast<int>(noisy(i, j))] += 1.0;
    freq /= cfg.n;
    const double sigma = std::sqrt(0.25 * 0.75 / cfg.n);
    for (int c = 0; c < cfg.d; ++c) EXPECT_NEAR(freq[c], 0.25, 3.0 * sigma + 1e-9);
  }
}

TEST(Contaminate, ReplacementCountArithmetic) {
  // delta=0.1, n=1000, p=25 selects exactly 2500 cells; with d=4 roughly a
  // quarter of the replacement draws coincide with the original value
  SimConfig cfg;
  cfg.p = 25;
  cfg.k = 2;
  cfg.d = 4;
  cfg.n = 1000;
  cfg.seed = 9;
  const Dataset data = simulate_dataset(sample_model(cfg), cfg);
  const Dataset noisy = contaminate(data, 0.1, 10);
  int changed = 0;
  for (std::size_t i = 0; i < data.values.size(); ++i)
    if (data.values[i] != noisy.values[i]) ++changed;
  EXPECT_LE(changed, 2500);
  EXPECT_GT(changed, 1700);  // 2500 * 3/4 minus a generous band
}

TEST(ContaminateRows, ReplacesWholeRows) {
  SimConfig cfg;
  cfg.p = 6;
  cfg.k = 2;
  cfg.d = 4;
  cfg.n = 400;
  cfg.seed = 11;
  const Dataset data = simulate_dataset(sample_model(cfg), cfg);
  const Dataset noisy = contaminate_rows(data, 0.25, 12);
  int touched_rows = 0;
  for (int i = 0; i < data.n; ++i) {
    bool differs = false;
    for (int j = 0; j < data.p; ++j) differs = differs || data(i, j) != noisy(i, j);
    touched_rows += differs;
  }
  EXPECT_LE(touched_rows, 100);
  EXPECT_GT(touched_rows, 80);
}

TEST(RmseAligned, ZeroCases) {
  SimConfig cfg;
  cfg.p = 4;
  cfg.k = 3;
  cfg.d = 4;
  cfg.seed = 13;
  const ModelParams truth = sample_model(cfg);
  EXPECT_EQ(rmse_aligned(truth, truth), 0.0);

  SplitMix64 rng(70);
  const Permutation plant = test::random_permutation(rng, 3);
  ModelParams permuted = truth;
  for (auto& th : permuted.thetas) th = apply_permutation(plant, th);
  EXPECT_NEAR(rmse_aligned(permuted, truth), 0.0, 1e-15);
}

TEST(RmseAligned, MatchesExhaustiveOracle) {
  SimConfig cfg;
  cfg.p = 5;
  cfg.k = 3;
  cfg.d = 4;
  cfg.seed = 14;
  const ModelParams truth = sample_model(cfg);
  SplitMix64 rng(71);
  ModelParams est = truth;
  for (auto& th : est.thetas)
    th = (th + test::random_matrix(rng, 4, 3, 0.0, 0.05)).cwiseMax(0.0);

  // exhaustive alignment oracle computed straight from the definition
  std::vector<int> perm{0, 1, 2};
  double best = std::numeric_limits<double>::infinity();
  std::size_t total = 0;
  for (const auto& th : truth.thetas) total += th.size();
  do {
    double sse = 0.0;
    for (int j = 0; j < truth.p(); ++j)
      sse += (apply_permutation(Permutation{perm}, est.thetas[j]) - truth.thetas[j])
                 .squaredNorm();
    best = std::min(best, std::sqrt(sse / total));
  } while (std::next_permutation(perm.begin(), perm.end()));
  EXPECT_NEAR(rmse_aligned(est, truth), best, 1e-12);
}

TEST(RmseAligned, ShapeMismatchThrows) {
  SimConfig a;
  a.p = 3;
  a.k = 2;
  a.d = 4;
  SimConfig b = a;
  b.k = 3;
  EXPECT_THROW(rmse_aligned(sample_model(a), sample_model(b)), std::invalid_argument);
}
