// SPDX-License-Identifier: MIT
#include "gdlm/sim.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "gdlm/matching.hpp"
#include "gdlm/rng.hpp"

namespace gdlm {

VectorXd SimConfig::resolved_theta_prior() const {
  if (theta_prior.size() == 0) return VectorXd::Constant(d, 0.5);
  return theta_prior;
}

void SimConfig::validate() const {
  if (p < 1 || k < 1 || d < 1 || n < 1)
    throw std::invalid_argument("SimConfig: counts must be positive");
  if (!(alpha_h > 0.0)) throw std::invalid_argument("SimConfig: alpha_h must be positive");
  if (!(delta >= 0.0 && delta <= 1.0))
    throw std::invalid_argument("SimConfig: delta must lie in [0,1]");
  const VectorXd prior = resolved_theta_prior();
  if (prior.size() != d)
    throw std::invalid_argument("SimConfig: theta_prior length differs from d");
  for (Eigen::Index i = 0; i < prior.size(); ++i)
    if (!(prior[i] > 0.0))
      throw std::invalid_argument("SimConfig: theta_prior entries must be positive");
}

ModelParams sample_model(const SimConfig& cfg) {
  cfg.validate();
  const VectorXd prior = cfg.resolved_theta_prior();
  SplitMix64 rng(derive_stream(cfg.seed, "model"));
  ModelParams params;
  params.thetas.resize(cfg.p);
  for (int j = 0; j < cfg.p; ++j) {
    MatrixXd th(cfg.d, cfg.k);
    for (int h = 0; h < cfg.k; ++h) th.col(h) = sample_dirichlet(rng, prior);
    params.thetas[j] = th;
  }
  params.alpha = VectorXd::Constant(cfg.k, cfg.alpha_h);
  params.alpha0 = params.alpha.sum();
  return params;
}

namespace {

Dataset simulate_impl(const ModelParams& params, const SimConfig& cfg, bool parallel) {
  cfg.validate();
  params.validate();
  if (params.p() != cfg.p || params.k() != cfg.k)
    throw std::invalid_argument("simulate_dataset: model shape differs from config");
  if (params.alpha.size() == 0)
    throw std::invalid_argument("simulate_dataset: model carries no alpha vector");
  for (const MatrixXd& th : params.thetas)
    if (th.rows() < 2)
      throw std::invalid_argument("simulate_dataset: only categorical variables are simulated");

  Dataset data;
  data.n = cfg.n;
  data.p = cfg.p;
  data.categories = params.categories();
  data.values.resize(static_cast<std::size_t>(cfg.n) * cfg.p);

  const auto row_work = [&](int i) {
    SplitMix64 rng(derive_stream(cfg.seed, "row", static_cast<std::uint64_t>(i)));
    const VectorXd x = sample_dirichlet(rng, params.alpha);
    for (int j = 0; j < cfg.p; ++j) {
      const int h = sample_categorical(rng, x);
      const int y = sample_categorical(rng, params.thetas[j].col(h));
      data.values[static_cast<std::size_t>(i) * cfg.p + j] = y;
    }
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < cfg.n; ++i) row_work(i);
  } else {
    for (int i = 0; i < cfg.n; ++i) row_work(i);
  }
  return data;
}

}  // namespace

Dataset simulate_dataset(const ModelParams& params, const SimConfig& cfg) {
  return simulate_impl(params, cfg, true);
}

Dataset simulate_dataset_serial(const ModelParams& params, const SimConfig& cfg) {
  return simulate_impl(params, cfg, false);
}

Dataset contaminate(const Dataset& data, double delta, std::uint64_t seed) {
  data.validate();
  if (!(delta >= 0.0 && delta <= 1.0))
    throw std::invalid_argument("contaminate: delta must lie in [0,1]");
  Dataset out = data;
  const std::size_t cells = static_cast<std::size_t>(data.n) * data.p;
  const std::size_t m = static_cast<std::size_t>(delta * static_cast<double>(cells));
  if (m == 0) return out;
  SplitMix64 rng(derive_stream(seed, "contaminate"));
  // Partial Fisher-Yates picks m distinct cells.
  std::vector<std::size_t> idx(cells);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + rng.next_below(cells - i);
    std::swap(idx[i], idx[j]);
  }
  for (std::size_t i = 0; i < m; ++i) {
    const int row = static_cast<int>(idx[i] / data.p);
    const int col = static_cast<int>(idx[i] % data.p);
    const int d = data.categories[col];
    out(row, col) = d >= 2 ? static_cast<double>(rng.next_below(d)) : out(row, col);
  }
  return out;
}

Dataset contaminate_rows(const Dataset& data, double delta, std::uint64_t seed) {
  data.validate();
  if (!(delta >= 0.0 && delta <= 1.0))
    throw std::invalid_argument("contaminate_rows: delta must lie in [0,1]");
  Dataset out = data;
  const std::size_t m = static_cast<std::size_t>(delta * static_cast<double>(data.n));
  if (m == 0) return out;
  SplitMix64 rng(derive_stream(seed, "contaminate-rows"));
  std::vector<std::size_t> idx(data.n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t j = i + rng.next_below(data.n - i);
    std::swap(idx[i], idx[j]);
  }
  for (std::size_t i = 0; i < m; ++i) {
    const int row = static_cast<int>(idx[i]);
    for (int col = 0; col < data.p; ++col) {
      const int d = data.categories[col];
      if (d >= 2) out(row, col) = static_cast<double>(rng.next_below(d));
    }
  }
  return out;
}

double rmse_aligned(const ModelParams& est, const ModelParams& truth) {
  if (est.p() != truth.p() || est.k() != truth.k())
    throw std::invalid_argument("rmse_aligned: shape mismatch");
  const int p = truth.p(), k = truth.k();
  std::size_t total = 0;
  for (int j = 0; j < p; ++j) {
    if (est.thetas[j].rows() != truth.thetas[j].rows())
      throw std::invalid_argument("rmse_aligned: category mismatch at variable " + std::to_string(j));
    total += static_cast<std::size_t>(truth.thetas[j].rows()) * k;
  }

  const auto sse_for = [&](const Permutation& psi) {
    double sse = 0.0;
    for (int j = 0; j < p; ++j)
      sse += (apply_permutation(psi, est.thetas[j]) - truth.thetas[j]).squaredNorm();
    return sse;
  };

  double best;
  if (k <= 8) {
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    best = std::numeric_limits<double>::infinity();
    do {
      best = std::min(best, sse_for(Permutation{perm}));
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    // Stack every variable's parameters and let Procrustes pick the labels.
    std::size_t rows = 0;
    for (int j = 0; j < p; ++j) rows += truth.thetas[j].rows();
    MatrixXd S_est(rows, k), S_truth(rows, k);
    std::size_t off = 0;
    for (int j = 0; j < p; ++j) {
      S_est.middleRows(off, est.thetas[j].rows()) = est.thetas[j];
      S_truth.middleRows(off, truth.thetas[j].rows()) = truth.thetas[j];
      off += truth.thetas[j].rows();
    }
    const MatchReport rep = match_procrustes(S_truth, Permutation::identity(k), S_est);
    if (!rep.permutation)
      throw std::runtime_error("rmse_aligned: Procrustes alignment failed");
    best = sse_for(*rep.permutation);
  }
  return std::sqrt(best / static_cast<double>(total));
}

}  // namespace gdlm
