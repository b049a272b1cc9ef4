// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>

#include "gdlm/moments.hpp"

namespace gdlm {

struct SimConfig {
  int p = 25;
  int k = 3;
  int d = 4;                  // categories per variable
  double alpha_h = 0.1;       // per-component Dirichlet concentration
  VectorXd theta_prior;       // defaults to (0.5, ..., 0.5) of length d
  int n = 100;
  double delta = 0.0;         // contamination fraction
  std::uint64_t seed = 0;

  VectorXd resolved_theta_prior() const;
  void validate() const;
};

// Per-variable emission columns drawn i.i.d. from Dir(theta_prior).
ModelParams sample_model(const SimConfig& cfg);

// Generative process per row: membership x ~ Dir(alpha); for each variable
// draw a component from x, then a category from that component's column.
// Row streams are derived from (seed, row), so the parallel version is
// bit-identical to the serial reference for any thread count.
Dataset simulate_dataset(const ModelParams& params, const SimConfig& cfg);
Dataset simulate_dataset_serial(const ModelParams& params, const SimConfig& cfg);

// Replaces exactly floor(delta * n * p) cells, chosen uniformly without
// replacement, by uniform draws over the cell's categories.
Dataset contaminate(const Dataset& data, double delta, std::uint64_t seed);

// Row variant: replaces floor(delta * n) whole observations.
Dataset contaminate_rows(const Dataset& data, double delta, std::uint64_t seed);

// RMSE over all theta entries after the best global column permutation
// (exhaustive for k <= 8, Procrustes matching on the stacked parameter
// matrix above that).
double rmse_aligned(const ModelParams& est, const ModelParams& truth);

}  // namespace gdlm
