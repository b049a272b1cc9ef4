// SPDX-License-Identifier: MIT
#pragma once

#include <vector>

#include "gdlm/tensor.hpp"

namespace gdlm {

// Per-variable emission matrices theta_j (d_j x k, nonnegative columns
// summing to one) together with the Dirichlet concentration. Fit results
// leave `alpha` empty and carry only alpha0.
struct ModelParams {
  std::vector<MatrixXd> thetas;
  VectorXd alpha;
  double alpha0 = 0.0;

  int p() const { return static_cast<int>(thetas.size()); }
  int k() const { return thetas.empty() ? 0 : static_cast<int>(thetas[0].cols()); }
  std::vector<int> categories() const;

  // Throws when a theta column is negative or off unit sum (1e-9), or when
  // alpha is present but alpha0 != sum(alpha) within 1e-12.
  void validate() const;
};

// n x p observation matrix. Columns with d_j >= 2 are categorical and hold
// integers in [0, d_j); columns with d_j == 1 are numeric and pass through
// the estimators as raw values.
struct Dataset {
  int n = 0;
  int p = 0;
  std::vector<int> categories;
  std::vector<double> values;  // row-major n x p

  double operator()(int i, int j) const { return values[static_cast<std::size_t>(i) * p + j]; }
  double& operator()(int i, int j) { return values[static_cast<std::size_t>(i) * p + j]; }

  void validate() const;
};

// Indicator encoding e_y for categorical variables; numeric (d == 1)
// observations come back as a length-1 vector holding the raw value.
VectorXd encode_observation(double y, int d);

struct DirichletMoments {
  VectorXd mean;    // E[x]
  MatrixXd second;  // E[x kron x]
  Tensor3 third;    // E[x kron x kron x]
};

// Exact population moments of Dir(alpha); each moment sums to one.
DirichletMoments dirichlet_moments(const VectorXd& alpha);

// sum_h alpha_h / (alpha0 (alpha0+1)) theta_j[:,h] theta_s[:,h]^T
MatrixXd population_pair(const MatrixXd& theta_j, const MatrixXd& theta_s,
                         const VectorXd& alpha);

// sum_h 2 alpha_h / (alpha0 (alpha0+1)(alpha0+2)) outer of the three columns.
Tensor3 population_triple_cp(const MatrixXd& theta_j, const MatrixXd& theta_s,
                             const MatrixXd& theta_t, const VectorXd& alpha);

// The same quantity evaluated through the estimator's defining identity
// with exact Dirichlet moments substituted for the sample averages. Kept
// as an algebraically independent route from population_triple_cp.
Tensor3 population_triple_via_moments(const MatrixXd& theta_j, const MatrixXd& theta_s,
                                      const MatrixXd& theta_t, const VectorXd& alpha);

// Centered second-order estimator for distinct variables j != s:
//   E_hat[b_j b_s^T] - alpha0/(alpha0+1) mean_j mean_s^T
MatrixXd empirical_pair(const Dataset& data, int j, int s, double alpha0);

// Centered third-order estimator for pairwise distinct j, s, t. May contain
// negative entries at finite n.
Tensor3 empirical_triple(const Dataset& data, int j, int s, int t, double alpha0);

// Block tensor over three pairwise disjoint ordered index sets; the
// (u,v,w) block is the empirical triple estimator for that variable
// combination. The parallel version accumulates per-thread counts over
// sample ranges; for categorical data every accumulated value is an exact
// integer, so it is bit-identical to the serial reference for any thread
// count.
Tensor3 block_tensor(const Dataset& data, const std::vector<int>& pi_j,
                     const std::vector<int>& pi_s, const std::vector<int>& pi_t,
                     double alpha0);
Tensor3 block_tensor_serial(const Dataset& data, const std::vector<int>& pi_j,
                            const std::vector<int>& pi_s, const std::vector<int>& pi_t,
                            double alpha0);

// Population analogue of block_tensor, assembled block by block from
// population_triple_cp.
Tensor3 population_block(const std::vector<MatrixXd>& thetas, const VectorXd& alpha,
                         const std::vector<int>& pi_j, const std::vector<int>& pi_s,
                         const std::vector<int>& pi_t);

// Fraction of strictly negative entries.
double negative_fraction(const Tensor3& T);

}  // namespace gdlm
