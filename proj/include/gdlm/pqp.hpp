// SPDX-License-Identifier: MIT
#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "gdlm/tensor.hpp"

namespace gdlm {

// Nonnegative quadratic program min 1/2 x^T Q x + z^T x s.t. x >= 0,
// solved by multiplicative updates. gamma and phi are the update's
// damping arguments; monotone descent needs gamma >= (-Q)_+ 1.
struct QuadProgram {
  MatrixXd Q;
  VectorXd z;
  VectorXd gamma;
  VectorXd phi;

  void validate() const;
};

struct FactorizeOptions {
  int max_iters = 500;
  double rel_tol = 1e-6;
  double epsilon = 1e-10;
  std::uint64_t seed = 0;
  // Record the objective after every factor update (costs an extra
  // reconstruction per update; off by default).
  bool track_objective = false;
};

// One multiplicative update x * (Q^- x + z^-) / (Q^+ x + z^+) with
// Q^+ = (Q)_+ + diag(gamma), Q^- = (-Q)_+ + diag(gamma),
// z^+ = (z)_+ + phi,        z^- = (-z)_+ + phi.
// Nonnegativity of the iterate is preserved exactly.
VectorXd pqp_step(const VectorXd& x, const QuadProgram& qp);

// Damping matrix for row-wise updates, one row of Phi per row of Z:
//   Phi = ((lmin(Q)^(-1/2) sqrt(diag(Z Q^-1 Z^T)) diag(Q)^T - |Z|)_+) / 2
//         + epsilon 1 1^T.
// Q must be positive definite; a near-singular Q gets a small ridge
// (1e-10 tr(Q)/k when lmin <= 1e-12 tr(Q)/k) before inverting.
MatrixXd pqp_phi(const MatrixXd& Q, const MatrixXd& Z, double epsilon = 1e-10);

struct NqpResult {
  VectorXd x;
  bool converged = false;
  int iterations = 0;
};

NqpResult solve_nqp(const QuadProgram& qp, const FactorizeOptions& opts);

struct WnmfResult {
  MatrixXd W;
  MatrixXd H;
};

// One sweep of the epsilon-guarded masked multiplicative updates: H first
// against the current W, then W against the updated H. The masked objective
// |Omega * (Y - W H)|_F^2 is non-increasing under each update when the mask
// zeroes every negative entry of Y.
WnmfResult wnmf_step(const MatrixXd& W, const MatrixXd& H, const MatrixXd& Y,
                     const MatrixXd& Omega, double eps);

// |T - kruskal_to_dense(F)|_F
double tensor_objective(const Tensor3& T, const KruskalFactors& F);

struct FactorizeResult {
  KruskalFactors factors;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;                  // on the original (unscaled) tensor
  std::vector<double> objective_history;   // scaled-tensor objective per factor update
};

// Alternating row-wise multiplicative updates for
// min_{A,B,C >= 0} |T - sum_h A_h x B_h x C_h|_F. The tensor is pre-scaled
// by its max absolute entry, factors start i.i.d. uniform on (0,1), and the
// returned factors have unit column sums with the absorbed scales (times
// the pre-scaling) in weights. Works for tensors with negative entries.
FactorizeResult factorize(const Tensor3& T, int k, const FactorizeOptions& opts);

// Checks that one row/column-wise PQP sweep with mask weights Lambda = Omega,
// gamma = 0 and constant damping phi reproduces wnmf_step within 1e-12.
// phi_value defaults to eps, the value for which the two coincide.
bool pqp_matches_wnmf(const MatrixXd& W, const MatrixXd& H, const MatrixXd& Y,
                      const MatrixXd& Omega, double eps,
                      std::optional<double> phi_value = std::nullopt);

}  // namespace gdlm
