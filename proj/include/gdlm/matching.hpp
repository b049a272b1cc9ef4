// SPDX-License-Identifier: MIT
#pragma once

#include <optional>
#include <vector>

#include "gdlm/tensor.hpp"

namespace gdlm {

// Column reordering: applying psi to M yields a matrix whose column h is
// column psi[h] of M.
struct Permutation {
  std::vector<int> psi;

  static Permutation identity(int k);
  Permutation inverse() const;
  int size() const { return static_cast<int>(psi.size()); }
  void validate() const;  // must be a bijection on [0, k)
};

bool operator==(const Permutation& a, const Permutation& b);

// Outcome of a column-matching attempt. `valid` means the per-column argmax
// was duplicate-free; when it was not, a greedy assignment repair fills in
// the permutation and `repaired` is set. A hard failure (rank-deficient
// Procrustes product) leaves `permutation` empty.
struct MatchReport {
  std::optional<Permutation> permutation;
  bool valid = false;
  bool repaired = false;
  double score = 0.0;
};

// Scales every column to unit Euclidean norm; zero columns are an error.
MatrixXd normalize_columns(const MatrixXd& M);

MatrixXd apply_permutation(const Permutation& psi, const MatrixXd& M);

// Pairs each reference component with the theta_new column of smallest
// angle: psi[s] = argmax_t (norm(theta_new)^T psi_ref norm(theta_ref))(t,s),
// ties toward the lowest index. Score is the mean matched cosine.
MatchReport match_smallest_angle(const MatrixXd& theta_ref, const Permutation& psi_ref,
                                 const MatrixXd& theta_new);

// Solves the orthogonal Procrustes relaxation: with the SVD
// norm(theta_new)^T (psi_ref norm(theta_ref)) = U S V^T the polar factor is
// U V^T, and psi[s] = argmax_t (U V^T)(t,s). When the argmax is
// duplicate-free the result minimizes |psi theta_new - psi_ref theta_ref|_F
// over all permutations (on the normalized matrices). Score is the trace
// alignment of the polar factor.
MatchReport match_procrustes(const MatrixXd& theta_ref, const Permutation& psi_ref,
                             const MatrixXd& theta_new);

// Exhaustive minimizer of |psi norm(theta_new) - norm(theta_ref)|_F^2;
// test oracle, k <= 8.
Permutation brute_force_match(const MatrixXd& theta_ref, const MatrixXd& theta_new);

// Sufficient condition for smallest-angle matching to be consistent: every
// column of theta_hat must deviate from the truth by a relative error below
//   1 - sqrt(1/2 + sqrt((1 + max offdiag cosine of truth) / 8)).
bool check_sam_bound(const MatrixXd& theta_truth, const MatrixXd& theta_hat);

struct ProcrustesBound {
  bool satisfied = false;
  bool singular = false;
};

// Sufficient condition for Procrustes matching with error matrix
// E = (psi theta)^T (theta_prime - psi theta):
//   |E|_2 < sigma_k(theta^T theta)   and
//   -(|E|_2 / rho) log(1 - rho / nu) < (2 - sqrt(2)) / 4,
// rho = sigma_1(E) + sigma_2(E), nu = sigma_k + sigma_{k-1} of theta^T theta.
// A singular theta^T theta reports unsatisfied with the singular flag set.
ProcrustesBound check_procrustes_bound(const MatrixXd& theta, const MatrixXd& theta_prime,
                                       const Permutation& psi);

}  // namespace gdlm
