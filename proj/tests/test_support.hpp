// SPDX-License-Identifier: MIT
#pragma once

#include <limits>
#include <vector>

#include "gdlm/matching.hpp"
#include "gdlm/rng.hpp"
#include "gdlm/tensor.hpp"

namespace gdlm::test {

inline MatrixXd random_matrix(SplitMix64& rng, int rows, int cols, double lo = 0.0,
                              double hi = 1.0) {
  MatrixXd M(rows, cols);
  for (int h = 0; h < cols; ++h)
    for (int i = 0; i < rows; ++i) M(i, h) = lo + (hi - lo) * rng.next_double();
  return M;
}

inline VectorXd random_vector(SplitMix64& rng, int n, double lo = 0.0, double hi = 1.0) {
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * rng.next_double();
  return v;
}

// Columns on the probability simplex.
inline MatrixXd random_stochastic(SplitMix64& rng, int d, int k) {
  MatrixXd M(d, k);
  for (int h = 0; h < k; ++h) M.col(h) = sample_dirichlet(rng, VectorXd::Constant(d, 0.5));
  return M;
}

inline Tensor3 random_tensor(SplitMix64& rng, int d1, int d2, int d3, double lo = -1.0,
                             double hi = 1.0) {
  Tensor3 T(d1, d2, d3);
  for (std::size_t i = 0; i < T.size(); ++i) T.data()[i] = lo + (hi - lo) * rng.next_double();
  return T;
}

inline Permutation random_permutation(SplitMix64& rng, int k) {
  Permutation p = Permutation::identity(k);
  for (std::size_t i = p.psi.size(); i > 1; --i)
    std::swap(p.psi[i - 1], p.psi[rng.next_below(i)]);
  return p;
}

// Exhaustive KKT search over all supports; the unique solution of a
// positive-definite nonnegative quadratic program.
inline VectorXd nqp_active_set_oracle(const MatrixXd& Q, const VectorXd& z) {
  const int m = static_cast<int>(Q.rows());
  VectorXd best;
  double best_obj = std::numeric_limits<double>::infinity();
  for (unsigned mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> support;
    for (int i = 0; i < m; ++i)
      if (mask & (1u << i)) support.push_back(i);
    VectorXd x = VectorXd::Zero(m);
    if (!support.empty()) {
      const int s = static_cast<int>(support.size());
      MatrixXd Qs(s, s);
      VectorXd zs(s);
      for (int a = 0; a < s; ++a) {
        zs[a] = z[support[a]];
        for (int b = 0; b < s; ++b) Qs(a, b) = Q(support[a], support[b]);
      }
      const VectorXd xs = Qs.ldlt().solve(-zs);
      if ((xs.array() < -1e-12).any()) continue;
      for (int a = 0; a < s; ++a) x[support[a]] = std::max(xs[a], 0.0);
    }
    const VectorXd grad = Q * x + z;
    bool kkt = true;
    for (int i = 0; i < m; ++i)
      if (x[i] == 0.0 && grad[i] < -1e-9) kkt = false;
    if (!kkt) continue;
    const double obj = 0.5 * x.dot(Q * x) + z.dot(x);
    if (obj < best_obj) {
      best_obj = obj;
      best = x;
    }
  }
  return best;
}

}  // namespace gdlm::test
