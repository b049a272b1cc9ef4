// SPDX-License-Identifier: MIT
#include "gdlm/matching.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace gdlm {

namespace {

// Per-column argmax over rows, ties toward the lowest row index.
std::vector<int> column_argmax(const MatrixXd& S) {
  std::vector<int> out(S.cols());
  for (Eigen::Index s = 0; s < S.cols(); ++s) {
    int best = 0;
    for (Eigen::Index t = 1; t < S.rows(); ++t)
      if (S(t, s) > S(best, s)) best = static_cast<int>(t);
    out[s] = best;
  }
  return out;
}

bool has_duplicates(const std::vector<int>& v) {
  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

// Greedy assignment on the similarity matrix: repeatedly take the largest
// unused (row, column) entry, ties toward lower row then lower column.
std::vector<int> greedy_repair(const MatrixXd& S) {
  const int k = static_cast<int>(S.cols());
  struct Cell {
    double v;
    int t, s;
  };
  std::vector<Cell> cells;
  cells.reserve(static_cast<std::size_t>(k) * k);
  for (int t = 0; t < k; ++t)
    for (int s = 0; s < k; ++s) cells.push_back({S(t, s), t, s});
  std::sort(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
    if (a.v != b.v) return a.v > b.v;
    if (a.t != b.t) return a.t < b.t;
    return a.s < b.s;
  });
  std::vector<int> psi(k, -1);
  std::vector<char> row_used(k, 0);
  int assigned = 0;
  for (const Cell& c : cells) {
    if (assigned == k) break;
    if (row_used[c.t] || psi[c.s] >= 0) continue;
    psi[c.s] = c.t;
    row_used[c.t] = 1;
    ++assigned;
  }
  return psi;
}

MatchReport report_from_similarity(const MatrixXd& S) {
  MatchReport rep;
  std::vector<int> psi = column_argmax(S);
  if (has_duplicates(psi)) {
    psi = greedy_repair(S);
    rep.valid = false;
    rep.repaired = true;
  } else {
    rep.valid = true;
  }
  double score = 0.0;
  for (std::size_t s = 0; s < psi.size(); ++s) score += S(psi[s], static_cast<int>(s));
  rep.score = score / static_cast<double>(psi.size());
  rep.permutation = Permutation{psi};
  return rep;
}

void check_same_k(const MatrixXd& a, const MatrixXd& b, const Permutation& psi) {
  if (a.cols() != b.cols()) throw std::invalid_argument("matching: column counts differ");
  if (psi.size() != a.cols()) throw std::invalid_argument("matching: permutation length differs");
  psi.validate();
}

}  // namespace

Permutation Permutation::identity(int k) {
  Permutation p;
  p.psi.resize(k);
  std::iota(p.psi.begin(), p.psi.end(), 0);
  return p;
}

Permutation Permutation::inverse() const {
  validate();
  Permutation inv;
  inv.psi.assign(psi.size(), 0);
  for (std::size_t h = 0; h < psi.size(); ++h) inv.psi[psi[h]] = static_cast<int>(h);
  return inv;
}

void Permutation::validate() const {
  const int k = size();
  std::vector<char> seen(k, 0);
  for (int v : psi) {
    if (v < 0 || v >= k || seen[v])
      throw std::invalid_argument("Permutation: not a bijection on [0,k)");
    seen[v] = 1;
  }
}

bool operator==(const Permutation& a, const Permutation& b) { return a.psi == b.psi; }

MatrixXd normalize_columns(const MatrixXd& M) {
  MatrixXd out = M;
  for (Eigen::Index h = 0; h < M.cols(); ++h) {
    const double norm = M.col(h).norm();
    if (norm == 0.0) throw std::invalid_argument("normalize_columns: zero column");
    out.col(h) /= norm;
  }
  return out;
}

MatrixXd apply_permutation(const Permutation& psi, const MatrixXd& M) {
  if (psi.size() != M.cols())
    throw std::invalid_argument("apply_permutation: length differs from column count");
  psi.validate();
  MatrixXd out(M.rows(), M.cols());
  for (int h = 0; h < psi.size(); ++h) out.col(h) = M.col(psi.psi[h]);
  return out;
}

MatchReport match_smallest_angle(const MatrixXd& theta_ref, const Permutation& psi_ref,
                                 const MatrixXd& theta_new) {
  check_same_k(theta_ref, theta_new, psi_ref);
  const MatrixXd ref = apply_permutation(psi_ref, normalize_columns(theta_ref));
  const MatrixXd G = normalize_columns(theta_new).transpose() * ref;
  return report_from_similarity(G);
}

MatchReport match_procrustes(const MatrixXd& theta_ref, const Permutation& psi_ref,
                             const MatrixXd& theta_new) {
  check_same_k(theta_ref, theta_new, psi_ref);
  const MatrixXd ref = apply_permutation(psi_ref, normalize_columns(theta_ref));
  const MatrixXd P = normalize_columns(theta_new).transpose() * ref;
  Eigen::JacobiSVD<MatrixXd> svd(P, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (sv(0) <= 0.0 || sv(sv.size() - 1) <= 1e-12 * sv(0)) {
    MatchReport rep;  // rank-deficient product, no usable polar factor
    return rep;
  }
  const MatrixXd polar = svd.matrixU() * svd.matrixV().transpose();
  return report_from_similarity(polar);
}

Permutation brute_force_match(const MatrixXd& theta_ref, const MatrixXd& theta_new) {
  if (theta_ref.cols() != theta_new.cols())
    throw std::invalid_argument("brute_force_match: column counts differ");
  const int k = static_cast<int>(theta_ref.cols());
  if (k > 8) throw std::invalid_argument("brute_force_match: k too large (max 8)");
  const MatrixXd ref = normalize_columns(theta_ref);
  const MatrixXd cand = normalize_columns(theta_new);
  std::vector<int> perm(k);
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_err = std::numeric_limits<double>::infinity();
  do {
    double err = 0.0;
    for (int h = 0; h < k; ++h) err += (cand.col(perm[h]) - ref.col(h)).squaredNorm();
    if (err < best_err) {
      best_err = err;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return Permutation{best};
}

bool check_sam_bound(const MatrixXd& theta_truth, const MatrixXd& theta_hat) {
  if (theta_truth.rows() != theta_hat.rows() || theta_truth.cols() != theta_hat.cols())
    throw std::invalid_argument("check_sam_bound: shape mismatch");
  const int k = static_cast<int>(theta_truth.cols());
  const MatrixXd bar = normalize_columns(theta_truth);
  double max_off = -1.0;  // cos of the angle between identical directions is 1
  for (int u = 0; u < k; ++u)
    for (int v = u + 1; v < k; ++v) max_off = std::max(max_off, bar.col(u).dot(bar.col(v)));
  const double bound = 1.0 - std::sqrt(0.5 + std::sqrt((1.0 + max_off) / 8.0));
  for (int h = 0; h < k; ++h) {
    const double denom = theta_truth.col(h).norm();
    if (denom == 0.0) throw std::invalid_argument("check_sam_bound: zero truth column");
    const double rel = (theta_truth.col(h) - theta_hat.col(h)).norm() / denom;
    if (!(rel < bound)) return false;
  }
  return true;
}

ProcrustesBound check_procrustes_bound(const MatrixXd& theta, const MatrixXd& theta_prime,
                                       const Permutation& psi) {
  check_same_k(theta, theta_prime, psi);
  if (theta.rows() != theta_prime.rows())
    throw std::invalid_argument("check_procrustes_bound: row counts differ");
  const int k = static_cast<int>(theta.cols());
  ProcrustesBound out;

  const MatrixXd G = theta.transpose() * theta;
  Eigen::JacobiSVD<MatrixXd> svd_g(G);
  const auto& sg = svd_g.singularValues();
  if (sg(0) <= 0.0 || sg(k - 1) <= 1e-12 * sg(0)) {
    out.singular = true;
    return out;
  }

  const MatrixXd aligned = apply_permutation(psi, theta);
  const MatrixXd E = aligned.transpose() * (theta_prime - aligned);
  Eigen::JacobiSVD<MatrixXd> svd_e(E);
  const auto& se = svd_e.singularValues();
  const double e2 = se(0);  // spectral norm
  if (!(e2 < sg(k - 1))) return out;
  if (e2 == 0.0) {
    out.satisfied = true;
    return out;
  }
  const double rho = k >= 2 ? se(0) + se(1) : se(0);
  const double nu = k >= 2 ? sg(k - 1) + sg(k - 2) : 2.0 * sg(0);
  if (!(rho < nu)) return out;
  const double lhs = -(e2 / rho) * std::log1p(-rho / nu);
  out.satisfied = lhs < (2.0 - std::sqrt(2.0)) / 4.0;
  return out;
}

}  // namespace gdlm
