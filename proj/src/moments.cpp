// SPDX-License-Identifier: MIT
#include "gdlm/moments.hpp"

#include <omp.h>

#include <cmath>
#include <stdexcept>
#include <string>

namespace gdlm {

namespace {

void check_alpha(const VectorXd& alpha) {
  if (alpha.size() < 1) throw std::invalid_argument("alpha must be non-empty");
  for (Eigen::Index i = 0; i < alpha.size(); ++i)
    if (!(alpha[i] > 0.0)) throw std::invalid_argument("alpha entries must be positive");
}

void check_alpha0(double alpha0) {
  if (!(alpha0 > 0.0)) throw std::invalid_argument("alpha0 must be positive");
}

void check_var_index(const Dataset& data, int j, const char* name) {
  if (j < 0 || j >= data.p)
    throw std::invalid_argument(std::string("variable index ") + name + " out of range");
}

// Mode-wise multilinear transform: replaces the given mode's dimension by
// M.rows() contracting against M's columns.
Tensor3 mode_product(const Tensor3& T, const MatrixXd& M, int mode) {
  const int dims[3] = {T.d1(), T.d2(), T.d3()};
  if (M.cols() != dims[mode - 1])
    throw std::invalid_argument("mode_product: shape mismatch");
  const int m = static_cast<int>(M.rows());
  int nd[3] = {dims[0], dims[1], dims[2]};
  nd[mode - 1] = m;
  Tensor3 out(nd[0], nd[1], nd[2]);
  for (int l = 0; l < out.d3(); ++l)
    for (int j = 0; j < out.d2(); ++j)
      for (int i = 0; i < out.d1(); ++i) {
        double s = 0.0;
        switch (mode) {
          case 1:
            for (int u = 0; u < dims[0]; ++u) s += M(i, u) * T(u, j, l);
            break;
          case 2:
            for (int u = 0; u < dims[1]; ++u) s += M(j, u) * T(i, u, l);
            break;
          case 3:
            for (int u = 0; u < dims[2]; ++u) s += M(l, u) * T(i, j, u);
            break;
        }
        out(i, j, l) = s;
      }
  return out;
}

struct BlockLayout {
  std::vector<int> vars[3];
  std::vector<int> offsets[3];
  int D[3] = {0, 0, 0};
};

BlockLayout make_layout(const Dataset& data, const std::vector<int>& pi_j,
                        const std::vector<int>& pi_s, const std::vector<int>& pi_t) {
  const std::vector<int>* sets[3] = {&pi_j, &pi_s, &pi_t};
  BlockLayout L;
  std::vector<char> seen(data.p, 0);
  for (int m = 0; m < 3; ++m) {
    if (sets[m]->empty()) throw std::invalid_argument("block_tensor: empty index set");
    L.vars[m] = *sets[m];
    L.offsets[m].resize(sets[m]->size());
    int off = 0;
    for (std::size_t i = 0; i < sets[m]->size(); ++i) {
      const int v = (*sets[m])[i];
      check_var_index(data, v, "in block set");
      if (seen[v])
        throw std::invalid_argument("block_tensor: index sets must be pairwise disjoint");
      seen[v] = 1;
      L.offsets[m][i] = off;
      off += data.categories[v];
    }
    L.D[m] = off;
  }
  return L;
}

struct BlockAccum {
  VectorXd mean[3];   // stacked per-mode first-order sums
  MatrixXd pair_js;   // D1 x D2
  MatrixXd pair_jt;   // D1 x D3
  MatrixXd pair_st;   // D2 x D3
  Tensor3 triple;     // D1 x D2 x D3

  explicit BlockAccum(const BlockLayout& L) : triple(L.D[0], L.D[1], L.D[2]) {
    for (int m = 0; m < 3; ++m) mean[m] = VectorXd::Zero(L.D[m]);
    pair_js = MatrixXd::Zero(L.D[0], L.D[1]);
    pair_jt = MatrixXd::Zero(L.D[0], L.D[2]);
    pair_st = MatrixXd::Zero(L.D[1], L.D[2]);
  }

  void add(const BlockAccum& o) {
    for (int m = 0; m < 3; ++m) mean[m] += o.mean[m];
    pair_js += o.pair_js;
    pair_jt += o.pair_jt;
    pair_st += o.pair_st;
    double* a = triple.data();
    const double* b = o.triple.data();
    for (std::size_t i = 0; i < triple.size(); ++i) a[i] += b[i];
  }
};

// Sparse encoding of one observation: categorical variables contribute 1.0
// at their stacked category row, numeric (d == 1) variables their raw value
// at their single row.
struct Enc {
  int idx;
  double val;
};

void accumulate_range(const Dataset& data, const BlockLayout& L, int i_begin, int i_end,
                      BlockAccum& acc) {
  const std::size_t n1 = L.vars[0].size(), n2 = L.vars[1].size(), n3 = L.vars[2].size();
  std::vector<Enc> e1(n1), e2(n2), e3(n3);
  for (int i = i_begin; i < i_end; ++i) {
    for (int m = 0; m < 3; ++m) {
      std::vector<Enc>& e = m == 0 ? e1 : (m == 1 ? e2 : e3);
      for (std::size_t u = 0; u < L.vars[m].size(); ++u) {
        const int var = L.vars[m][u];
        const double y = data(i, var);
        if (data.categories[var] >= 2)
          e[u] = {L.offsets[m][u] + static_cast<int>(y), 1.0};
        else
          e[u] = {L.offsets[m][u], y};
      }
    }
    for (const Enc& a : e1) acc.mean[0][a.idx] += a.val;
    for (const Enc& b : e2) acc.mean[1][b.idx] += b.val;
    for (const Enc& c : e3) acc.mean[2][c.idx] += c.val;
    for (const Enc& a : e1)
      for (const Enc& b : e2) acc.pair_js(a.idx, b.idx) += a.val * b.val;
    for (const Enc& a : e1)
      for (const Enc& c : e3) acc.pair_jt(a.idx, c.idx) += a.val * c.val;
    for (const Enc& b : e2)
      for (const Enc& c : e3) acc.pair_st(b.idx, c.idx) += b.val * c.val;
    for (const Enc& a : e1)
      for (const Enc& b : e2) {
        const double ab = a.val * b.val;
        for (const Enc& c : e3) acc.triple(a.idx, b.idx, c.idx) += ab * c.val;
      }
  }
}

Tensor3 assemble_block(const Dataset& data, const BlockLayout& L, const BlockAccum& acc,
                       double alpha0) {
  const double inv_n = 1.0 / data.n;
  const double c1 = alpha0 / (alpha0 + 2.0);
  const double c2 = 2.0 * alpha0 * alpha0 / ((alpha0 + 1.0) * (alpha0 + 2.0));
  VectorXd m1 = acc.mean[0] * inv_n;
  VectorXd m2 = acc.mean[1] * inv_n;
  VectorXd m3 = acc.mean[2] * inv_n;
  MatrixXd Pjs = acc.pair_js * inv_n;
  MatrixXd Pjt = acc.pair_jt * inv_n;
  MatrixXd Pst = acc.pair_st * inv_n;
  Tensor3 out(L.D[0], L.D[1], L.D[2]);
  for (int c = 0; c < L.D[2]; ++c)
    for (int b = 0; b < L.D[1]; ++b)
      for (int a = 0; a < L.D[0]; ++a) {
        const double raw = acc.triple(a, b, c) * inv_n;
        out(a, b, c) = raw + c2 * m1[a] * m2[b] * m3[c] -
                       c1 * (m1[a] * Pst(b, c) + Pjt(a, c) * m2[b] + Pjs(a, b) * m3[c]);
      }
  return out;
}

Tensor3 block_tensor_impl(const Dataset& data, const std::vector<int>& pi_j,
                          const std::vector<int>& pi_s, const std::vector<int>& pi_t,
                          double alpha0, bool parallel) {
  data.validate();
  check_alpha0(alpha0);
  const BlockLayout L = make_layout(data, pi_j, pi_s, pi_t);
  BlockAccum total(L);
  if (!parallel || data.n < 2) {
    accumulate_range(data, L, 0, data.n, total);
  } else {
    const int nthreads = std::min(omp_get_max_threads(), data.n);
    std::vector<BlockAccum> parts(nthreads, BlockAccum(L));
#pragma omp parallel num_threads(nthreads)
    {
      const int t = omp_get_thread_num();
      const int lo = static_cast<int>(static_cast<long long>(data.n) * t / nthreads);
      const int hi = static_cast<int>(static_cast<long long>(data.n) * (t + 1) / nthreads);
      accumulate_range(data, L, lo, hi, parts[t]);
    }
    // Reduce in thread-index order; exact for categorical counts.
    for (int t = 0; t < nthreads; ++t) total.add(parts[t]);
  }
  return assemble_block(data, L, total, alpha0);
}

}  // namespace

std::vector<int> ModelParams::categories() const {
  std::vector<int> d(thetas.size());
  for (std::size_t j = 0; j < thetas.size(); ++j) d[j] = static_cast<int>(thetas[j].rows());
  return d;
}

void ModelParams::validate() const {
  if (thetas.empty()) throw std::invalid_argument("ModelParams: no variables");
  const int kk = k();
  for (std::size_t j = 0; j < thetas.size(); ++j) {
    const MatrixXd& th = thetas[j];
    if (th.cols() != kk) throw std::invalid_argument("ModelParams: inconsistent component count");
    for (int h = 0; h < kk; ++h) {
      double sum = 0.0;
      for (Eigen::Index a = 0; a < th.rows(); ++a) {
        if (th(a, h) < 0.0)
          throw std::invalid_argument("ModelParams: negative entry in theta " + std::to_string(j));
        sum += th(a, h);
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("ModelParams: theta " + std::to_string(j) + " column " +
                                    std::to_string(h) + " does not sum to 1");
    }
  }
  if (alpha.size() != 0) {
    check_alpha(alpha);
    if (std::abs(alpha.sum() - alpha0) > 1e-12)
      throw std::invalid_argument("ModelParams: alpha0 != sum(alpha)");
  }
}

void Dataset::validate() const {
  if (n < 1) throw std::invalid_argument("Dataset: need at least one observation");
  if (p < 1) throw std::invalid_argument("Dataset: need at least one variable");
  if (static_cast<int>(categories.size()) != p)
    throw std::invalid_argument("Dataset: categories length != p");
  if (values.size() != static_cast<std::size_t>(n) * p)
    throw std::invalid_argument("Dataset: value count != n*p");
  for (int j = 0; j < p; ++j)
    if (categories[j] < 1) throw std::invalid_argument("Dataset: category count must be >= 1");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < p; ++j) {
      const double v = (*this)(i, j);
      if (!std::isfinite(v)) throw std::invalid_argument("Dataset: non-finite value");
      if (categories[j] >= 2) {
        if (std::floor(v) != v || v < 0.0 || v >= categories[j])
          throw std::invalid_argument("Dataset: categorical value out of range at row " +
                                      std::to_string(i) + " col " + std::to_string(j));
      }
    }
}

VectorXd encode_observation(double y, int d) {
  if (d < 1) throw std::invalid_argument("encode_observation: d must be >= 1");
  if (d == 1) {
    VectorXd b(1);
    b[0] = y;
    return b;
  }
  if (std::floor(y) != y || y < 0.0 || y >= d)
    throw std::invalid_argument("encode_observation: category out of range");
  VectorXd b = VectorXd::Zero(d);
  b[static_cast<int>(y)] = 1.0;
  return b;
}

DirichletMoments dirichlet_moments(const VectorXd& alpha) {
  check_alpha(alpha);
  const int k = static_cast<int>(alpha.size());
  const double a0 = alpha.sum();
  DirichletMoments dm;
  dm.mean = alpha / a0;
  dm.second = (alpha * alpha.transpose() + MatrixXd(alpha.asDiagonal())) / (a0 * (a0 + 1.0));
  const double denom = a0 * (a0 + 1.0) * (a0 + 2.0);
  Tensor3 T(k, k, k);
  for (int c = 0; c < k; ++c)
    for (int b = 0; b < k; ++b)
      for (int a = 0; a < k; ++a) T(a, b, c) = alpha[a] * alpha[b] * alpha[c];
  for (int i = 0; i < k; ++i)
    for (int a = 0; a < k; ++a) {
      T(a, i, i) += alpha[a] * alpha[i];
      T(i, a, i) += alpha[i] * alpha[a];
      T(i, i, a) += alpha[i] * alpha[a];
    }
  for (int i = 0; i < k; ++i) T(i, i, i) += 2.0 * alpha[i];
  for (std::size_t idx = 0; idx < T.size(); ++idx) T.data()[idx] /= denom;
  dm.third = std::move(T);
  return dm;
}

MatrixXd population_pair(const MatrixXd& theta_j, const MatrixXd& theta_s,
                         const VectorXd& alpha) {
  check_alpha(alpha);
  const int k = static_cast<int>(alpha.size());
  if (theta_j.cols() != k || theta_s.cols() != k)
    throw std::invalid_argument("population_pair: theta column counts != k");
  const double a0 = alpha.sum();
  MatrixXd M = MatrixXd::Zero(theta_j.rows(), theta_s.rows());
  for (int h = 0; h < k; ++h)
    M += (alpha[h] / (a0 * (a0 + 1.0))) * theta_j.col(h) * theta_s.col(h).transpose();
  return M;
}

Tensor3 population_triple_cp(const MatrixXd& theta_j, const MatrixXd& theta_s,
                             const MatrixXd& theta_t, const VectorXd& alpha) {
  check_alpha(alpha);
  const int k = static_cast<int>(alpha.size());
  if (theta_j.cols() != k || theta_s.cols() != k || theta_t.cols() != k)
    throw std::invalid_argument("population_triple_cp: theta column counts != k");
  const double a0 = alpha.sum();
  const double denom = a0 * (a0 + 1.0) * (a0 + 2.0);
  Tensor3 T(static_cast<int>(theta_j.rows()), static_cast<int>(theta_s.rows()),
            static_cast<int>(theta_t.rows()));
  for (int h = 0; h < k; ++h) {
    const double w = 2.0 * alpha[h] / denom;
    for (int c = 0; c < T.d3(); ++c)
      for (int b = 0; b < T.d2(); ++b) {
        const double s = w * theta_s(b, h) * theta_t(c, h);
        for (int a = 0; a < T.d1(); ++a) T(a, b, c) += s * theta_j(a, h);
      }
  }
  return T;
}

Tensor3 population_triple_via_moments(const MatrixXd& theta_j, const MatrixXd& theta_s,
                                      const MatrixXd& theta_t, const VectorXd& alpha) {
  check_alpha(alpha);
  const int k = static_cast<int>(alpha.size());
  if (theta_j.cols() != k || theta_s.cols() != k || theta_t.cols() != k)
    throw std::invalid_argument("population_triple_via_moments: theta column counts != k");
  const DirichletMoments dm = dirichlet_moments(alpha);
  const double a0 = alpha.sum();
  const double c1 = a0 / (a0 + 2.0);
  const double c2 = 2.0 * a0 * a0 / ((a0 + 1.0) * (a0 + 2.0));

  Tensor3 E3 = mode_product(mode_product(mode_product(dm.third, theta_j, 1), theta_s, 2),
                            theta_t, 3);
  const VectorXd mj = theta_j * dm.mean;
  const VectorXd ms = theta_s * dm.mean;
  const VectorXd mt = theta_t * dm.mean;
  const MatrixXd Pst = theta_s * dm.second * theta_t.transpose();
  const MatrixXd Pjt = theta_j * dm.second * theta_t.transpose();
  const MatrixXd Pjs = theta_j * dm.second * theta_s.transpose();

  Tensor3 out(static_cast<int>(theta_j.rows()), static_cast<int>(theta_s.rows()),
              static_cast<int>(theta_t.rows()));
  for (int c = 0; c < out.d3(); ++c)
    for (int b = 0; b < out.d2(); ++b)
      for (int a = 0; a < out.d1(); ++a)
        out(a, b, c) = E3(a, b, c) + c2 * mj[a] * ms[b] * mt[c] -
                       c1 * (mj[a] * Pst(b, c) + Pjt(a, c) * ms[b] + Pjs(a, b) * mt[c]);
  return out;
}

MatrixXd empirical_pair(const Dataset& data, int j, int s, double alpha0) {
  data.validate();
  check_alpha0(alpha0);
  check_var_index(data, j, "j");
  check_var_index(data, s, "s");
  if (j == s) throw std::invalid_argument("empirical_pair: estimator needs distinct variables");
  const int dj = data.categories[j], ds = data.categories[s];
  MatrixXd P = MatrixXd::Zero(dj, ds);
  VectorXd mj = VectorXd::Zero(dj), ms = VectorXd::Zero(ds);
  for (int i = 0; i < data.n; ++i) {
    const double yj = data(i, j), ys = data(i, s);
    const int aj = dj >= 2 ? static_cast<int>(yj) : 0;
    const int as = ds >= 2 ? static_cast<int>(ys) : 0;
    const double vj = dj >= 2 ? 1.0 : yj;
    const double vs = ds >= 2 ? 1.0 : ys;
    P(aj, as) += vj * vs;
    mj[aj] += vj;
    ms[as] += vs;
  }
  const double inv_n = 1.0 / data.n;
  P *= inv_n;
  mj *= inv_n;
  ms *= inv_n;
  return P - (alpha0 / (alpha0 + 1.0)) * mj * ms.transpose();
}

Tensor3 empirical_triple(const Dataset& data, int j, int s, int t, double alpha0) {
  if (j == s || j == t || s == t)
    throw std::invalid_argument("empirical_triple: estimator needs pairwise distinct variables");
  return block_tensor_serial(data, {j}, {s}, {t}, alpha0);
}

Tensor3 block_tensor(const Dataset& data, const std::vector<int>& pi_j,
                     const std::vector<int>& pi_s, const std::vector<int>& pi_t,
                     double alpha0) {
  // Stay serial when already inside a parallel region (partition workers)
  // or when the accumulation is too small to amortize a region launch.
  const std::size_t work = static_cast<std::size_t>(data.n) * pi_j.size() * pi_s.size() * pi_t.size();
  return block_tensor_impl(data, pi_j, pi_s, pi_t, alpha0,
                           !omp_in_parallel() && work >= std::size_t{1} << 16);
}

Tensor3 block_tensor_serial(const Dataset& data, const std::vector<int>& pi_j,
                            const std::vector<int>& pi_s, const std::vector<int>& pi_t,
                            double alpha0) {
  return block_tensor_impl(data, pi_j, pi_s, pi_t, alpha0, false);
}

Tensor3 population_block(const std::vector<MatrixXd>& thetas, const VectorXd& alpha,
                         const std::vector<int>& pi_j, const std::vector<int>& pi_s,
                         const std::vector<int>& pi_t) {
  check_alpha(alpha);
  const std::vector<int>* sets[3] = {&pi_j, &pi_s, &pi_t};
  const int p = static_cast<int>(thetas.size());
  std::vector<char> seen(p, 0);
  int D[3] = {0, 0, 0};
  for (int m = 0; m < 3; ++m) {
    if (sets[m]->empty()) throw std::invalid_argument("population_block: empty index set");
    for (int v : *sets[m]) {
      if (v < 0 || v >= p) throw std::invalid_argument("population_block: index out of range");
      if (seen[v]) throw std::invalid_argument("population_block: index sets must be disjoint");
      seen[v] = 1;
      D[m] += static_cast<int>(thetas[v].rows());
    }
  }
  Tensor3 out(D[0], D[1], D[2]);
  int off_u = 0;
  for (int u : pi_j) {
    int off_v = 0;
    for (int v : pi_s) {
      int off_w = 0;
      for (int w : pi_t) {
        Tensor3 blk = population_triple_cp(thetas[u], thetas[v], thetas[w], alpha);
        for (int c = 0; c < blk.d3(); ++c)
          for (int b = 0; b < blk.d2(); ++b)
            for (int a = 0; a < blk.d1(); ++a)
              out(off_u + a, off_v + b, off_w + c) = blk(a, b, c);
        off_w += blk.d3();
      }
      off_v += static_cast<int>(thetas[v].rows());
    }
    off_u += static_cast<int>(thetas[u].rows());
  }
  return out;
}

double negative_fraction(const Tensor3& T) {
  if (T.size() == 0) return 0.0;
  std::size_t neg = 0;
  const double* p = T.data();
  for (std::size_t i = 0; i < T.size(); ++i)
    if (p[i] < 0.0) ++neg;
  return static_cast<double>(neg) / static_cast<double>(T.size());
}

}  // namespace gdlm
