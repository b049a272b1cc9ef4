// SPDX-License-Identifier: MIT
#include "gdlm/tensor.hpp"

#include <omp.h>

#include <cmath>
#include <stdexcept>

namespace gdlm {

namespace {

void check_dims(int d1, int d2, int d3) {
  if (d1 < 1 || d2 < 1 || d3 < 1)
    throw std::invalid_argument("Tensor3: dimensions must be positive");
}

}  // namespace

Tensor3::Tensor3(int d1, int d2, int d3) : dims_{d1, d2, d3} {
  check_dims(d1, d2, d3);
  v_.assign(static_cast<std::size_t>(d1) * d2 * d3, 0.0);
}

Tensor3::Tensor3(int d1, int d2, int d3, std::vector<double> entries)
    : dims_{d1, d2, d3}, v_(std::move(entries)) {
  check_dims(d1, d2, d3);
  if (v_.size() != static_cast<std::size_t>(d1) * d2 * d3)
    throw std::invalid_argument("Tensor3: entry count does not match dims");
  for (double x : v_)
    if (!std::isfinite(x)) throw std::invalid_argument("Tensor3: non-finite entry");
}

double Tensor3::max_abs() const {
  double m = 0.0;
  for (double x : v_) m = std::max(m, std::abs(x));
  return m;
}

double Tensor3::frobenius_norm() const {
  double s = 0.0;
  for (double x : v_) s += x * x;
  return std::sqrt(s);
}

Tensor3 outer3(const VectorXd& u, const VectorXd& v, const VectorXd& w) {
  Tensor3 T(static_cast<int>(u.size()), static_cast<int>(v.size()), static_cast<int>(w.size()));
  for (int l = 0; l < T.d3(); ++l)
    for (int j = 0; j < T.d2(); ++j) {
      const double vw = v[j] * w[l];
      for (int i = 0; i < T.d1(); ++i) T(i, j, l) = u[i] * vw;
    }
  return T;
}

MatrixXd unfold(const Tensor3& T, int mode) {
  const int d1 = T.d1(), d2 = T.d2(), d3 = T.d3();
  switch (mode) {
    case 1: {
      // Flat layout is already the mode-1 unfolding, column-major.
      return Eigen::Map<const MatrixXd>(T.data(), d1, static_cast<Eigen::Index>(d2) * d3);
    }
    case 2: {
      MatrixXd M(d2, static_cast<Eigen::Index>(d1) * d3);
      for (int l = 0; l < d3; ++l)
        for (int j = 0; j < d2; ++j)
          for (int i = 0; i < d1; ++i) M(j, i + static_cast<Eigen::Index>(d1) * l) = T(i, j, l);
      return M;
    }
    case 3: {
      MatrixXd M(d3, static_cast<Eigen::Index>(d1) * d2);
      for (int l = 0; l < d3; ++l)
        for (int j = 0; j < d2; ++j)
          for (int i = 0; i < d1; ++i) M(l, i + static_cast<Eigen::Index>(d1) * j) = T(i, j, l);
      return M;
    }
    default:
      throw std::invalid_argument("unfold: mode must be 1, 2 or 3");
  }
}

Tensor3 fold(const MatrixXd& M, int mode, std::array<int, 3> dims) {
  const int d1 = dims[0], d2 = dims[1], d3 = dims[2];
  check_dims(d1, d2, d3);
  if (mode < 1 || mode > 3) throw std::invalid_argument("fold: mode must be 1, 2 or 3");
  const Eigen::Index rows[3] = {d1, d2, d3};
  const Eigen::Index cols[3] = {static_cast<Eigen::Index>(d2) * d3,
                                static_cast<Eigen::Index>(d1) * d3,
                                static_cast<Eigen::Index>(d1) * d2};
  if (M.rows() != rows[mode - 1] || M.cols() != cols[mode - 1])
    throw std::invalid_argument("fold: matrix shape inconsistent with mode and dims");
  Tensor3 T(d1, d2, d3);
  for (int l = 0; l < d3; ++l)
    for (int j = 0; j < d2; ++j)
      for (int i = 0; i < d1; ++i) {
        switch (mode) {
          case 1: T(i, j, l) = M(i, j + static_cast<Eigen::Index>(d2) * l); break;
          case 2: T(i, j, l) = M(j, i + static_cast<Eigen::Index>(d1) * l); break;
          case 3: T(i, j, l) = M(l, i + static_cast<Eigen::Index>(d1) * j); break;
        }
      }
  return T;
}

MatrixXd khatri_rao(const MatrixXd& X, const MatrixXd& Y) {
  if (X.cols() != Y.cols())
    throw std::invalid_argument("khatri_rao: column counts differ");
  const Eigen::Index a = X.rows(), b = Y.rows(), r = X.cols();
  MatrixXd K(a * b, r);
  for (Eigen::Index h = 0; h < r; ++h)
    for (Eigen::Index i = 0; i < a; ++i)
      K.col(h).segment(i * b, b) = X(i, h) * Y.col(h);
  return K;
}

Tensor3 kruskal_to_dense(const KruskalFactors& F) {
  const int r = F.rank();
  if (F.B.cols() != r || F.C.cols() != r)
    throw std::invalid_argument("kruskal_to_dense: factor column counts differ");
  if (F.weights.size() != 0 && F.weights.size() != r)
    throw std::invalid_argument("kruskal_to_dense: weights length differs from rank");
  Tensor3 T(static_cast<int>(F.A.rows()), static_cast<int>(F.B.rows()), static_cast<int>(F.C.rows()));
  for (int h = 0; h < r; ++h) {
    const double w = F.weights.size() ? F.weights[h] : 1.0;
    for (int l = 0; l < T.d3(); ++l)
      for (int j = 0; j < T.d2(); ++j) {
        const double s = w * F.B(j, h) * F.C(l, h);
        for (int i = 0; i < T.d1(); ++i) T(i, j, l) += s * F.A(i, h);
      }
  }
  return T;
}

double frobenius_distance(const Tensor3& a, const Tensor3& b) {
  if (a.dims() != b.dims())
    throw std::invalid_argument("frobenius_distance: dimension mismatch");
  double s = 0.0;
  const double* pa = a.data();
  const double* pb = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = pa[i] - pb[i];
    s += d * d;
  }
  return std::sqrt(s);
}

namespace {

// One output row of the mode-wise MTTKRP; identical arithmetic order in the
// serial and parallel drivers.
template <int Mode>
void mttkrp_row(const Tensor3& T, const MatrixXd& F1, const MatrixXd& F2, int row,
                double* out, int r) {
  for (int h = 0; h < r; ++h) out[h] = 0.0;
  if constexpr (Mode == 1) {
    for (int l = 0; l < T.d3(); ++l)
      for (int j = 0; j < T.d2(); ++j) {
        const double t = T(row, j, l);
        if (t == 0.0) continue;
        for (int h = 0; h < r; ++h) out[h] += t * F1(j, h) * F2(l, h);
      }
  } else if constexpr (Mode == 2) {
    for (int l = 0; l < T.d3(); ++l)
      for (int i = 0; i < T.d1(); ++i) {
        const double t = T(i, row, l);
        if (t == 0.0) continue;
        for (int h = 0; h < r; ++h) out[h] += t * F1(i, h) * F2(l, h);
      }
  } else {
    for (int j = 0; j < T.d2(); ++j)
      for (int i = 0; i < T.d1(); ++i) {
        const double t = T(i, j, row);
        if (t == 0.0) continue;
        for (int h = 0; h < r; ++h) out[h] += t * F1(i, h) * F2(j, h);
      }
  }
}

MatrixXd mttkrp_impl(const Tensor3& T, int mode, const MatrixXd& F1, const MatrixXd& F2,
                     bool parallel) {
  if (mode < 1 || mode > 3) throw std::invalid_argument("mttkrp: mode must be 1, 2 or 3");
  const int r = static_cast<int>(F1.cols());
  if (F2.cols() != r) throw std::invalid_argument("mttkrp: factor column counts differ");
  const int sizes[3] = {T.d1(), T.d2(), T.d3()};
  const int other[3][2] = {{T.d2(), T.d3()}, {T.d1(), T.d3()}, {T.d1(), T.d2()}};
  if (F1.rows() != other[mode - 1][0] || F2.rows() != other[mode - 1][1])
    throw std::invalid_argument("mttkrp: factor row counts inconsistent with tensor dims");
  const int n = sizes[mode - 1];
  MatrixXd out(n, r);
  const auto row_work = [&](int row) {
    std::vector<double> acc(r);
    switch (mode) {
      case 1: mttkrp_row<1>(T, F1, F2, row, acc.data(), r); break;
      case 2: mttkrp_row<2>(T, F1, F2, row, acc.data(), r); break;
      case 3: mttkrp_row<3>(T, F1, F2, row, acc.data(), r); break;
    }
    for (int h = 0; h < r; ++h) out(row, h) = acc[h];
  };
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int row = 0; row < n; ++row) row_work(row);
  } else {
    for (int row = 0; row < n; ++row) row_work(row);
  }
  return out;
}

}  // namespace

MatrixXd mttkrp(const Tensor3& T, int mode, const MatrixXd& F1, const MatrixXd& F2) {
  // Stay serial when already inside a parallel region (partition workers)
  // or when the work is too small to amortize a region launch.
  const bool parallel = !omp_in_parallel() && T.size() * F1.cols() >= std::size_t{1} << 16;
  return mttkrp_impl(T, mode, F1, F2, parallel);
}

MatrixXd mttkrp_serial(const Tensor3& T, int mode, const MatrixXd& F1, const MatrixXd& F2) {
  return mttkrp_impl(T, mode, F1, F2, false);
}

}  // namespace gdlm
