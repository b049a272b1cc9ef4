// SPDX-License-Identifier: MIT
#pragma once

#include <Eigen/Dense>
#include <array>
#include <cassert>
#include <cstddef>
#include <vector>

namespace gdlm {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Dense real 3-way tensor. Storage is flat with the first index fastest:
// entry (i1,i2,i3) lives at i1 + d1*(i2 + d2*i3), so the mode-1 unfolding
// is a plain column-major view of the buffer.
class Tensor3 {
 public:
  Tensor3() : dims_{0, 0, 0} {}
  Tensor3(int d1, int d2, int d3);
  // Takes ownership of `entries` (same flat layout); rejects NaN/Inf.
  Tensor3(int d1, int d2, int d3, std::vector<double> entries);

  int d1() const { return dims_[0]; }
  int d2() const { return dims_[1]; }
  int d3() const { return dims_[2]; }
  std::array<int, 3> dims() const { return dims_; }
  std::size_t size() const { return v_.size(); }

  double operator()(int i1, int i2, int i3) const {
    assert(i1 >= 0 && i1 < dims_[0] && i2 >= 0 && i2 < dims_[1] && i3 >= 0 && i3 < dims_[2]);
    return v_[static_cast<std::size_t>(i1) + dims_[0] * (static_cast<std::size_t>(i2) + static_cast<std::size_t>(dims_[1]) * i3)];
  }
  double& operator()(int i1, int i2, int i3) {
    assert(i1 >= 0 && i1 < dims_[0] && i2 >= 0 && i2 < dims_[1] && i3 >= 0 && i3 < dims_[2]);
    return v_[static_cast<std::size_t>(i1) + dims_[0] * (static_cast<std::size_t>(i2) + static_cast<std::size_t>(dims_[1]) * i3)];
  }

  const double* data() const { return v_.data(); }
  double* data() { return v_.data(); }

  double max_abs() const;
  double frobenius_norm() const;

 private:
  std::array<int, 3> dims_;
  std::vector<double> v_;
};

// CP factors A (d1 x r), B (d2 x r), C (d3 x r) plus optional per-column
// weights (empty means all ones).
struct KruskalFactors {
  MatrixXd A;
  MatrixXd B;
  MatrixXd C;
  VectorXd weights;

  int rank() const { return static_cast<int>(A.cols()); }
};

Tensor3 outer3(const VectorXd& u, const VectorXd& v, const VectorXd& w);

// Mode-j unfolding. Mode 1 sends (i1,i2,i3) to row i1, column i2 + d2*i3;
// modes 2 and 3 keep the remaining indices in ascending mode order, earlier
// mode fastest. Under this layout T_(1) = A (C kr B)^T and its mode-2/3
// analogues hold for Kruskal tensors.
MatrixXd unfold(const Tensor3& T, int mode);

// Exact inverse of unfold for the same mode and dims.
Tensor3 fold(const MatrixXd& M, int mode, std::array<int, 3> dims);

// Column-wise Kronecker product; the second argument's index varies fastest.
MatrixXd khatri_rao(const MatrixXd& X, const MatrixXd& Y);

Tensor3 kruskal_to_dense(const KruskalFactors& F);

double frobenius_distance(const Tensor3& a, const Tensor3& b);

// Matricized tensor times Khatri-Rao product without materializing the
// unfolding: for mode 1, out(i,h) = sum_{j,l} T(i,j,l) F1(j,h) F2(l,h),
// where F1/F2 are the factors of the two remaining modes in ascending
// order. Equals unfold(T,mode) * khatri_rao(F2,F1).
//
// The parallel version splits output rows across OpenMP threads; every row
// is computed in the same order as the serial reference, so the two agree
// bit for bit.
MatrixXd mttkrp(const Tensor3& T, int mode, const MatrixXd& F1, const MatrixXd& F2);
MatrixXd mttkrp_serial(const Tensor3& T, int mode, const MatrixXd& F1, const MatrixXd& F2);

}  // namespace gdlm
