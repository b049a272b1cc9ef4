// SPDX-License-Identifier: MIT
#include "gdlm/tensor.hpp"

#include <gtest/gtest.h>

#include "test_support.hpp"

using namespace gdlm;

namespace {

// The 2x2x2 positive tensor whose unique rank-2 decomposition has a
// negative factor entry; its printed factors and mode-1 unfolding are used
// as exact fixtures in several suites.
KruskalFactors counterexample_factors() {
  KruskalFactors F;
  F.A = MatrixXd{{1, 1}, {1, 0}};
  F.B = MatrixXd{{2, -1}, {2, 1}};
  F.C = MatrixXd{{1, 1}, {1, 0}};
  return F;
}

MatrixXd counterexample_unfolding() {
  return MatrixXd{{1, 3, 2, 2}, {2, 2, 2, 2}};
}

}  // namespace

TEST(Outer3, BasisVectors) {
  VectorXd e0 = VectorXd::Zero(2);
  e0[0] = 1.0;
  const Tensor3 T = outer3(e0, e0, e0);
  EXPECT_EQ(T(0, 0, 0), 1.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < T.size(); ++i) sum += std::abs(T.data()[i]);
  EXPECT_EQ(sum, 1.0);
}

TEST(Outer3, DirectDefinition) {
  VectorXd u(2), v(1), w(2);
  u << 1, 2;
  v << 3;
  w << 1, 1;
  const Tensor3 T = outer3(u, v, w);
  EXPECT_EQ(T(0, 0, 0), 3.0);
  EXPECT_EQ(T(0, 0, 1), 3.0);
  EXPECT_EQ(T(1, 0, 0), 6.0);
  EXPECT_EQ(T(1, 0, 1), 6.0);
}

TEST(Outer3, NormFactorizes) {
  SplitMix64 rng(1);
  const VectorXd u = test::random_vector(rng, 4, -1, 1);
  const VectorXd v = test::random_vector(rng, 3, -1, 1);
  const VectorXd w = test::random_vector(rng, 5, -1, 1);
  const Tensor3 T = outer3(u, v, w);
  EXPECT_NEAR(T.frobenius_norm(), u.norm() * v.norm() * w.norm(), 1e-12);
}

TEST(Unfold, CounterexampleMode1) {
  const Tensor3 T = kruskal_to_dense(counterexample_factors());
  const MatrixXd M = unfold(T, 1);
  EXPECT_EQ(M, counterexample_unfolding());
}

TEST(Unfold, RankOneMatchesKronecker) {
  SplitMix64 rng(2);
  const VectorXd u = test::random_vector(rng, 3);
  const VectorXd v = test::random_vector(rng, 4);
  const VectorXd w = test::random_vector(rng, 2);
  const MatrixXd M = unfold(outer3(u, v, w), 1);
  // column j2 + d2*j3 of the rank-1 unfolding is u * v[j2] * w[j3]
  for (int j3 = 0; j3 < 2; ++j3)
    for (int j2 = 0; j2 < 4; ++j2)
      EXPECT_LT((M.col(j2 + 4 * j3) - u * v[j2] * w[j3]).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Unfold, InvalidModeThrows) {
  const Tensor3 T(2, 2, 2);
  EXPECT_THROW(unfold(T, 0), std::invalid_argument);
  EXPECT_THROW(unfold(T, 4), std::invalid_argument);
}

TEST(Fold, CounterexampleRoundTrip) {
  const Tensor3 expected = kruskal_to_dense(counterexample_factors());
  const Tensor3 T = fold(counterexample_unfolding(), 1, {2, 2, 2});
  EXPECT_EQ(frobenius_distance(T, expected), 0.0);
}

TEST(Fold, ScalarTensor) {
  MatrixXd M(1, 1);
  M << 7.0;
  const Tensor3 T = fold(M, 2, {1, 1, 1});
  EXPECT_EQ(T(0, 0, 0), 7.0);
}

TEST(Fold, ShapeMismatchThrows) {
  EXPECT_THROW(fold(MatrixXd::Zero(2, 3), 1, {2, 2, 2}), std::invalid_argument);
}

TEST(Fold, RoundTripAllModes) {
  SplitMix64 rng(3);
  const Tensor3 T = test::random_tensor(rng, 3, 4, 5);
  for (int mode = 1; mode <= 3; ++mode) {
    const Tensor3 back = fold(unfold(T, mode), mode, T.dims());
    EXPECT_EQ(frobenius_distance(T, back), 0.0) << "mode " << mode;
  }
}

TEST(KhatriRao, DirectDefinition) {
  MatrixXd X(2, 1), Y(2, 1);
  X << 1, 2;
  Y << 3, 4;
  const MatrixXd K = khatri_rao(X, Y);
  VectorXd expected(4);
  expected << 3, 4, 6, 8;
  EXPECT_EQ(K.col(0), expected);
}

TEST(KhatriRao, IdentityColumns) {
  const MatrixXd K = khatri_rao(MatrixXd::Identity(2, 2), MatrixXd::Identity(2, 2));
  MatrixXd expected = MatrixXd::Zero(4, 2);
  expected(0, 0) = 1.0;  // e0 kron e0
  expected(3, 1) = 1.0;  // e1 kron e1
  EXPECT_EQ(K, expected);
}

TEST(KhatriRao, GramIdentity) {
  SplitMix64 rng(4);
  const MatrixXd B = test::random_matrix(rng, 5, 3, -1, 1);
  const MatrixXd C = test::random_matrix(rng, 4, 3, -1, 1);
  const MatrixXd K = khatri_rao(C, B);
  const MatrixXd lhs = K.transpose() * K;
  const MatrixXd rhs = (C.transpose() * C).cwiseProduct(B.transpose() * B);
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(KhatriRao, ColumnMismatchThrows) {
  EXPECT_THROW(khatri_rao(MatrixXd::Zero(2, 2), MatrixXd::Zero(2, 3)),
               std::invalid_argument);
}

TEST(KruskalToDense, CounterexampleExact) {
  const Tensor3 T = kruskal_to_dense(counterexample_factors());
  EXPECT_EQ(unfold(T, 1), counterexample_unfolding());
}

TEST(KruskalToDense, SingleComponentEqualsOuter) {
  SplitMix64 rng(5);
  KruskalFactors F;
  F.A = test::random_matrix(rng, 3, 1);
  F.B = test::random_matrix(rng, 4, 1);
  F.C = test::random_matrix(rng, 2, 1);
  const Tensor3 direct = outer3(F.A.col(0), F.B.col(0), F.C.col(0));
  EXPECT_EQ(frobenius_distance(kruskal_to_dense(F), direct), 0.0);
}

TEST(KruskalToDense, UnfoldingIdentityMode1) {
  SplitMix64 rng(6);
  KruskalFactors F;
  F.A = test::random_matrix(rng, 4, 3, -1, 1);
  F.B = test::random_matrix(rng, 5, 3, -1, 1);
  F.C = test::random_matrix(rng, 6, 3, -1, 1);
  const MatrixXd lhs = unfold(kruskal_to_dense(F), 1);
  const MatrixXd rhs = F.A * khatri_rao(F.C, F.B).transpose();
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FrobeniusDistance, Basics) {
  SplitMix64 rng(7);
  const Tensor3 T = test::random_tensor(rng, 3, 3, 3);
  EXPECT_EQ(frobenius_distance(T, T), 0.0);

  Tensor3 zeros(2, 2, 2);
  Tensor3 ones(2, 2, 2);
  for (std::size_t i = 0; i < ones.size(); ++i) ones.data()[i] = 1.0;
  EXPECT_NEAR(frobenius_distance(zeros, ones), std::sqrt(8.0), 1e-15);

  const Tensor3 S = test::random_tensor(rng, 3, 3, 3);
  double sumsq = 0.0;
  for (std::size_t i = 0; i < T.size(); ++i) {
    const double d = T.data()[i] - S.data()[i];
    sumsq += d * d;
  }
  EXPECT_NEAR(frobenius_distance(T, S), std::sqrt(sumsq), 1e-13);

  EXPECT_THROW(frobenius_distance(T, Tensor3(2, 2, 2)), std::invalid_argument);
}

TEST(TensorProperties, UnfoldingIdentitiesRandomKruskal) {
  SplitMix64 rng(8);
  for (int trial = 0; trial < 25; ++trial) {
    const int r = 1 + static_cast<int>(rng.next_below(4));
    KruskalFactors F;
    F.A = test::random_matrix(rng, 2 + static_cast<int>(rng.next_below(5)), r, -1, 1);
    F.B = test::random_matrix(rng, 2 + static_cast<int>(rng.next_below(5)), r, -1, 1);
    F.C = test::random_matrix(rng, 2 + static_cast<int>(rng.next_below(5)), r, -1, 1);
    const Tensor3 T = kruskal_to_dense(F);
    EXPECT_LT((unfold(T, 1) - F.A * khatri_rao(F.C, F.B).transpose()).cwiseAbs().maxCoeff(),
              1e-10);
    EXPECT_LT((unfold(T, 2) - F.B * khatri_rao(F.C, F.A).transpose()).cwiseAbs().maxCoeff(),
              1e-10);
    EXPECT_LT((unfold(T, 3) - F.C * khatri_rao(F.B, F.A).transpose()).cwiseAbs().maxCoeff(),
              1e-10);
  }
}

TEST(TensorProperties, WeightsAreLinear) {
  SplitMix64 rng(9);
  KruskalFactors F;
  F.A = test::random_matrix(rng, 3, 2);
  F.B = test::random_matrix(rng, 4, 2);
  F.C = test::random_matrix(rng, 2, 2);
  F.weights = test::random_vector(rng, 2, 0.5, 2.0);
  KruskalFactors G = F;
  G.weights *= 2.0;
  const Tensor3 TF = kruskal_to_dense(F);
  const Tensor3 TG = kruskal_to_dense(G);
  for (std::size_t i = 0; i < TF.size(); ++i)
    EXPECT_NEAR(TG.data()[i], 2.0 * TF.data()[i], 1e-14);
}

TEST(Tensor3, ConstructorRejectsNonFinite) {
  std::vector<double> vals(8, 0.0);
  vals[3] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(Tensor3(2, 2, 2, vals), std::invalid_argument);
  vals[3] = std::numeric_limits<double>::infinity();
  EXPECT_THROW(Tensor3(2, 2, 2, vals), std::invalid_argument);
  EXPECT_THROW(Tensor3(2, 2, 2, std::vector<double>(7, 0.0)), std::invalid_argument);
}

TEST(Mttkrp, MatchesUnfoldTimesKhatriRao) {
  SplitMix64 rng(10);
  const Tensor3 T = test::random_tensor(rng, 4, 5, 3);
  const MatrixXd A = test::random_matrix(rng, 4, 2, -1, 1);
  const MatrixXd B = test::random_matrix(rng, 5, 2, -1, 1);
  const MatrixXd C = test::random_matrix(rng, 3, 2, -1, 1);
  EXPECT_LT((mttkrp(T, 1, B, C) - unfold(T, 1) * khatri_rao(C, B)).cwiseAbs().maxCoeff(),
            1e-12);
  EXPECT_LT((mttkrp(T, 2, A, C) - unfold(T, 2) * khatri_rao(C, A)).cwiseAbs().maxCoeff(),
            1e-12);
  EXPECT_LT((mttkrp(T, 3, A, B) - unfold(T, 3) * khatri_rao(B, A)).cwiseAbs().maxCoeff(),
            1e-12);
}
