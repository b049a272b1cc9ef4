// SPDX-License-Identifier: MIT
#include "gdlm/pqp.hpp"

#include <cmath>
#include <stdexcept>

#include "gdlm/rng.hpp"

namespace gdlm {

namespace {

constexpr double kTiny = 1e-300;

void check_options(const FactorizeOptions& opts) {
  if (opts.max_iters < 1) throw std::invalid_argument("max_iters must be positive");
  if (!(opts.rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
  if (!(opts.epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
}

void check_mask(const MatrixXd& Omega, const MatrixXd& Y) {
  if (Omega.rows() != Y.rows() || Omega.cols() != Y.cols())
    throw std::invalid_argument("mask shape differs from data");
  for (Eigen::Index j = 0; j < Omega.cols(); ++j)
    for (Eigen::Index i = 0; i < Omega.rows(); ++i)
      if (Omega(i, j) != 0.0 && Omega(i, j) != 1.0)
        throw std::invalid_argument("mask entries must be 0 or 1");
}

void check_nonneg(const MatrixXd& M, const char* name) {
  if ((M.array() < 0.0).any())
    throw std::invalid_argument(std::string(name) + " must be nonnegative");
}

}  // namespace

void QuadProgram::validate() const {
  const Eigen::Index m = Q.rows();
  if (Q.cols() != m) throw std::invalid_argument("QuadProgram: Q must be square");
  if (z.size() != m || gamma.size() != m || phi.size() != m)
    throw std::invalid_argument("QuadProgram: vector sizes differ from Q");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw std::invalid_argument("QuadProgram: Q not symmetric within 1e-10");
  const VectorXd neg_row_sums = (-Q).cwiseMax(0.0).rowwise().sum();
  for (Eigen::Index i = 0; i < m; ++i) {
    if (gamma[i] + 1e-12 < neg_row_sums[i])
      throw std::invalid_argument("QuadProgram: gamma below (-Q)_+ 1");
    if (phi[i] < 0.0) throw std::invalid_argument("QuadProgram: phi must be nonnegative");
  }
}

VectorXd pqp_step(const VectorXd& x, const QuadProgram& qp) {
  qp.validate();
  if (x.size() != qp.Q.rows()) throw std::invalid_argument("pqp_step: x size differs from Q");
  if ((x.array() < 0.0).any()) throw std::invalid_argument("pqp_step: x must be nonnegative");
  const MatrixXd Qp = qp.Q.cwiseMax(0.0) + MatrixXd(qp.gamma.asDiagonal());
  const MatrixXd Qm = (-qp.Q).cwiseMax(0.0) + MatrixXd(qp.gamma.asDiagonal());
  const VectorXd num = Qm * x + (-qp.z).cwiseMax(0.0) + qp.phi;
  const VectorXd den = Qp * x + qp.z.cwiseMax(0.0) + qp.phi;
  if ((den.array() <= 0.0).any())
    throw std::runtime_error("pqp_step: zero denominator (phi must be strictly positive)");
  return x.cwiseProduct(num).cwiseQuotient(den);
}

MatrixXd pqp_phi(const MatrixXd& Q, const MatrixXd& Z, double epsilon) {
  const Eigen::Index k = Q.rows();
  if (Q.cols() != k) throw std::invalid_argument("pqp_phi: Q must be square");
  if (Z.cols() != k) throw std::invalid_argument("pqp_phi: Z column count differs from Q");
  if (!(epsilon > 0.0)) throw std::invalid_argument("pqp_phi: epsilon must be positive");
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-8 * std::max(1.0, Q.cwiseAbs().maxCoeff()))
    throw std::invalid_argument("pqp_phi: Q not symmetric");

  const double trace = Q.trace();
  MatrixXd Qr = Q;
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(Qr);
  double lmin = es.eigenvalues().minCoeff();
  if (lmin <= 1e-12 * trace / static_cast<double>(k)) {
    // Empirical grams can be rank-deficient early; ridge before inverting.
    const double mu = 1e-10 * trace / static_cast<double>(k);
    Qr += mu * MatrixXd::Identity(k, k);
    es.compute(Qr);
    lmin = es.eigenvalues().minCoeff();
  }
  if (!(lmin > 0.0) || !std::isfinite(lmin))
    throw std::runtime_error("pqp_phi: Q numerically singular after regularization");

  const MatrixXd S = Qr.ldlt().solve(Z.transpose());  // k x m
  const VectorXd diag_q = Qr.diagonal();
  MatrixXd Phi(Z.rows(), k);
  for (Eigen::Index i = 0; i < Z.rows(); ++i) {
    const double quad = std::max(Z.row(i).dot(S.col(i)), 0.0);
    const double norm_bound = std::sqrt(quad / lmin);
    Phi.row(i) = (norm_bound * diag_q.transpose() - Z.row(i).cwiseAbs()).cwiseMax(0.0) / 2.0;
  }
  Phi.array() += epsilon;
  return Phi;
}

NqpResult solve_nqp(const QuadProgram& qp, const FactorizeOptions& opts) {
  qp.validate();
  check_options(opts);
  NqpResult res;
  res.x = VectorXd::Ones(qp.Q.rows());
  for (int it = 1; it <= opts.max_iters; ++it) {
    const VectorXd next = pqp_step(res.x, qp);
    const double delta = (next - res.x).cwiseAbs().maxCoeff();
    const double scale = std::max(res.x.cwiseAbs().maxCoeff(), kTiny);
    res.x = next;
    res.iterations = it;
    if (delta <= opts.rel_tol * scale) {
      res.converged = true;
      break;
    }
  }
  return res;
}

WnmfResult wnmf_step(const MatrixXd& W, const MatrixXd& H, const MatrixXd& Y,
                     const MatrixXd& Omega, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("wnmf_step: eps must be positive");
  if (W.cols() != H.rows() || W.rows() != Y.rows() || H.cols() != Y.cols())
    throw std::invalid_argument("wnmf_step: inconsistent shapes");
  check_mask(Omega, Y);
  check_nonneg(W, "W");
  check_nonneg(H, "H");

  const MatrixXd OY = Omega.cwiseProduct(Y);
  WnmfResult out;
  {
    const MatrixXd num = (W.transpose() * OY).array() + eps;
    const MatrixXd den = (W.transpose() * ((W * H).cwiseProduct(Omega))).array() + eps;
    out.H = H.cwiseProduct(num).cwiseQuotient(den);
  }
  {
    const MatrixXd num = (OY * out.H.transpose()).array() + eps;
    const MatrixXd den = (((W * out.H).cwiseProduct(Omega)) * out.H.transpose()).array() + eps;
    out.W = W.cwiseProduct(num).cwiseQuotient(den);
  }
  return out;
}

double tensor_objective(const Tensor3& T, const KruskalFactors& F) {
  if (F.A.rows() != T.d1() || F.B.rows() != T.d2() || F.C.rows() != T.d3())
    throw std::invalid_argument("tensor_objective: factor rows differ from tensor dims");
  return frobenius_distance(T, kruskal_to_dense(F));
}

FactorizeResult factorize(const Tensor3& T, int k, const FactorizeOptions& opts) {
  if (k < 1) throw std::invalid_argument("factorize: rank must be >= 1");
  check_options(opts);
  const int d1 = T.d1(), d2 = T.d2(), d3 = T.d3();

  FactorizeResult res;
  const double scale = T.max_abs();
  if (scale == 0.0) {
    res.factors.A = MatrixXd::Constant(d1, k, 1.0 / d1);
    res.factors.B = MatrixXd::Constant(d2, k, 1.0 / d2);
    res.factors.C = MatrixXd::Constant(d3, k, 1.0 / d3);
    res.factors.weights = VectorXd::Zero(k);
    res.converged = true;
    return res;
  }

  Tensor3 Ts(d1, d2, d3);
  for (std::size_t i = 0; i < T.size(); ++i) Ts.data()[i] = T.data()[i] / scale;

  SplitMix64 rng(derive_stream(opts.seed, "factorize"));
  MatrixXd A(d1, k), B(d2, k), C(d3, k);
  for (MatrixXd* M : {&A, &B, &C})
    for (Eigen::Index h = 0; h < k; ++h)
      for (Eigen::Index i = 0; i < M->rows(); ++i) (*M)(i, h) = rng.next_open();

  const auto track = [&]() {
    if (!opts.track_objective) return;
    KruskalFactors cur{A, B, C, VectorXd()};
    res.objective_history.push_back(frobenius_distance(Ts, kruskal_to_dense(cur)));
  };

  for (int it = 1; it <= opts.max_iters; ++it) {
    double max_rel = 0.0;
    for (int mode = 1; mode <= 3; ++mode) {
      MatrixXd& X = mode == 1 ? A : (mode == 2 ? B : C);
      MatrixXd Q, Z;
      switch (mode) {
        case 1:
          Q = (C.transpose() * C).cwiseProduct(B.transpose() * B);
          Z = -mttkrp(Ts, 1, B, C);
          break;
        case 2:
          Q = (C.transpose() * C).cwiseProduct(A.transpose() * A);
          Z = -mttkrp(Ts, 2, A, C);
          break;
        default:
          Q = (B.transpose() * B).cwiseProduct(A.transpose() * A);
          Z = -mttkrp(Ts, 3, A, B);
          break;
      }
      const MatrixXd Phi = pqp_phi(Q, Z, opts.epsilon);
      const MatrixXd num = (-Z).cwiseMax(0.0) + Phi;
      const MatrixXd den = X * Q + Z.cwiseMax(0.0) + Phi;
      const MatrixXd Xn = X.cwiseProduct(num).cwiseQuotient(den);
      const double rel = (Xn - X).cwiseAbs().maxCoeff() /
                         std::max(X.cwiseAbs().maxCoeff(), kTiny);
      max_rel = std::max(max_rel, rel);
      X = Xn;
      track();
    }
    res.iterations = it;
    if (max_rel < opts.rel_tol) {
      res.converged = true;
      break;
    }
  }

  res.factors.A = A;
  res.factors.B = B;
  res.factors.C = C;
  res.factors.weights = VectorXd(k);
  for (int h = 0; h < k; ++h) {
    const double sa = A.col(h).sum(), sb = B.col(h).sum(), sc = C.col(h).sum();
    res.factors.weights[h] = scale * sa * sb * sc;
    if (sa > 0.0) res.factors.A.col(h) /= sa;
    if (sb > 0.0) res.factors.B.col(h) /= sb;
    if (sc > 0.0) res.factors.C.col(h) /= sc;
  }
  res.objective = tensor_objective(T, res.factors);
  return res;
}

bool pqp_matches_wnmf(const MatrixXd& W, const MatrixXd& H, const MatrixXd& Y,
                      const MatrixXd& Omega, double eps,
                      std::optional<double> phi_value) {
  const WnmfResult ref = wnmf_step(W, H, Y, Omega, eps);
  const double phi = phi_value.value_or(eps);
  const Eigen::Index k = W.cols();

  MatrixXd H2 = H;
  for (Eigen::Index v = 0; v < H.cols(); ++v) {
    const VectorXd omega = Omega.col(v);
    QuadProgram qp;
    qp.Q = W.transpose() * omega.asDiagonal() * W;
    qp.z = -(W.transpose() * omega.cwiseProduct(Y.col(v)));
    qp.gamma = VectorXd::Zero(k);
    qp.phi = VectorXd::Constant(k, phi);
    H2.col(v) = pqp_step(H.col(v), qp);
  }
  MatrixXd W2 = W;
  for (Eigen::Index u = 0; u < W.rows(); ++u) {
    const VectorXd omega = Omega.row(u).transpose();
    QuadProgram qp;
    qp.Q = H2 * omega.asDiagonal() * H2.transpose();
    qp.z = -(H2 * omega.cwiseProduct(Y.row(u).transpose()));
    qp.gamma = VectorXd::Zero(k);
    qp.phi = VectorXd::Constant(k, phi);
    W2.row(u) = pqp_step(W.row(u).transpose(), qp).transpose();
  }

  const double dw = (W2 - ref.W).cwiseAbs().maxCoeff();
  const double dh = (H2 - ref.H).cwiseAbs().maxCoeff();
  return std::max(dw, dh) <= 1e-12;
}

}  // namespace gdlm
