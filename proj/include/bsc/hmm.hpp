#pragma once

#include "bsc/special.hpp"
#include "bsc/types.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace bsc {

/// Raised when every state at some position has zero probability.
class DegenerateColumn : public std::runtime_error {
 public:
  explicit DegenerateColumn(int position)
      : std::runtime_error("all states impossible at position " + std::to_string(position)),
        position_(position) {}
  int position() const { return position_; }

 private:
  int position_;
};

// Chain conventions shared by the kernels below:
//   log_init   1 x J, log-probability of the first state (the transition
//              row out of the virtual start state)
//   log_trans  J x J, row = previous state, column = next state
//   log_lik    L x J, per-position log evidence for each state
// Everything is computed in log space.

template <typename Scalar>
Matrix<Scalar> forward_log(const RowVector<Scalar>& log_init, const Matrix<Scalar>& log_trans,
                           const Matrix<Scalar>& log_lik) {
  const Eigen::Index L = log_lik.rows();
  const Eigen::Index J = log_lik.cols();
  Matrix<Scalar> alpha(L, J);
  alpha.row(0) = log_init + log_lik.row(0);
  for (Eigen::Index t = 1; t < L; ++t) {
    for (Eigen::Index j = 0; j < J; ++j) {
      alpha(t, j) = log_sum_exp(alpha.row(t - 1).transpose() + log_trans.col(j)) + log_lik(t, j);
    }
  }
  for (Eigen::Index t = 0; t < L; ++t) {
    if (!std::isfinite(alpha.row(t).maxCoeff())) throw DegenerateColumn(static_cast<int>(t));
  }
  return alpha;
}

template <typename Scalar>
Matrix<Scalar> backward_log(const Matrix<Scalar>& log_trans, const Matrix<Scalar>& log_lik) {
  const Eigen::Index L = log_lik.rows();
  const Eigen::Index J = log_lik.cols();
  Matrix<Scalar> beta(L, J);
  beta.row(L - 1).setZero();
  for (Eigen::Index t = L - 2; t >= 0; --t) {
    const RowVector<Scalar> next = beta.row(t + 1) + log_lik.row(t + 1);
    for (Eigen::Index j = 0; j < J; ++j) {
      beta(t, j) = log_sum_exp(log_trans.row(j) + next);
    }
    if (!std::isfinite(beta.row(t).maxCoeff())) throw DegenerateColumn(static_cast<int>(t));
  }
  return beta;
}

template <typename Scalar>
struct ChainPosterior {
  /// L x J state marginals.
  Matrix<Scalar> r;
  /// L-1 pairwise marginals; s[t](j, i) = p(state t = j, state t+1 = i).
  std::vector<Matrix<Scalar>> s;
  Scalar log_partition = 0;
};

template <typename Scalar>
ChainPosterior<Scalar> chain_posterior(const Matrix<Scalar>& alpha, const Matrix<Scalar>& beta,
                                       const Matrix<Scalar>& log_trans,
                                       const Matrix<Scalar>& log_lik) {
  const Eigen::Index L = log_lik.rows();
  ChainPosterior<Scalar> out;
  out.log_partition = log_sum_exp(alpha.row(L - 1));
  out.r.resize(L, log_lik.cols());
  for (Eigen::Index t = 0; t < L; ++t) {
    const RowVector<Scalar> joint = alpha.row(t) + beta.row(t);
    out.r.row(t) = (joint.array() - log_sum_exp(joint)).exp().matrix();
    out.r.row(t) /= out.r.row(t).sum();
  }
  out.s.reserve(static_cast<size_t>(L > 0 ? L - 1 : 0));
  for (Eigen::Index t = 1; t < L; ++t) {
    Matrix<Scalar> pair = log_trans;
    pair.colwise() += alpha.row(t - 1).transpose();
    pair.rowwise() += log_lik.row(t) + beta.row(t);
    const Scalar norm = log_sum_exp(pair);
    Matrix<Scalar> p = (pair.array() - norm).exp().matrix();
    p /= p.sum();
    out.s.push_back(std::move(p));
  }
  return out;
}

template <typename Scalar>
struct ViterbiPath {
  std::vector<int> path;
  Scalar log_score = 0;
};

/// Max-product decoding. Ties go to the lower state index, resolved from the
/// last position backwards.
template <typename Scalar>
ViterbiPath<Scalar> viterbi_log(const RowVector<Scalar>& log_init, const Matrix<Scalar>& log_trans,
                                const Matrix<Scalar>& log_lik) {
  const Eigen::Index L = log_lik.rows();
  const Eigen::Index J = log_lik.cols();
  Matrix<Scalar> delta(L, J);
  Eigen::MatrixXi back(L, J);
  delta.row(0) = log_init + log_lik.row(0);
  back.row(0).setConstant(-1);
  for (Eigen::Index t = 1; t < L; ++t) {
    for (Eigen::Index j = 0; j < J; ++j) {
      Eigen::Index best = 0;
      Scalar best_score = delta(t - 1, 0) + log_trans(0, j);
      for (Eigen::Index i = 1; i < J; ++i) {
        const Scalar score = delta(t - 1, i) + log_trans(i, j);
        if (score > best_score) {
          best_score = score;
          best = i;
        }
      }
      delta(t, j) = best_score + log_lik(t, j);
      back(t, j) = static_cast<int>(best);
    }
  }
  ViterbiPath<Scalar> out;
  out.path.resize(static_cast<size_t>(L));
  Eigen::Index state = 0;
  out.log_score = delta.row(L - 1).maxCoeff(&state);
  // maxCoeff returns the first maximal index, i.e. the lowest label.
  for (Eigen::Index t = L - 1; t >= 0; --t) {
    out.path[static_cast<size_t>(t)] = static_cast<int>(state);
    if (t > 0) state = back(t, state);
  }
  return out;
}

}  // namespace bsc
