#pragma once

#include "bsc/types.hpp"

#include <cmath>
#include <limits>

namespace bsc {

double digamma(double x);

/// Numerically stable log(sum(exp(v))). Returns -inf for an all -inf input.
template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::DenseBase<Derived>& v) {
  using Scalar = typename Derived::Scalar;
  const Scalar m = v.maxCoeff();
  if (!std::isfinite(m)) {
    return m;
  }
  return m + std::log((v.derived().array() - m).exp().sum());
}

/// E[ln p] under Dir(a), applied to every row of a matrix of pseudo-counts.
MatrixXd dirichlet_expected_log(const MatrixXd& counts);

/// KL(Dir(q) || Dir(p)) for one pair of parameter vectors.
double dirichlet_kl(const RowVectorXd& q, const RowVectorXd& p);

/// Sum of row-wise Dirichlet KL divergences.
double dirichlet_kl_rows(const MatrixXd& q, const MatrixXd& p);

}  // namespace bsc
