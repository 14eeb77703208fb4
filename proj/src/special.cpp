#include "bsc/special.hpp"

#include <boost/math/special_functions/digamma.hpp>

#include <stdexcept>

namespace bsc {

double digamma(double x) { return boost::math::digamma(x); }

MatrixXd dirichlet_expected_log(const MatrixXd& counts) {
  MatrixXd out(counts.rows(), counts.cols());
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    const double total = digamma(counts.row(i).sum());
    for (Eigen::Index j = 0; j < counts.cols(); ++j) {
      out(i, j) = digamma(counts(i, j)) - total;
    }
  }
  return out;
}

double dirichlet_kl(const RowVectorXd& q, const RowVectorXd& p) {
  if (q.size() != p.size()) {
    throw std::invalid_argument("dirichlet_kl: size mismatch");
  }
  const double q0 = q.sum();
  const double p0 = p.sum();
  const double psi0 = digamma(q0);
  double kl = std::lgamma(q0) - std::lgamma(p0);
  for (Eigen::Index i = 0; i < q.size(); ++i) {
    kl += std::lgamma(p(i)) - std::lgamma(q(i));
    kl += (q(i) - p(i)) * (digamma(q(i)) - psi0);
  }
  return kl;
}

double dirichlet_kl_rows(const MatrixXd& q, const MatrixXd& p) {
  double kl = 0.0;
  for (Eigen::Index i = 0; i < q.rows(); ++i) {
    kl += dirichlet_kl(q.row(i), p.row(i));
  }
  return kl;
}

}  // namespace bsc
