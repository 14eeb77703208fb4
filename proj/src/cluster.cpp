#include "bsc/cluster.hpp"

#include <limits>
#include <random>
#include <stdexcept>

namespace bsc {

namespace {

VectorXd flatten(const MatrixXd& m) {
  VectorXd v(m.size());
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) v(i++) = m(r, c);
  }
  return v;
}

MatrixXd unflatten(const VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  MatrixXd m(rows, cols);
  Eigen::Index i = 0;
  for (Eigen::Index r = 0; r < rows; ++r) {
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = v(i++);
  }
  return m;
}

}  // namespace

Clustering cluster_annotators(const std::vector<MatrixXd>& tensors, int k, std::uint64_t seed,
                              int max_iters) {
  const int K = static_cast<int>(tensors.size());
  if (k < 1 || k > K) {
    throw std::invalid_argument("cluster count must lie in [1, number of annotators]");
  }
  const Eigen::Index rows = tensors.front().rows();
  const Eigen::Index cols = tensors.front().cols();
  MatrixXd x(K, rows * cols);
  for (int i = 0; i < K; ++i) {
    if (tensors[static_cast<size_t>(i)].rows() != rows ||
        tensors[static_cast<size_t>(i)].cols() != cols) {
      throw std::invalid_argument("annotator tensors differ in shape");
    }
    x.row(i) = flatten(tensors[static_cast<size_t>(i)]).transpose();
  }

  std::mt19937_64 rng(seed);
  MatrixXd centers(k, x.cols());
  std::uniform_int_distribution<int> first(0, K - 1);
  centers.row(0) = x.row(first(rng));
  VectorXd d2(K);
  for (int c = 1; c < k; ++c) {
    for (int i = 0; i < K; ++i) {
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < c; ++j) best = std::min(best, (x.row(i) - centers.row(j)).squaredNorm());
      d2(i) = best;
    }
    const double total = d2.sum();
    int pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      const double target = u(rng);
      double acc = 0.0;
      pick = K - 1;
      for (int i = 0; i < K; ++i) {
        acc += d2(i);
        if (target < acc) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    centers.row(c) = x.row(pick);
  }

  Clustering out;
  out.assignment.assign(static_cast<size_t>(K), -1);
  for (int it = 1; it <= max_iters; ++it) {
    bool changed = false;
    for (int i = 0; i < K; ++i) {
      int best = 0;
      double best_d = (x.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (x.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (out.assignment[static_cast<size_t>(i)] != best) changed = true;
      out.assignment[static_cast<size_t>(i)] = best;
    }
    out.iterations = it;
    for (int c = 0; c < k; ++c) {
      RowVectorXd sum = RowVectorXd::Zero(x.cols());
      int members = 0;
      for (int i = 0; i < K; ++i) {
        if (out.assignment[static_cast<size_t>(i)] == c) {
          sum += x.row(i);
          ++members;
        }
      }
      // An empty cluster keeps its previous center.
      if (members > 0) centers.row(c) = sum / members;
    }
    if (!changed) break;
  }

  for (int c = 0; c < k; ++c) out.means.push_back(unflatten(centers.row(c).transpose(), rows, cols));
  return out;
}

}  // namespace bsc
