#include "bsc/baselines.hpp"

#include "bsc/special.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bsc {

namespace {

int doc_length(const AnnotationSet& annotations, int n) {
  const auto& entries = annotations.for_doc(n);
  if (entries.empty()) {
    throw std::invalid_argument("document " + std::to_string(n) + " has no annotations");
  }
  return static_cast<int>(entries.front().labels.size());
}

void check_labels(const AnnotationSet& annotations, int J) {
  for (int n = 0; n < annotations.num_docs(); ++n) {
    const int L = doc_length(annotations, n);
    for (const auto& a : annotations.for_doc(n)) {
      if (static_cast<int>(a.labels.size()) != L) {
        throw std::invalid_argument("annotations of one document differ in length");
      }
      for (Label l : a.labels) {
        if (l < 0 || l >= J) throw std::invalid_argument("label index out of range");
      }
    }
  }
}

double max_abs_diff(const std::vector<MatrixXd>& a, const std::vector<MatrixXd>& b) {
  double d = 0.0;
  for (size_t n = 0; n < a.size(); ++n) d = std::max(d, (a[n] - b[n]).cwiseAbs().maxCoeff());
  return d;
}

void decode(TokenPosteriorTable& table) {
  table.labels.clear();
  for (const auto& r : table.posteriors) table.labels.push_back(argmax_labels(r));
}

}  // namespace

LabelSequence argmax_labels(const MatrixXd& posterior) {
  LabelSequence out(static_cast<size_t>(posterior.rows()));
  for (Eigen::Index t = 0; t < posterior.rows(); ++t) {
    Eigen::Index best = 0;
    posterior.row(t).maxCoeff(&best);
    out[static_cast<size_t>(t)] = static_cast<Label>(best);
  }
  return out;
}

TokenPosteriorTable majority_vote(const AnnotationSet& annotations, int num_labels) {
  check_labels(annotations, num_labels);
  TokenPosteriorTable table;
  for (int n = 0; n < annotations.num_docs(); ++n) {
    const int L = doc_length(annotations, n);
    MatrixXd votes = MatrixXd::Zero(L, num_labels);
    const auto& entries = annotations.for_doc(n);
    for (const auto& a : entries) {
      for (int t = 0; t < L; ++t) votes(t, a.labels[static_cast<size_t>(t)]) += 1.0;
    }
    votes /= static_cast<double>(entries.size());
    table.posteriors.push_back(std::move(votes));
  }
  decode(table);
  return table;
}

DawidSkeneResult dawid_skene_em(const AnnotationSet& annotations, int J,
                                const DawidSkeneOptions& opts) {
  if (!(opts.smoothing >= 0.0)) throw std::invalid_argument("smoothing must be nonnegative");
  const int K = annotations.num_annotators();
  const int N = annotations.num_docs();
  DawidSkeneResult result;
  std::vector<MatrixXd> r = majority_vote(annotations, J).posteriors;
  const double s = opts.smoothing;

  for (int it = 1; it <= opts.max_iters; ++it) {
    // M-step: smoothed maximum likelihood.
    RowVectorXd class_mass = RowVectorXd::Zero(J);
    std::vector<MatrixXd> counts(static_cast<size_t>(K), MatrixXd::Zero(J, J));
    double tokens = 0.0;
    for (int n = 0; n < N; ++n) {
      const MatrixXd& rn = r[static_cast<size_t>(n)];
      class_mass += rn.colwise().sum();
      tokens += static_cast<double>(rn.rows());
      for (const auto& a : annotations.for_doc(n)) {
        MatrixXd& c = counts[static_cast<size_t>(a.annotator)];
        for (Eigen::Index t = 0; t < rn.rows(); ++t) {
          c.col(a.labels[static_cast<size_t>(t)]) += rn.row(t).transpose();
        }
      }
    }
    result.class_proportions = (class_mass.array() + s) / (tokens + J * s);
    result.confusion.assign(static_cast<size_t>(K), MatrixXd());
    for (int k = 0; k < K; ++k) {
      MatrixXd& pi = result.confusion[static_cast<size_t>(k)];
      pi = counts[static_cast<size_t>(k)];
      for (int j = 0; j < J; ++j) {
        const double row = pi.row(j).sum() + J * s;
        if (row > 0.0) {
          pi.row(j) = (pi.row(j).array() + s) / row;
        } else {
          pi.row(j).setConstant(1.0 / J);
        }
      }
    }

    // E-step: independent Bayes rule per token.
    std::vector<MatrixXd> next(static_cast<size_t>(N));
    const RowVectorXd log_prior = result.class_proportions.array().log();
    std::vector<MatrixXd> log_pi;
    for (const auto& pi : result.confusion) log_pi.push_back(pi.array().log().matrix());
    for (int n = 0; n < N; ++n) {
      const MatrixXd& rn = r[static_cast<size_t>(n)];
      MatrixXd logp = log_prior.replicate(rn.rows(), 1);
      for (const auto& a : annotations.for_doc(n)) {
        const MatrixXd& lp = log_pi[static_cast<size_t>(a.annotator)];
        for (Eigen::Index t = 0; t < rn.rows(); ++t) {
          logp.row(t) += lp.col(a.labels[static_cast<size_t>(t)]).transpose();
        }
      }
      MatrixXd out(rn.rows(), J);
      for (Eigen::Index t = 0; t < rn.rows(); ++t) {
        const double z = log_sum_exp(logp.row(t));
        if (!std::isfinite(z)) {
          out.row(t) = rn.row(t);
        } else {
          out.row(t) = (logp.row(t).array() - z).exp().matrix();
          out.row(t) /= out.row(t).sum();
        }
      }
      next[static_cast<size_t>(n)] = std::move(out);
    }

    const double delta = max_abs_diff(r, next);
    r = std::move(next);
    result.iterations = it;
    if (delta < opts.tol) {
      result.converged = true;
      break;
    }
  }

  result.table.posteriors = std::move(r);
  decode(result.table);
  return result;
}

IbccResult ibcc_vb(const AnnotationSet& annotations, int J, const IbccOptions& opts) {
  if (!(opts.alpha0 > 0.0) || !(opts.epsilon0 >= 0.0) || !(opts.class_prior0 > 0.0)) {
    throw std::invalid_argument("IBCC priors must be positive");
  }
  if (opts.max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  check_labels(annotations, J);
  const int K = annotations.num_annotators();
  const int N = annotations.num_docs();

  MatrixXd confusion_prior = MatrixXd::Constant(J, J, opts.alpha0);
  confusion_prior.diagonal().array() += opts.epsilon0;
  const RowVectorXd class_prior = RowVectorXd::Constant(J, opts.class_prior0);

  IbccResult result;
  result.confusion_counts.assign(static_cast<size_t>(K), confusion_prior);
  result.class_counts = class_prior;

  std::vector<MatrixXd> r(static_cast<size_t>(N));
  for (int it = 1; it <= opts.max_iters; ++it) {
    const RowVectorXd log_class = dirichlet_expected_log(result.class_counts);
    std::vector<MatrixXd> log_pi;
    for (const auto& c : result.confusion_counts) log_pi.push_back(dirichlet_expected_log(c));

    double delta = it == 1 ? std::numeric_limits<double>::infinity() : 0.0;
    for (int n = 0; n < N; ++n) {
      const int L = doc_length(annotations, n);
      MatrixXd logp = log_class.replicate(L, 1);
      for (const auto& a : annotations.for_doc(n)) {
        const MatrixXd& lp = log_pi[static_cast<size_t>(a.annotator)];
        for (int t = 0; t < L; ++t) {
          logp.row(t) += lp.col(a.labels[static_cast<size_t>(t)]).transpose();
        }
      }
      MatrixXd rn(L, J);
      for (int t = 0; t < L; ++t) {
        rn.row(t) = (logp.row(t).array() - log_sum_exp(logp.row(t))).exp().matrix();
        rn.row(t) /= rn.row(t).sum();
      }
      MatrixXd& old = r[static_cast<size_t>(n)];
      if (it > 1) delta = std::max(delta, (old - rn).cwiseAbs().maxCoeff());
      old = std::move(rn);
    }
    result.deltas.push_back(delta);
    result.iterations = it;
    if (delta < opts.tol) {
      result.converged = true;
      break;
    }
    if (it == opts.max_iters) break;

    result.class_counts = class_prior;
    result.confusion_counts.assign(static_cast<size_t>(K), confusion_prior);
    for (int n = 0; n < N; ++n) {
      const MatrixXd& rn = r[static_cast<size_t>(n)];
      result.class_counts += rn.colwise().sum();
      for (const auto& a : annotations.for_doc(n)) {
        MatrixXd& c = result.confusion_counts[static_cast<size_t>(a.annotator)];
        for (Eigen::Index t = 0; t < rn.rows(); ++t) {
          c.col(a.labels[static_cast<size_t>(t)]) += rn.row(t).transpose();
        }
      }
    }
  }

  result.table.posteriors = std::move(r);
  decode(result.table);
  return result;
}

}  // namespace bsc
