#include "bsc/annotator.hpp"

#include "bsc/special.hpp"

#include <cmath>
#include <stdexcept>

namespace bsc {

namespace {

double log_add_exp(double a, double b) {
  const double m = std::max(a, b);
  if (!std::isfinite(m)) return m;
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

AnnotatorPosterior make_prior(ModelKind kind, int J, const AnnotatorPriorConfig& cfg,
                              const LabelScheme* scheme) {
  cfg.validate();
  if (J < 1) throw std::invalid_argument("annotator model needs at least one label");
  AnnotatorPosterior post;
  post.kind = kind;
  post.num_labels = J;
  const double a = cfg.alpha0;
  const double e = cfg.epsilon0;

  switch (kind) {
    case ModelKind::Acc:
      post.prior.resize(1, 2);
      post.prior << a + e, a;
      break;
    case ModelKind::Cv:
      post.prior.resize(J, 2);
      post.prior.col(0).setConstant(a + e);
      post.prior.col(1).setConstant(a);
      break;
    case ModelKind::Cm:
      post.prior = MatrixXd::Constant(J, J, a);
      post.prior.diagonal().array() += e;
      break;
    case ModelKind::Seq:
      if (scheme == nullptr) {
        throw std::invalid_argument("the sequential model needs a label scheme");
      }
      post.prior.resize(J * J, J);
      for (int j = 0; j < J; ++j) {
        for (int l = 0; l < J; ++l) {
          for (int m = 0; m < J; ++m) {
            double& cell = post.prior(j * J + l, m);
            if (scheme->is_disallowed(l, m)) {
              cell = cfg.disallowed_mass;
            } else {
              cell = a + (m == j ? e : 0.0);
            }
          }
        }
      }
      break;
    case ModelKind::Spam:
      post.prior.resize(1, 2);
      post.prior << a + e, a;
      post.spam_prior = RowVectorXd::Constant(J, a);
      break;
  }
  post.reset();
  return post;
}

void check_normalized(const MatrixXd& r) {
  for (Eigen::Index t = 0; t < r.rows(); ++t) {
    if (std::abs(r.row(t).sum() - 1.0) > 1e-9) {
      throw std::invalid_argument("token posterior row does not sum to one");
    }
  }
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Acc: return "acc";
    case ModelKind::Spam: return "spam";
    case ModelKind::Cv: return "cv";
    case ModelKind::Cm: return "cm";
    case ModelKind::Seq: return "seq";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "acc") return ModelKind::Acc;
  if (name == "spam") return ModelKind::Spam;
  if (name == "cv") return ModelKind::Cv;
  if (name == "cm") return ModelKind::Cm;
  if (name == "seq") return ModelKind::Seq;
  throw std::invalid_argument("unknown annotator model: " + std::string(name));
}

void AnnotatorPriorConfig::validate() const {
  if (!(alpha0 > 0.0)) throw std::invalid_argument("alpha0 must be positive");
  if (!(epsilon0 >= 0.0)) throw std::invalid_argument("epsilon0 must be nonnegative");
  if (!(disallowed_mass > 0.0)) throw std::invalid_argument("disallowed_mass must be positive");
}

void AnnotatorPosterior::reset() {
  counts = prior;
  spam_counts = spam_prior;
  refresh();
}

void AnnotatorPosterior::refresh() {
  const int J = num_labels;
  const double log_wrong = J > 1 ? std::log(static_cast<double>(J - 1)) : 0.0;

  auto fill_accuracy_row = [&](Eigen::Index row, Label j, double a, double b) {
    const double total = digamma(a + b);
    const double right = digamma(a) - total;
    const double wrong = digamma(b) - total - log_wrong;
    log_lik.row(row).setConstant(wrong);
    log_lik(row, j) = right;
  };

  switch (kind) {
    case ModelKind::Cm:
    case ModelKind::Seq:
      log_lik = dirichlet_expected_log(counts);
      break;
    case ModelKind::Cv:
      log_lik.resize(J, J);
      for (int j = 0; j < J; ++j) fill_accuracy_row(j, j, counts(j, 0), counts(j, 1));
      break;
    case ModelKind::Acc:
      log_lik.resize(J, J);
      for (int j = 0; j < J; ++j) fill_accuracy_row(j, j, counts(0, 0), counts(0, 1));
      break;
    case ModelKind::Spam: {
      log_lik.resize(J, J);
      const MatrixXd acc = dirichlet_expected_log(counts);
      const MatrixXd xi = dirichlet_expected_log(spam_counts);
      spam_log_copy = acc(0, 0);
      for (int j = 0; j < J; ++j) {
        for (int i = 0; i < J; ++i) {
          const double spam = acc(0, 1) + xi(0, i);
          log_lik(j, i) = i == j ? log_add_exp(acc(0, 0), spam) : spam;
        }
      }
      break;
    }
  }
}

double AnnotatorPosterior::kl_divergence() const {
  double kl = dirichlet_kl_rows(counts, prior);
  if (kind == ModelKind::Spam) kl += dirichlet_kl(spam_counts, spam_prior);
  return kl;
}

std::vector<AnnotatorPosterior> init_prior(ModelKind kind, const LabelScheme& scheme,
                                           const AnnotatorPriorConfig& cfg, int num_annotators) {
  if (num_annotators < 1) throw std::invalid_argument("need at least one annotator");
  return std::vector<AnnotatorPosterior>(
      static_cast<size_t>(num_annotators), make_prior(kind, scheme.num_labels(), cfg, &scheme));
}

std::vector<AnnotatorPosterior> init_prior(ModelKind kind, int num_labels,
                                           const AnnotatorPriorConfig& cfg, int num_annotators) {
  if (num_annotators < 1) throw std::invalid_argument("need at least one annotator");
  return std::vector<AnnotatorPosterior>(static_cast<size_t>(num_annotators),
                                         make_prior(kind, num_labels, cfg, nullptr));
}

double expected_log_A(const AnnotatorPosterior& post, Label j, Label c_prev, Label c_cur) {
  const int J = post.num_labels;
  if (j < 0 || j >= J || c_cur < 0 || c_cur >= J || c_prev < kNoLabel || c_prev >= J) {
    throw std::invalid_argument("expected_log_A: label index out of range");
  }
  return post.log_lik(log_lik_row(post, j, c_prev), c_cur);
}

void accumulate_counts(AnnotatorPosterior& post, std::span<const MatrixXd> r,
                       const AnnotationSet& annotations, int annotator) {
  const int J = post.num_labels;
  for (int n = 0; n < static_cast<int>(r.size()); ++n) {
    const LabelSequence* seq = annotations.find(n, annotator);
    if (seq == nullptr) continue;
    const MatrixXd& rn = r[static_cast<size_t>(n)];
    if (static_cast<size_t>(rn.rows()) != seq->size() || rn.cols() != J) {
      throw std::invalid_argument("posterior shape does not match annotation");
    }
    Label prev = kOutside;
    for (Eigen::Index t = 0; t < rn.rows(); ++t) {
      const Label m = (*seq)[static_cast<size_t>(t)];
      switch (post.kind) {
        case ModelKind::Cm:
          post.counts.col(m) += rn.row(t).transpose();
          break;
        case ModelKind::Seq:
          for (int j = 0; j < J; ++j) post.counts(j * J + prev, m) += rn(t, j);
          break;
        case ModelKind::Cv:
          for (int j = 0; j < J; ++j) post.counts(j, j == m ? 0 : 1) += rn(t, j);
          break;
        case ModelKind::Acc:
          post.counts(0, 0) += rn(t, m);
          post.counts(0, 1) += 1.0 - rn(t, m);
          break;
        case ModelKind::Spam: {
          // Probability of copying the truth, given the truth equals the label.
          const double copy_resp = std::exp(post.spam_log_copy - post.log_lik(m, m));
          const double copy = rn(t, m) * copy_resp;
          post.counts(0, 0) += copy;
          post.counts(0, 1) += 1.0 - copy;
          post.spam_counts(m) += 1.0 - copy;
          break;
        }
      }
      prev = m;
    }
  }
}

AnnotatorPosterior update_counts(const AnnotatorPosterior& current, std::span<const MatrixXd> r,
                                 const AnnotationSet& annotations, int annotator) {
  for (const auto& rn : r) check_normalized(rn);
  AnnotatorPosterior next = current;
  next.counts = next.prior;
  next.spam_counts = next.spam_prior;
  accumulate_counts(next, r, annotations, annotator);
  next.refresh();
  return next;
}

MatrixXd posterior_mean(const AnnotatorPosterior& post) {
  const int J = post.num_labels;
  auto accuracy_rows = [&](auto accuracy_of) {
    MatrixXd mean(J, J);
    for (int j = 0; j < J; ++j) {
      const double acc = accuracy_of(j);
      mean.row(j).setConstant(J > 1 ? (1.0 - acc) / (J - 1) : 0.0);
      mean(j, j) = acc;
    }
    return mean;
  };

  switch (post.kind) {
    case ModelKind::Cm:
    case ModelKind::Seq: {
      MatrixXd mean = post.counts;
      for (Eigen::Index i = 0; i < mean.rows(); ++i) mean.row(i) /= mean.row(i).sum();
      return mean;
    }
    case ModelKind::Cv:
      return accuracy_rows(
          [&](int j) { return post.counts(j, 0) / post.counts.row(j).sum(); });
    case ModelKind::Acc:
      return accuracy_rows([&](int) { return post.counts(0, 0) / post.counts.row(0).sum(); });
    case ModelKind::Spam: {
      const double acc = post.counts(0, 0) / post.counts.row(0).sum();
      const RowVectorXd xi = post.spam_counts / post.spam_counts.sum();
      MatrixXd mean(J, J);
      for (int j = 0; j < J; ++j) {
        mean.row(j) = (1.0 - acc) * xi;
        mean(j, j) += acc;
      }
      return mean;
    }
  }
  return {};
}

}  // namespace bsc
