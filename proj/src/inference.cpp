#include "bsc/inference.hpp"

#include "bsc/parallel.hpp"
#include "bsc/special.hpp"

#include <cmath>
#include <limits>

namespace bsc {

void BscConfig::validate() const {
  if (!(gamma0 > 0.0)) throw std::invalid_argument("gamma0 must be positive");
  if (!(kappa0 > 0.0)) throw std::invalid_argument("kappa0 must be positive");
  if (!(convergence_tol > 0.0)) throw std::invalid_argument("convergence tolerance must be positive");
  if (max_iters < 1) throw std::invalid_argument("max_iters must be at least 1");
  annotator.validate();
}

double SequencePosterior::sequence_confidence(int n) const {
  return std::exp(viterbi_log_score.at(static_cast<size_t>(n)) -
                  log_partition.at(static_cast<size_t>(n)));
}

BscModel::BscModel(const Corpus& corpus, const AnnotationSet& annotations,
                   const LabelScheme& scheme, BscConfig cfg)
    : corpus_(corpus), annotations_(annotations), scheme_(scheme), cfg_(cfg) {
  cfg_.validate();
  annotations_.validate(corpus_, scheme_);
  const int J = scheme_.num_labels();

  annotators_ = init_prior(cfg_.model_kind, scheme_, cfg_.annotator,
                           std::max(1, annotations_.num_annotators()));

  if (cfg_.use_transitions) {
    transitions_.prior.resize(J, J);
    for (int j = 0; j < J; ++j) {
      for (int i = 0; i < J; ++i) {
        transitions_.prior(j, i) =
            scheme_.is_disallowed(j, i) ? cfg_.annotator.disallowed_mass : cfg_.gamma0;
      }
    }
  } else {
    transitions_.prior = MatrixXd::Constant(1, J, cfg_.gamma0);
  }
  transitions_.counts = transitions_.prior;

  observations_.kappa0 = cfg_.kappa0;
  if (cfg_.use_text) {
    observations_.counts = MatrixXd::Constant(J, corpus_.vocab_size(), cfg_.kappa0);
  }

  const size_t N = static_cast<size_t>(corpus_.num_docs());
  sequences_.r.resize(N);
  sequences_.s.resize(N);
  sequences_.log_partition.assign(N, 0.0);
  sequences_.viterbi.resize(N);
  sequences_.viterbi_log_score.assign(N, 0.0);

  refresh_chain();
  refresh_words();
}

void BscModel::set_annotator(int k, AnnotatorPosterior post) {
  post.refresh();
  annotators_.at(static_cast<size_t>(k)) = std::move(post);
}

void BscModel::set_transitions(TransitionPosterior post) {
  transitions_ = std::move(post);
  refresh_chain();
}

void BscModel::set_observations(ObservationPosterior post) {
  observations_ = std::move(post);
  refresh_words();
}

void BscModel::refresh_chain() {
  const MatrixXd e = dirichlet_expected_log(transitions_.counts);
  if (cfg_.use_transitions) {
    log_trans_ = e;
    log_init_ = e.row(kOutside);
  } else {
    // Independent tokens: every row of the chain is the class-proportion row.
    log_init_ = e.row(0);
    log_trans_ = e.row(0).replicate(scheme_.num_labels(), 1);
  }
}

void BscModel::refresh_words() {
  if (cfg_.use_text) {
    log_words_ = dirichlet_expected_log(observations_.counts);
  } else {
    log_words_.resize(0, 0);
  }
}

MatrixXd BscModel::token_log_likelihood(int n) const {
  const Document& doc = corpus_.doc(n);
  const int J = num_labels();
  const int L = doc.length();
  MatrixXd ll = MatrixXd::Zero(L, J);
  for (const Annotation& a : annotations_.for_doc(n)) {
    const AnnotatorPosterior& post = annotators_[static_cast<size_t>(a.annotator)];
    Label prev = kNoLabel;
    for (int t = 0; t < L; ++t) {
      const Label c = a.labels[static_cast<size_t>(t)];
      for (int j = 0; j < J; ++j) {
        ll(t, j) += post.log_lik(log_lik_row(post, j, prev), c);
      }
      prev = c;
    }
  }
  if (cfg_.use_text) {
    for (int t = 0; t < L; ++t) {
      ll.row(t) += log_words_.col(doc.tokens[static_cast<size_t>(t)]).transpose();
    }
  }
  return ll;
}

double BscModel::token_log_likelihood(int n, int tau, Label j) const {
  const Document& doc = corpus_.doc(n);
  if (tau < 0 || tau >= doc.length() || !scheme_.is_valid(j)) {
    throw std::invalid_argument("token_log_likelihood: index out of range");
  }
  double ll = 0.0;
  for (const Annotation& a : annotations_.for_doc(n)) {
    const Label prev = tau == 0 ? kNoLabel : a.labels[static_cast<size_t>(tau - 1)];
    ll += expected_log_A(annotators_[static_cast<size_t>(a.annotator)], j, prev,
                         a.labels[static_cast<size_t>(tau)]);
  }
  if (cfg_.use_text) ll += log_words_(j, doc.tokens[static_cast<size_t>(tau)]);
  return ll;
}

MatrixXd BscModel::forward(int n) const {
  try {
    return forward_log<double>(log_init_, log_trans_, token_log_likelihood(n));
  } catch (const DegenerateColumn& e) {
    throw NumericDegeneracy(n, e.position());
  }
}

MatrixXd BscModel::backward(int n) const {
  try {
    return backward_log<double>(log_trans_, token_log_likelihood(n));
  } catch (const DegenerateColumn& e) {
    throw NumericDegeneracy(n, e.position());
  }
}

DocPosterior BscModel::e_step(int n) const {
  const MatrixXd ll = token_log_likelihood(n);
  try {
    const MatrixXd alpha = forward_log<double>(log_init_, log_trans_, ll);
    const MatrixXd beta = backward_log<double>(log_trans_, ll);
    auto chain = chain_posterior<double>(alpha, beta, log_trans_, ll);
    return DocPosterior{std::move(chain.r), std::move(chain.s), chain.log_partition};
  } catch (const DegenerateColumn& e) {
    throw NumericDegeneracy(n, e.position());
  }
}

double BscModel::e_step_all() {
  const int N = corpus_.num_docs();
  std::vector<double> deltas(static_cast<size_t>(N), 0.0);
  detail::parallel_for(N, cfg_.threads, [&](int n) {
    DocPosterior post = e_step(n);
    const size_t i = static_cast<size_t>(n);
    MatrixXd& old = sequences_.r[i];
    deltas[i] = old.size() == post.r.size() ? (old - post.r).cwiseAbs().maxCoeff()
                                            : std::numeric_limits<double>::infinity();
    old = std::move(post.r);
    sequences_.s[i] = std::move(post.s);
    sequences_.log_partition[i] = post.log_partition;
  });
  double delta = 0.0;
  for (double d : deltas) delta = std::max(delta, d);
  return delta;
}

void BscModel::m_step_annotators() {
  detail::parallel_for(static_cast<int>(annotators_.size()), cfg_.threads, [&](int k) {
    AnnotatorPosterior& post = annotators_[static_cast<size_t>(k)];
    // Spam needs the pre-update expectations; refresh only after counting.
    post.counts = post.prior;
    post.spam_counts = post.spam_prior;
    accumulate_counts(post, sequences_.r, annotations_, k);
    post.refresh();
  });
}

void BscModel::m_step_transitions() {
  transitions_.counts = transitions_.prior;
  for (int n = 0; n < corpus_.num_docs(); ++n) {
    const size_t i = static_cast<size_t>(n);
    const MatrixXd& r = sequences_.r[i];
    if (cfg_.use_transitions) {
      // The first label follows the virtual start state O.
      transitions_.counts.row(kOutside) += r.row(0);
      for (const MatrixXd& s : sequences_.s[i]) transitions_.counts += s;
    } else {
      transitions_.counts.row(0) += r.colwise().sum();
    }
  }
  refresh_chain();
}

void BscModel::m_step_observations() {
  if (!cfg_.use_text) return;
  observations_.counts.setConstant(observations_.kappa0);
  for (int n = 0; n < corpus_.num_docs(); ++n) {
    const Document& doc = corpus_.doc(n);
    const MatrixXd& r = sequences_.r[static_cast<size_t>(n)];
    for (int t = 0; t < doc.length(); ++t) {
      observations_.counts.col(doc.tokens[static_cast<size_t>(t)]) += r.row(t).transpose();
    }
  }
  refresh_words();
}

double BscModel::elbo() const {
  double value = 0.0;
  for (double z : sequences_.log_partition) value += z;
  value -= dirichlet_kl_rows(transitions_.counts, transitions_.prior);
  if (cfg_.use_text) {
    const MatrixXd prior =
        MatrixXd::Constant(observations_.counts.rows(), observations_.counts.cols(),
                           observations_.kappa0);
    value -= dirichlet_kl_rows(observations_.counts, prior);
  }
  for (const auto& a : annotators_) value -= a.kl_divergence();
  return value;
}

ViterbiPath<double> BscModel::viterbi(int n) const {
  return viterbi_log<double>(log_init_, log_trans_, token_log_likelihood(n));
}

double BscModel::sequence_confidence(int n) const {
  return std::exp(viterbi(n).log_score - sequences_.log_partition.at(static_cast<size_t>(n)));
}

void BscModel::decode_all() {
  detail::parallel_for(corpus_.num_docs(), cfg_.threads, [&](int n) {
    auto path = viterbi(n);
    sequences_.viterbi[static_cast<size_t>(n)] = std::move(path.path);
    sequences_.viterbi_log_score[static_cast<size_t>(n)] = path.log_score;
  });
}

bool BscModel::run() {
  trace_.clear();
  bool converged = false;
  for (int it = 1; it <= cfg_.max_iters; ++it) {
    const double delta = e_step_all();
    trace_.push_back(IterationRecord{it, delta, elbo()});
    if (delta < cfg_.convergence_tol) {
      converged = true;
      break;
    }
    if (it == cfg_.max_iters) break;
    m_step_annotators();
    m_step_transitions();
    m_step_observations();
  }
  decode_all();
  return converged;
}

VbResult run_vb(const Corpus& corpus, const AnnotationSet& annotations, const LabelScheme& scheme,
                const BscConfig& cfg) {
  BscModel model(corpus, annotations, scheme, cfg);
  VbResult out;
  out.converged = model.run();
  out.sequences = model.sequences();
  out.annotators = model.annotators();
  out.transitions = model.transitions();
  out.observations = model.observations();
  out.trace = model.trace();
  return out;
}

}  // namespace bsc
