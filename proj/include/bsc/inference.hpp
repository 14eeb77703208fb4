#pragma once

#include "bsc/annotator.hpp"
#include "bsc/corpus.hpp"
#include "bsc/hmm.hpp"
#include "bsc/scheme.hpp"
#include "bsc/types.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace bsc {

struct BscConfig {
  ModelKind model_kind = ModelKind::Seq;
  /// Transition pseudo-count for allowed cells (forbidden cells use
  /// annotator.disallowed_mass).
  double gamma0 = 1.0;
  /// Symmetric pseudo-count for the per-label word distributions.
  double kappa0 = 1.0;
  AnnotatorPriorConfig annotator{};
  bool use_text = true;
  /// When false the label chain is replaced by independent per-token class
  /// proportions under one Dirichlet.
  bool use_transitions = true;
  double convergence_tol = 1e-4;
  int max_iters = 200;
  int threads = 1;

  void validate() const;
};

/// Dirichlet posterior over transition rows: J x J, or 1 x J class
/// proportions when transitions are disabled.
struct TransitionPosterior {
  MatrixXd prior;
  MatrixXd counts;
};

/// Dirichlet posterior over per-label word distributions, J x V.
struct ObservationPosterior {
  double kappa0 = 1.0;
  MatrixXd counts;
};

struct SequencePosterior {
  std::vector<MatrixXd> r;
  std::vector<std::vector<MatrixXd>> s;
  std::vector<double> log_partition;
  std::vector<LabelSequence> viterbi;
  std::vector<double> viterbi_log_score;

  /// p(Viterbi path | annotations); at most 1.
  double sequence_confidence(int n) const;
};

/// One document's e-step output.
struct DocPosterior {
  MatrixXd r;
  std::vector<MatrixXd> s;
  double log_partition = 0.0;
};

struct IterationRecord {
  int iteration = 0;
  /// Largest change in any token posterior; infinite on the first sweep.
  double max_delta = 0.0;
  double elbo = 0.0;
};

class NumericDegeneracy : public std::runtime_error {
 public:
  NumericDegeneracy(int doc, int position)
      : std::runtime_error("numeric degeneracy in document " + std::to_string(doc) +
                           " at position " + std::to_string(position)),
        doc_(doc),
        position_(position) {}
  int doc() const { return doc_; }
  int position() const { return position_; }

 private:
  int doc_;
  int position_;
};

/// Variational inference for the label chain, the word model and the
/// annotator models. Holds references to the corpus, annotations and
/// scheme, which must outlive it.
///
/// One sweep is: e-step on every document with the current expectations,
/// record the ELBO, then update annotator, transition and word posteriors.
/// `run()` stops after the e-step once the largest posterior change drops
/// below the tolerance, so the final posteriors, decoding and ELBO all use
/// the same expectations.
class BscModel {
 public:
  BscModel(const Corpus& corpus, const AnnotationSet& annotations, const LabelScheme& scheme,
           BscConfig cfg);

  const BscConfig& config() const { return cfg_; }
  const LabelScheme& scheme() const { return scheme_; }
  int num_labels() const { return scheme_.num_labels(); }

  const std::vector<AnnotatorPosterior>& annotators() const { return annotators_; }
  const TransitionPosterior& transitions() const { return transitions_; }
  const ObservationPosterior& observations() const { return observations_; }
  const SequencePosterior& sequences() const { return sequences_; }
  const std::vector<IterationRecord>& trace() const { return trace_; }

  /// Replaces one annotator posterior (tests and warm starts).
  void set_annotator(int k, AnnotatorPosterior post);
  void set_transitions(TransitionPosterior post);
  void set_observations(ObservationPosterior post);

  /// E[ln T] for the chain, with the start row used for the first token.
  const MatrixXd& expected_log_transitions() const { return log_trans_; }
  const RowVectorXd& expected_log_initial() const { return log_init_; }
  /// E[ln rho], J x V (empty when text is disabled).
  const MatrixXd& expected_log_words() const { return log_words_; }

  /// L_n x J matrix of summed annotator E[ln A] plus the word term.
  MatrixXd token_log_likelihood(int n) const;
  double token_log_likelihood(int n, int tau, Label j) const;

  MatrixXd forward(int n) const;
  MatrixXd backward(int n) const;
  DocPosterior e_step(int n) const;
  /// E-step on every document; returns the largest change in r.
  double e_step_all();

  void m_step_annotators();
  void m_step_transitions();
  void m_step_observations();

  /// Sum of document log-partitions minus the KL of every parameter
  /// posterior from its prior. Valid right after an e-step.
  double elbo() const;

  ViterbiPath<double> viterbi(int n) const;
  double sequence_confidence(int n) const;
  /// Fills the Viterbi paths and scores of every document.
  void decode_all();

  /// Runs to convergence or max_iters; returns whether it converged.
  bool run();

 private:
  void refresh_chain();
  void refresh_words();

  const Corpus& corpus_;
  const AnnotationSet& annotations_;
  const LabelScheme& scheme_;
  BscConfig cfg_;

  std::vector<AnnotatorPosterior> annotators_;
  TransitionPosterior transitions_;
  ObservationPosterior observations_;
  SequencePosterior sequences_;
  std::vector<IterationRecord> trace_;

  RowVectorXd log_init_;
  MatrixXd log_trans_;
  MatrixXd log_words_;
};

struct VbResult {
  SequencePosterior sequences;
  std::vector<AnnotatorPosterior> annotators;
  TransitionPosterior transitions;
  ObservationPosterior observations;
  std::vector<IterationRecord> trace;
  bool converged = false;
};

VbResult run_vb(const Corpus& corpus, const AnnotationSet& annotations, const LabelScheme& scheme,
                const BscConfig& cfg);

}  // namespace bsc
