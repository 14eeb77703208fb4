#pragma once

#include "bsc/corpus.hpp"
#include "bsc/scheme.hpp"
#include "bsc/types.hpp"

#include <vector>

namespace bsc {

/// Independent per-token posteriors and their argmax decoding.
struct TokenPosteriorTable {
  std::vector<MatrixXd> posteriors;
  std::vector<LabelSequence> labels;
};

/// Row-wise argmax with ties going to the lower label index.
LabelSequence argmax_labels(const MatrixXd& posterior);

/// Vote fractions among the annotators of each document. Throws
/// std::invalid_argument for a document nobody labelled.
TokenPosteriorTable majority_vote(const AnnotationSet& annotations, int num_labels);
inline TokenPosteriorTable majority_vote(const AnnotationSet& annotations,
                                         const LabelScheme& scheme) {
  return majority_vote(annotations, scheme.num_labels());
}

struct DawidSkeneOptions {
  /// Additive smoothing on confusion and class-proportion counts.
  double smoothing = 0.1;
  int max_iters = 200;
  double tol = 1e-4;
};

struct DawidSkeneResult {
  TokenPosteriorTable table;
  /// Per-annotator J x J confusion matrices, row = true label.
  std::vector<MatrixXd> confusion;
  RowVectorXd class_proportions;
  int iterations = 0;
  bool converged = false;
};

/// Maximum-likelihood EM for per-annotator confusion matrices, initialised
/// from majority-vote fractions. Each round is an M-step followed by an
/// E-step.
DawidSkeneResult dawid_skene_em(const AnnotationSet& annotations, int num_labels,
                                const DawidSkeneOptions& opts = {});

struct IbccOptions {
  double alpha0 = 1.0;
  double epsilon0 = 1.0;
  double class_prior0 = 1.0;
  int max_iters = 200;
  double tol = 1e-4;
};

struct IbccResult {
  TokenPosteriorTable table;
  /// Dirichlet pseudo-counts per annotator (J x J) and for the class
  /// proportions (1 x J).
  std::vector<MatrixXd> confusion_counts;
  RowVectorXd class_counts;
  std::vector<double> deltas;
  int iterations = 0;
  bool converged = false;
};

/// Variational Bayes with Dirichlet priors on class proportions and on each
/// confusion-matrix row. Deterministic: expectations start from the priors.
IbccResult ibcc_vb(const AnnotationSet& annotations, int num_labels, const IbccOptions& opts = {});

}  // namespace bsc
