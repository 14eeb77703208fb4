#pragma once

#include "bsc/corpus.hpp"
#include "bsc/scheme.hpp"
#include "bsc/types.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bsc {

/// Annotator noise models, from one shared accuracy up to a confusion
/// tensor conditioned on the annotator's own previous label.
enum class ModelKind { Acc, Spam, Cv, Cm, Seq };

std::string_view to_string(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct AnnotatorPriorConfig {
  double alpha0 = 1.0;
  /// Extra pseudo-count on cells that correspond to a correct annotation.
  double epsilon0 = 1.0;
  /// Pinned pseudo-count for transitions the scheme forbids.
  double disallowed_mass = 1e-6;

  void validate() const;
};

/// Variational posterior of one annotator's model parameters.
///
/// Every row of `prior` / `counts` is the parameter vector of an independent
/// Dirichlet (a Beta when it has two entries):
///   Acc   1 x 2      (correct, incorrect) for the shared accuracy
///   Cv    J x 2      (correct, incorrect) per true label
///   Cm    J x J      row j = true label, column i = annotation
///   Seq   J*J x J    row j*J + l = (true label, previous annotation)
///   Spam  1 x 2      accuracy, plus `spam_prior` / `spam_counts` (1 x J) for
///                    the label distribution used when not copying the truth
///
/// `log_lik` caches E[ln A] with rows indexed like `counts` for Seq and by
/// true label otherwise; it is refreshed by `refresh()`.
struct AnnotatorPosterior {
  ModelKind kind = ModelKind::Cm;
  int num_labels = 0;
  MatrixXd prior;
  MatrixXd counts;
  RowVectorXd spam_prior;
  RowVectorXd spam_counts;
  MatrixXd log_lik;
  /// Spam only: cached E[ln accuracy] matching `log_lik`.
  double spam_log_copy = 0.0;

  void refresh();
  /// Resets the counts to the prior.
  void reset();
  /// KL(q || prior), summed over all Dirichlet factors.
  double kl_divergence() const;
};

std::vector<AnnotatorPosterior> init_prior(ModelKind kind, const LabelScheme& scheme,
                                           const AnnotatorPriorConfig& cfg, int num_annotators);
/// Scheme-free variant for the non-sequential kinds; Seq needs the scheme's
/// disallowed set and is rejected.
std::vector<AnnotatorPosterior> init_prior(ModelKind kind, int num_labels,
                                           const AnnotatorPriorConfig& cfg, int num_annotators);

/// E[ln A(j, c_prev, c_cur)]. `c_prev` may be kNoLabel at the first token;
/// it is then read as O.
double expected_log_A(const AnnotatorPosterior& post, Label j, Label c_prev, Label c_cur);

/// Row of `log_lik` whose column i holds E[ln A(j, c_prev, i)].
inline Eigen::Index log_lik_row(const AnnotatorPosterior& post, Label j, Label c_prev) {
  if (post.kind == ModelKind::Seq) {
    const Label l = c_prev == kNoLabel ? kOutside : c_prev;
    return static_cast<Eigen::Index>(j) * post.num_labels + l;
  }
  return j;
}

/// Adds expected co-occurrence counts from token posteriors `r` (one L_n x J
/// matrix per document) for annotator k. Documents k did not label add
/// nothing. For Spam the copy/spam split uses the expectations currently
/// cached in `post.log_lik`.
void accumulate_counts(AnnotatorPosterior& post, std::span<const MatrixXd> r,
                       const AnnotationSet& annotations, int annotator);

/// prior + expected counts under `r`, then refreshed. Rows of `r` must sum
/// to one within 1e-9.
AnnotatorPosterior update_counts(const AnnotatorPosterior& current, std::span<const MatrixXd> r,
                                 const AnnotationSet& annotations, int annotator);

/// Posterior-mean confusion tensor E[A]; J x J, or J*J x J for Seq with row
/// j*J + l. Every row sums to one.
MatrixXd posterior_mean(const AnnotatorPosterior& post);

}  // namespace bsc
