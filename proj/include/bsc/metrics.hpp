#pragma once

#include "bsc/scheme.hpp"
#include "bsc/types.hpp"

#include <optional>
#include <vector>

namespace bsc {

/// Span scores in percent; `cee` in nats per token when posteriors exist.
struct ScoreReport {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::optional<double> cee;
};

/// Exact span match on (start, end, type), pooled over documents.
ScoreReport strict_f1(const std::vector<LabelSequence>& pred, const std::vector<LabelSequence>& gold,
                      const LabelScheme& scheme);
ScoreReport strict_f1(const LabelSequence& pred, const LabelSequence& gold,
                      const LabelScheme& scheme);

/// Fractional span credit: each span scores the share of its tokens covered
/// by spans of the same type on the other side.
ScoreReport relaxed_f1(const std::vector<LabelSequence>& pred,
                       const std::vector<LabelSequence>& gold, const LabelScheme& scheme);
ScoreReport relaxed_f1(const LabelSequence& pred, const LabelSequence& gold,
                       const LabelScheme& scheme);

/// Mean -ln r[gold] over tokens, with probabilities floored at 1e-12.
double cross_entropy(const std::vector<MatrixXd>& posteriors,
                     const std::vector<LabelSequence>& gold);

/// Fraction of tokens whose label equals gold.
double token_accuracy(const std::vector<LabelSequence>& pred,
                      const std::vector<LabelSequence>& gold);

/// Span error taxonomy. Predicted and gold spans are paired one-to-one,
/// greedily by largest token overlap (ties to the earlier gold span, then
/// the earlier predicted span).
///
/// An unpaired gold span that still overlaps a prediction is a component of
/// a fused prediction and counted in `fused_components`, not as missed;
/// likewise unpaired predictions overlapping gold count in
/// `split_components`, not as false positives. So
///   exact_match + wrong_type + partial_match + fused_components + missed_span
/// equals the number of gold spans.
struct ErrorReport {
  int exact_match = 0;
  int wrong_type = 0;
  int partial_match = 0;
  int missed_span = 0;
  int false_positive = 0;
  int late_start = 0;
  int early_start = 0;
  int late_finish = 0;
  int early_finish = 0;
  int fused_spans = 0;
  int splits = 0;
  int invalid = 0;
  /// Mean |pred length - gold length| over paired spans.
  double length_error = 0.0;
  int fused_components = 0;
  int split_components = 0;
  int matched_pairs = 0;
};

ErrorReport error_report(const LabelSequence& pred, const LabelSequence& gold,
                         const LabelScheme& scheme);
ErrorReport error_report(const std::vector<LabelSequence>& pred,
                         const std::vector<LabelSequence>& gold, const LabelScheme& scheme);

}  // namespace bsc
