#pragma once

#include "bsc/active_learning.hpp"
#include "bsc/annotator.hpp"
#include "bsc/corpus.hpp"
#include "bsc/inference.hpp"
#include "bsc/metrics.hpp"
#include "bsc/scheme.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bsc {

/// Writes to a sibling temporary file and renames it over `path`, so a
/// failure never leaves a partial file behind.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& body);

/// posteriors.tsv: header `doc_id position <label names...>`, then one row
/// per token with J probabilities printed to round-trip exactly.
void write_posteriors(const std::filesystem::path& path, const Corpus& corpus,
                      const std::vector<MatrixXd>& posteriors, const LabelScheme& scheme);
/// Returns one matrix per corpus document; documents absent from the file
/// come back empty.
std::vector<MatrixXd> read_posteriors(const std::filesystem::path& path, const Corpus& corpus,
                                      const LabelScheme& scheme);

/// decoded.conll: `doc_id token label`, blank line between documents.
void write_decoded(const std::filesystem::path& path, const Corpus& corpus,
                   const std::vector<LabelSequence>& labels, const LabelScheme& scheme);

/// scores.txt: `key<TAB>value` lines with keys precision, recall, f1 and,
/// when available, cee.
void write_scores(const std::filesystem::path& path, const ScoreReport& report,
                  const std::string& mode);
/// errors.txt: `key<TAB>value` lines, one per error category.
void write_errors(const std::filesystem::path& path, const ErrorReport& report);
std::string format_report_table(const ScoreReport& scores, const ErrorReport& errors,
                                const std::string& mode);

/// curve.csv: method,selector,iteration,labels,f1_strict,f1_relaxed,cee,accuracy
void write_curves(const std::filesystem::path& path, const std::vector<LearningCurve>& curves);

/// Model state: annotator posteriors (annotator-major; rows ordered j then
/// previous label l, columns m), then transition and word counts.
struct ModelDump {
  ModelKind kind = ModelKind::Cm;
  int num_labels = 0;
  std::vector<AnnotatorPosterior> annotators;
  std::optional<TransitionPosterior> transitions;
  std::optional<ObservationPosterior> observations;
};

void write_model_dump(const std::filesystem::path& path, const ModelDump& dump);
ModelDump read_model_dump(const std::filesystem::path& path);

}  // namespace bsc
