#pragma once

#include "bsc/annotator.hpp"
#include "bsc/corpus.hpp"
#include "bsc/scheme.hpp"

#include <cstdint>

namespace bsc {

struct SynthConfig {
  int num_docs = 200;
  int doc_length = 10;
  int num_annotators = 5;
  ModelKind model_kind = ModelKind::Seq;
  /// Probability an annotator gives the correct label; must lie in (1/J, 1].
  double diag_mass = 0.8;
  std::uint64_t seed = 0;
  int vocab_size = 20;
  /// Dirichlet concentration for allowed transition cells and for word rows.
  double transition_concentration = 1.0;
  double observation_concentration = 1.0;
  /// Probability that an annotator labels a given document. Every document
  /// keeps at least one annotator.
  double coverage = 1.0;
};

struct SynthData {
  Corpus corpus;
  AnnotationSet annotations;
  GoldLabels gold;
  /// True per-annotator likelihood tables, laid out like posterior_mean().
  std::vector<MatrixXd> annotator_tables;
  MatrixXd transitions;
};

/// Samples documents, true labels, tokens and annotations ancestrally from
/// the generative model. Forbidden transitions get exactly zero probability,
/// so gold sequences never contain them. Deterministic given the seed.
SynthData synth_generate(const LabelScheme& scheme, const SynthConfig& cfg);

}  // namespace bsc
