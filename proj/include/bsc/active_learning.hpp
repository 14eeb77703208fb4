#pragma once

#include "bsc/aggregate.hpp"
#include "bsc/corpus.hpp"
#include "bsc/scheme.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace bsc {

enum class Selector { LeastConfidence, Random };

std::string_view to_string(Selector s);
Selector parse_selector(std::string_view name);

struct ALConfig {
  /// Annotations drawn at random from the pool before the first round.
  int initial_set_size = 100;
  /// Documents selected per round; each gets one more annotation.
  int batch_size = 10;
  int max_no_labels = 300;
  Selector selector = Selector::LeastConfidence;
  int repeats = 1;
  std::uint64_t seed = 0;
  AggregatorConfig aggregator{};
  /// Workers across repeats.
  int threads = 1;
};

struct CurvePoint {
  int iteration = 0;
  double labels = 0.0;
  double f1_strict = 0.0;
  double f1_relaxed = 0.0;
  double cee = 0.0;
  double accuracy = 0.0;
};

struct LearningCurve {
  std::string method;
  std::string selector;
  /// Mean over repeats, one point per round.
  std::vector<CurvePoint> points;
  std::vector<std::vector<CurvePoint>> per_repeat;
  /// Every least-confidence score seen while ranking.
  double min_lc = 1.0;
  double max_lc = 0.0;
};

/// Candidates ordered by descending 1 - confidence, ties to the lower
/// document index. Confidences are clamped into [0, 1].
std::vector<int> least_confidence_rank(const std::vector<double>& confidence,
                                       const std::vector<int>& candidates);

/// Pool-based simulation: start from a random subset of `pool`, then
/// alternately train the aggregator, score it on `gold`, and acquire one
/// unused annotation for each of the `batch_size` selected documents.
/// Documents whose annotations are used up are never selected again.
LearningCurve simulate(const Corpus& corpus, const AnnotationSet& pool, const GoldLabels& gold,
                       const LabelScheme& scheme, const ALConfig& cfg);

}  // namespace bsc
