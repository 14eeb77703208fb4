#include "bsc/active_learning.hpp"

#include "bsc/metrics.hpp"
#include "bsc/parallel.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <random>
#include <stdexcept>

namespace bsc {

std::string_view to_string(Selector s) {
  return s == Selector::LeastConfidence ? "least_confidence" : "random";
}

Selector parse_selector(std::string_view name) {
  if (name == "least_confidence" || name == "lc") return Selector::LeastConfidence;
  if (name == "random") return Selector::Random;
  throw std::invalid_argument("unknown selector: " + std::string(name));
}

std::vector<int> least_confidence_rank(const std::vector<double>& confidence,
                                       const std::vector<int>& candidates) {
  std::vector<int> order = candidates;
  auto lc = [&](int n) {
    return 1.0 - std::clamp(confidence.at(static_cast<size_t>(n)), 0.0, 1.0);
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const double la = lc(a), lb = lc(b);
    if (la != lb) return la > lb;
    return a < b;
  });
  return order;
}

namespace {

struct RepeatResult {
  std::vector<CurvePoint> points;
  double min_lc = 1.0;
  double max_lc = 0.0;
};

std::uint64_t stream_seed(std::uint64_t seed, int repeat, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(repeat), static_cast<std::uint32_t>(stream)};
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

RepeatResult run_repeat(const Corpus& corpus, const AnnotationSet& pool, const GoldLabels& gold,
                        const LabelScheme& scheme, const ALConfig& cfg, int repeat) {
  // Separate streams so the initial set does not depend on the selector.
  std::mt19937_64 init_rng(stream_seed(cfg.seed, repeat, 0));
  std::mt19937_64 select_rng(stream_seed(cfg.seed, repeat, 1));
  std::mt19937_64 acquire_rng(stream_seed(cfg.seed, repeat, 2));

  std::vector<std::pair<int, int>> entries;
  for (int n = 0; n < pool.num_docs(); ++n) {
    for (const auto& a : pool.for_doc(n)) entries.emplace_back(n, a.annotator);
  }
  std::shuffle(entries.begin(), entries.end(), init_rng);

  AnnotationSet current(pool.num_annotators(), pool.num_docs());
  for (int i = 0; i < cfg.initial_set_size; ++i) {
    const auto [n, k] = entries[static_cast<size_t>(i)];
    current.set(n, k, *pool.find(n, k));
  }

  std::vector<int> gold_docs;
  std::vector<LabelSequence> gold_seqs;
  for (int n = 0; n < corpus.num_docs(); ++n) {
    if (gold.has(n)) {
      gold_docs.push_back(n);
      gold_seqs.push_back(gold.at(n));
    }
  }

  RepeatResult out;
  for (int iteration = 0;; ++iteration) {
    const Aggregation agg = aggregate(corpus, current, scheme, cfg.aggregator);

    std::vector<LabelSequence> pred;
    std::vector<MatrixXd> post;
    for (int n : gold_docs) {
      pred.push_back(agg.labels[static_cast<size_t>(n)]);
      post.push_back(agg.posteriors[static_cast<size_t>(n)]);
    }
    CurvePoint pt;
    pt.iteration = iteration;
    pt.labels = current.size();
    pt.f1_strict = strict_f1(pred, gold_seqs, scheme).f1;
    pt.f1_relaxed = relaxed_f1(pred, gold_seqs, scheme).f1;
    pt.cee = cross_entropy(post, gold_seqs);
    pt.accuracy = token_accuracy(pred, gold_seqs);
    out.points.push_back(pt);

    const int budget = cfg.max_no_labels - current.size();
    if (budget <= 0) break;

    std::vector<int> candidates;
    for (int n = 0; n < corpus.num_docs(); ++n) {
      if (current.for_doc(n).size() < pool.for_doc(n).size()) candidates.push_back(n);
    }
    if (candidates.empty()) break;

    for (int n : candidates) {
      const double lc = 1.0 - std::clamp(agg.confidence[static_cast<size_t>(n)], 0.0, 1.0);
      out.min_lc = std::min(out.min_lc, lc);
      out.max_lc = std::max(out.max_lc, lc);
    }

    std::vector<int> ranked;
    if (cfg.selector == Selector::LeastConfidence) {
      ranked = least_confidence_rank(agg.confidence, candidates);
    } else {
      ranked = candidates;
      std::shuffle(ranked.begin(), ranked.end(), select_rng);
    }
    const int take = std::min({cfg.batch_size, budget, static_cast<int>(ranked.size())});
    for (int i = 0; i < take; ++i) {
      const int n = ranked[static_cast<size_t>(i)];
      std::vector<int> unused;
      for (const auto& a : pool.for_doc(n)) {
        if (!current.contains(n, a.annotator)) unused.push_back(a.annotator);
      }
      std::uniform_int_distribution<size_t> pick(0, unused.size() - 1);
      const int k = unused[pick(acquire_rng)];
      current.set(n, k, *pool.find(n, k));
    }
  }
  return out;
}

}  // namespace

LearningCurve simulate(const Corpus& corpus, const AnnotationSet& pool, const GoldLabels& gold,
                       const LabelScheme& scheme, const ALConfig& cfg) {
  if (cfg.batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
  if (cfg.initial_set_size < 1) throw std::invalid_argument("initial_set_size must be at least 1");
  if (cfg.repeats < 1) throw std::invalid_argument("repeats must be at least 1");
  if (pool.size() < cfg.initial_set_size) {
    throw std::invalid_argument("annotation pool is smaller than the initial set");
  }
  if (cfg.max_no_labels > pool.size()) {
    throw std::invalid_argument("max_no_labels exceeds the annotation pool");
  }
  if (gold.count() == 0) throw std::invalid_argument("active learning needs gold labels");
  pool.validate(corpus, scheme);

  std::vector<RepeatResult> repeats(static_cast<size_t>(cfg.repeats));
  detail::parallel_for(cfg.repeats, cfg.threads, [&](int r) {
    repeats[static_cast<size_t>(r)] = run_repeat(corpus, pool, gold, scheme, cfg, r);
  });

  LearningCurve curve;
  curve.method = method_name(cfg.aggregator);
  curve.selector = std::string(to_string(cfg.selector));
  size_t longest = 0;
  for (const auto& r : repeats) {
    longest = std::max(longest, r.points.size());
    curve.per_repeat.push_back(r.points);
    curve.min_lc = std::min(curve.min_lc, r.min_lc);
    curve.max_lc = std::max(curve.max_lc, r.max_lc);
  }
  for (size_t i = 0; i < longest; ++i) {
    CurvePoint mean;
    mean.iteration = static_cast<int>(i);
    int count = 0;
    for (const auto& r : repeats) {
      if (i >= r.points.size()) continue;
      const CurvePoint& p = r.points[i];
      mean.labels += p.labels;
      mean.f1_strict += p.f1_strict;
      mean.f1_relaxed += p.f1_relaxed;
      mean.cee += p.cee;
      mean.accuracy += p.accuracy;
      ++count;
    }
    mean.labels /= count;
    mean.f1_strict /= count;
    mean.f1_relaxed /= count;
    mean.cee /= count;
    mean.accuracy /= count;
    curve.points.push_back(mean);
  }
  return curve;
}

}  // namespace bsc
