#include "bsc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bsc {

namespace {

void check_aligned(const std::vector<LabelSequence>& pred, const std::vector<LabelSequence>& gold) {
  if (pred.size() != gold.size()) {
    throw std::invalid_argument("prediction and gold document counts differ");
  }
  for (size_t n = 0; n < pred.size(); ++n) {
    if (pred[n].size() != gold[n].size()) {
      throw std::invalid_argument("length mismatch in document " + std::to_string(n));
    }
  }
}

int overlap(const Span& a, const Span& b) {
  return std::max(0, std::min(a.end, b.end) - std::max(a.start, b.start));
}

ScoreReport from_counts(double pred_credit, double pred_total, double gold_credit,
                        double gold_total) {
  ScoreReport rep;
  rep.precision = pred_total > 0 ? 100.0 * pred_credit / pred_total : 0.0;
  rep.recall = gold_total > 0 ? 100.0 * gold_credit / gold_total : 0.0;
  const double sum = rep.precision + rep.recall;
  rep.f1 = sum > 0 ? 2.0 * rep.precision * rep.recall / sum : 0.0;
  return rep;
}

// Share of `s`'s tokens covered by same-type spans in `others`.
double coverage(const Span& s, const std::vector<Span>& others) {
  int covered = 0;
  for (const Span& o : others) {
    if (o.type == s.type) covered += overlap(s, o);
  }
  return static_cast<double>(covered) / s.length();
}

}  // namespace

ScoreReport strict_f1(const std::vector<LabelSequence>& pred, const std::vector<LabelSequence>& gold,
                      const LabelScheme& scheme) {
  check_aligned(pred, gold);
  double tp = 0, np = 0, ng = 0;
  for (size_t n = 0; n < pred.size(); ++n) {
    const auto p = spans_from_labels(pred[n], scheme).spans;
    const auto g = spans_from_labels(gold[n], scheme).spans;
    np += static_cast<double>(p.size());
    ng += static_cast<double>(g.size());
    for (const Span& s : p) {
      if (std::find(g.begin(), g.end(), s) != g.end()) tp += 1;
    }
  }
  return from_counts(tp, np, tp, ng);
}

ScoreReport strict_f1(const LabelSequence& pred, const LabelSequence& gold,
                      const LabelScheme& scheme) {
  return strict_f1(std::vector<LabelSequence>{pred}, std::vector<LabelSequence>{gold}, scheme);
}

ScoreReport relaxed_f1(const std::vector<LabelSequence>& pred,
                       const std::vector<LabelSequence>& gold, const LabelScheme& scheme) {
  check_aligned(pred, gold);
  double p_credit = 0, np = 0, g_credit = 0, ng = 0;
  for (size_t n = 0; n < pred.size(); ++n) {
    const auto p = spans_from_labels(pred[n], scheme).spans;
    const auto g = spans_from_labels(gold[n], scheme).spans;
    np += static_cast<double>(p.size());
    ng += static_cast<double>(g.size());
    for (const Span& s : p) p_credit += coverage(s, g);
    for (const Span& s : g) g_credit += coverage(s, p);
  }
  return from_counts(p_credit, np, g_credit, ng);
}

ScoreReport relaxed_f1(const LabelSequence& pred, const LabelSequence& gold,
                       const LabelScheme& scheme) {
  return relaxed_f1(std::vector<LabelSequence>{pred}, std::vector<LabelSequence>{gold}, scheme);
}

double cross_entropy(const std::vector<MatrixXd>& posteriors,
                     const std::vector<LabelSequence>& gold) {
  if (posteriors.size() != gold.size()) {
    throw std::invalid_argument("posterior and gold document counts differ");
  }
  double total = 0.0;
  long tokens = 0;
  for (size_t n = 0; n < gold.size(); ++n) {
    const MatrixXd& r = posteriors[n];
    if (static_cast<size_t>(r.rows()) != gold[n].size()) {
      throw std::invalid_argument("length mismatch in document " + std::to_string(n));
    }
    for (size_t t = 0; t < gold[n].size(); ++t) {
      const double p = r(static_cast<Eigen::Index>(t), gold[n][t]);
      total -= std::log(std::max(p, 1e-12));
      ++tokens;
    }
  }
  return tokens > 0 ? total / static_cast<double>(tokens) : 0.0;
}

double token_accuracy(const std::vector<LabelSequence>& pred,
                      const std::vector<LabelSequence>& gold) {
  check_aligned(pred, gold);
  long right = 0, total = 0;
  for (size_t n = 0; n < pred.size(); ++n) {
    for (size_t t = 0; t < pred[n].size(); ++t) {
      right += pred[n][t] == gold[n][t];
      ++total;
    }
  }
  return total > 0 ? static_cast<double>(right) / static_cast<double>(total) : 0.0;
}

namespace {

struct RawErrors {
  ErrorReport rep;
  double length_diff_sum = 0.0;
};

void accumulate_errors(RawErrors& acc, const LabelSequence& pred_seq,
                       const LabelSequence& gold_seq, const LabelScheme& scheme) {
  const auto decoded = spans_from_labels(pred_seq, scheme);
  const auto& pred = decoded.spans;
  const auto gold = spans_from_labels(gold_seq, scheme).spans;
  ErrorReport& rep = acc.rep;
  rep.invalid += static_cast<int>(decoded.invalid_positions.size());

  struct Pair {
    int ov, g, p;
  };
  std::vector<Pair> pairs;
  std::vector<int> pred_hits(pred.size(), 0), gold_hits(gold.size(), 0);
  for (size_t g = 0; g < gold.size(); ++g) {
    for (size_t p = 0; p < pred.size(); ++p) {
      const int ov = overlap(gold[g], pred[p]);
      if (ov > 0) {
        pairs.push_back({ov, static_cast<int>(g), static_cast<int>(p)});
        ++pred_hits[p];
        ++gold_hits[g];
      }
    }
  }
  std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
    if (a.ov != b.ov) return a.ov > b.ov;
    if (a.g != b.g) return a.g < b.g;
    return a.p < b.p;
  });

  std::vector<int> gold_match(gold.size(), -1), pred_match(pred.size(), -1);
  for (const Pair& pr : pairs) {
    if (gold_match[static_cast<size_t>(pr.g)] >= 0 || pred_match[static_cast<size_t>(pr.p)] >= 0) {
      continue;
    }
    gold_match[static_cast<size_t>(pr.g)] = pr.p;
    pred_match[static_cast<size_t>(pr.p)] = pr.g;
  }

  for (size_t g = 0; g < gold.size(); ++g) {
    const int pi = gold_match[g];
    if (pi < 0) {
      if (gold_hits[g] > 0) {
        ++rep.fused_components;
      } else {
        ++rep.missed_span;
      }
      continue;
    }
    const Span& gs = gold[g];
    const Span& ps = pred[static_cast<size_t>(pi)];
    ++rep.matched_pairs;
    acc.length_diff_sum += std::abs(ps.length() - gs.length());
    if (ps.start == gs.start && ps.end == gs.end) {
      if (ps.type == gs.type) {
        ++rep.exact_match;
      } else {
        ++rep.wrong_type;
      }
      continue;
    }
    ++rep.partial_match;
    if (ps.start > gs.start) ++rep.late_start;
    if (ps.start < gs.start) ++rep.early_start;
    if (ps.end < gs.end) ++rep.early_finish;
    if (ps.end > gs.end) ++rep.late_finish;
  }
  for (size_t p = 0; p < pred.size(); ++p) {
    if (pred_match[p] >= 0) continue;
    if (pred_hits[p] > 0) {
      ++rep.split_components;
    } else {
      ++rep.false_positive;
    }
  }
  for (int h : pred_hits) rep.fused_spans += h >= 2;
  for (int h : gold_hits) rep.splits += h >= 2;
}

ErrorReport finish(RawErrors& acc) {
  acc.rep.length_error =
      acc.rep.matched_pairs > 0 ? acc.length_diff_sum / acc.rep.matched_pairs : 0.0;
  return acc.rep;
}

}  // namespace

ErrorReport error_report(const LabelSequence& pred, const LabelSequence& gold,
                         const LabelScheme& scheme) {
  return error_report(std::vector<LabelSequence>{pred}, std::vector<LabelSequence>{gold}, scheme);
}

ErrorReport error_report(const std::vector<LabelSequence>& pred,
                         const std::vector<LabelSequence>& gold, const LabelScheme& scheme) {
  check_aligned(pred, gold);
  RawErrors acc;
  for (size_t n = 0; n < pred.size(); ++n) accumulate_errors(acc, pred[n], gold[n], scheme);
  return finish(acc);
}

}  // namespace bsc
