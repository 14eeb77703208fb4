#include "bsc/aggregate.hpp"

#include <cmath>
#include <stdexcept>

namespace bsc {

std::string method_name(const AggregatorConfig& cfg) {
  switch (cfg.method) {
    case Method::MajorityVote: return "mv";
    case Method::DawidSkene: return "ds";
    case Method::Ibcc: return "ibcc";
    case Method::Bsc: return "bsc-" + std::string(to_string(cfg.bsc.model_kind));
  }
  return "?";
}

void set_method(AggregatorConfig& cfg, std::string_view name) {
  if (name == "mv") {
    cfg.method = Method::MajorityVote;
  } else if (name == "ds") {
    cfg.method = Method::DawidSkene;
  } else if (name == "ibcc") {
    cfg.method = Method::Ibcc;
  } else if (name.starts_with("bsc-")) {
    cfg.method = Method::Bsc;
    cfg.bsc.model_kind = parse_model_kind(name.substr(4));
  } else {
    throw std::invalid_argument("unknown method: " + std::string(name));
  }
}

namespace {

double independent_confidence(const MatrixXd& r) {
  double log_p = 0.0;
  for (Eigen::Index t = 0; t < r.rows(); ++t) log_p += std::log(r.row(t).maxCoeff());
  return std::exp(log_p);
}

Aggregation run_baseline(const Corpus& corpus, const AnnotationSet& annotations,
                         const LabelScheme& scheme, const AggregatorConfig& cfg) {
  const int J = scheme.num_labels();
  std::vector<int> annotated;
  for (int n = 0; n < corpus.num_docs(); ++n) {
    if (!annotations.for_doc(n).empty()) annotated.push_back(n);
  }
  AnnotationSet sub(annotations.num_annotators(), static_cast<int>(annotated.size()));
  for (size_t i = 0; i < annotated.size(); ++i) {
    for (const auto& a : annotations.for_doc(annotated[i])) {
      sub.set(static_cast<int>(i), a.annotator, a.labels);
    }
  }

  Aggregation out;
  TokenPosteriorTable table;
  if (!annotated.empty()) {
    switch (cfg.method) {
      case Method::MajorityVote:
        table = majority_vote(sub, J);
        break;
      case Method::DawidSkene: {
        DawidSkeneOptions opts;
        opts.smoothing = cfg.smoothing;
        opts.max_iters = cfg.bsc.max_iters;
        opts.tol = cfg.bsc.convergence_tol;
        auto res = dawid_skene_em(sub, J, opts);
        out.converged = res.converged;
        out.iterations = res.iterations;
        table = std::move(res.table);
        break;
      }
      case Method::Ibcc: {
        IbccOptions opts;
        opts.alpha0 = cfg.bsc.annotator.alpha0;
        opts.epsilon0 = cfg.bsc.annotator.epsilon0;
        opts.class_prior0 = cfg.bsc.gamma0;
        opts.max_iters = cfg.bsc.max_iters;
        opts.tol = cfg.bsc.convergence_tol;
        auto res = ibcc_vb(sub, J, opts);
        out.converged = res.converged;
        out.iterations = res.iterations;
        table = std::move(res.table);
        break;
      }
      case Method::Bsc:
        throw std::logic_error("not a baseline");
    }
  }

  const size_t N = static_cast<size_t>(corpus.num_docs());
  out.posteriors.resize(N);
  out.labels.resize(N);
  out.confidence.resize(N);
  for (int n = 0; n < corpus.num_docs(); ++n) {
    const size_t i = static_cast<size_t>(n);
    out.posteriors[i] = MatrixXd::Constant(corpus.doc(n).length(), J, 1.0 / J);
    out.labels[i] = LabelSequence(static_cast<size_t>(corpus.doc(n).length()), kOutside);
  }
  for (size_t i = 0; i < annotated.size(); ++i) {
    const size_t n = static_cast<size_t>(annotated[i]);
    out.posteriors[n] = std::move(table.posteriors[i]);
    out.labels[n] = std::move(table.labels[i]);
  }
  for (size_t n = 0; n < N; ++n) out.confidence[n] = independent_confidence(out.posteriors[n]);
  return out;
}

}  // namespace

Aggregation aggregate(const Corpus& corpus, const AnnotationSet& annotations,
                      const LabelScheme& scheme, const AggregatorConfig& cfg) {
  if (cfg.method != Method::Bsc) return run_baseline(corpus, annotations, scheme, cfg);

  Aggregation out;
  VbResult res = run_vb(corpus, annotations, scheme, cfg.bsc);
  out.converged = res.converged;
  out.iterations = static_cast<int>(res.trace.size());
  out.posteriors = res.sequences.r;
  out.labels = res.sequences.viterbi;
  for (int n = 0; n < corpus.num_docs(); ++n) {
    out.confidence.push_back(res.sequences.sequence_confidence(n));
  }
  out.bsc = std::move(res);
  return out;
}

}  // namespace bsc
