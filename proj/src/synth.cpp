#include "bsc/synth.hpp"

#include <random>
#include <stdexcept>

namespace bsc {

namespace {

using Rng = std::mt19937_64;

RowVectorXd sample_dirichlet(Rng& rng, const RowVectorXd& alpha) {
  RowVectorXd x(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) {
    if (alpha(i) <= 0.0) {
      x(i) = 0.0;
      continue;
    }
    std::gamma_distribution<double> g(alpha(i), 1.0);
    x(i) = g(rng);
  }
  const double total = x.sum();
  if (total <= 0.0) {
    // Every gamma draw underflowed; fall back to the mean.
    return alpha / alpha.sum();
  }
  return x / total;
}

int sample_categorical(Rng& rng, const RowVectorXd& p) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double target = u(rng) * p.sum();
  double acc = 0.0;
  int last = -1;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) <= 0.0) continue;
    acc += p(i);
    last = static_cast<int>(i);
    if (target < acc) return last;
  }
  return last;
}

// Puts `correct` mass on label `target` and spreads the rest over `others`
// with Dirichlet(1) weights.
RowVectorXd confusion_row(Rng& rng, int J, int target, double correct,
                          const std::vector<int>& others) {
  RowVectorXd row = RowVectorXd::Zero(J);
  row(target) = correct;
  if (!others.empty()) {
    const RowVectorXd w = sample_dirichlet(rng, RowVectorXd::Ones(static_cast<Eigen::Index>(others.size())));
    for (size_t i = 0; i < others.size(); ++i) {
      row(others[i]) += (1.0 - correct) * w(static_cast<Eigen::Index>(i));
    }
  } else {
    row(target) = 1.0;
  }
  return row;
}

MatrixXd sample_annotator(Rng& rng, const LabelScheme& scheme, ModelKind kind, double d) {
  const int J = scheme.num_labels();
  auto all_but = [J](int skip) {
    std::vector<int> v;
    for (int i = 0; i < J; ++i) if (i != skip) v.push_back(i);
    return v;
  };

  switch (kind) {
    case ModelKind::Acc:
    case ModelKind::Cv: {
      MatrixXd table = MatrixXd::Constant(J, J, (1.0 - d) / (J - 1));
      table.diagonal().setConstant(d);
      return table;
    }
    case ModelKind::Spam: {
      const double accuracy = (d - 1.0 / J) / (1.0 - 1.0 / J);
      const RowVectorXd xi = sample_dirichlet(rng, RowVectorXd::Ones(J));
      MatrixXd table(J, J);
      for (int j = 0; j < J; ++j) {
        table.row(j) = (1.0 - accuracy) * xi;
        table(j, j) += accuracy;
      }
      return table;
    }
    case ModelKind::Cm: {
      MatrixXd table(J, J);
      for (int j = 0; j < J; ++j) table.row(j) = confusion_row(rng, J, j, d, all_but(j));
      return table;
    }
    case ModelKind::Seq: {
      MatrixXd table(J * J, J);
      for (int j = 0; j < J; ++j) {
        for (int l = 0; l < J; ++l) {
          // When the annotator's own previous label forbids the true label,
          // the best it can do is open a span of the right type.
          const int target =
              scheme.is_disallowed(l, j) ? scheme.begin_label(scheme.type_of(j)) : j;
          std::vector<int> others;
          for (int m = 0; m < J; ++m) {
            if (m != target && !scheme.is_disallowed(l, m)) others.push_back(m);
          }
          table.row(j * J + l) = confusion_row(rng, J, target, d, others);
        }
      }
      return table;
    }
  }
  return {};
}

}  // namespace

SynthData synth_generate(const LabelScheme& scheme, const SynthConfig& cfg) {
  const int J = scheme.num_labels();
  if (cfg.num_docs < 1 || cfg.doc_length < 1 || cfg.num_annotators < 1) {
    throw std::invalid_argument("synth: N, L and K must be at least 1");
  }
  if (!(cfg.diag_mass > 1.0 / J && cfg.diag_mass <= 1.0)) {
    throw std::invalid_argument("synth: diag_mass must lie in (1/J, 1]");
  }
  if (cfg.vocab_size < 1) throw std::invalid_argument("synth: vocab_size must be at least 1");
  if (!(cfg.coverage > 0.0 && cfg.coverage <= 1.0)) {
    throw std::invalid_argument("synth: coverage must lie in (0, 1]");
  }

  Rng rng(cfg.seed);
  SynthData data;

  data.transitions.resize(J, J);
  for (int j = 0; j < J; ++j) {
    RowVectorXd alpha(J);
    for (int i = 0; i < J; ++i) {
      alpha(i) = scheme.is_disallowed(j, i) ? 0.0 : cfg.transition_concentration;
    }
    data.transitions.row(j) = sample_dirichlet(rng, alpha);
  }
  MatrixXd words(J, cfg.vocab_size);
  for (int j = 0; j < J; ++j) {
    words.row(j) =
        sample_dirichlet(rng, RowVectorXd::Constant(cfg.vocab_size, cfg.observation_concentration));
  }
  for (int k = 0; k < cfg.num_annotators; ++k) {
    data.annotator_tables.push_back(sample_annotator(rng, scheme, cfg.model_kind, cfg.diag_mass));
  }

  for (int w = 0; w < cfg.vocab_size; ++w) data.corpus.intern("w" + std::to_string(w));

  std::vector<LabelSequence> truth;
  for (int n = 0; n < cfg.num_docs; ++n) {
    Document doc;
    doc.id = "d" + std::to_string(n);
    LabelSequence t;
    Label prev = kOutside;
    for (int tau = 0; tau < cfg.doc_length; ++tau) {
      const Label cur = sample_categorical(rng, data.transitions.row(prev));
      t.push_back(cur);
      doc.tokens.push_back(sample_categorical(rng, words.row(cur)));
      prev = cur;
    }
    data.corpus.add_document(std::move(doc));
    truth.push_back(std::move(t));
  }

  data.annotations = AnnotationSet(cfg.num_annotators, cfg.num_docs);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> pick(0, cfg.num_annotators - 1);
  const bool sequential = cfg.model_kind == ModelKind::Seq;
  for (int n = 0; n < cfg.num_docs; ++n) {
    std::vector<bool> labels_doc(static_cast<size_t>(cfg.num_annotators));
    bool any = false;
    for (int k = 0; k < cfg.num_annotators; ++k) {
      labels_doc[static_cast<size_t>(k)] = cfg.coverage >= 1.0 || u(rng) < cfg.coverage;
      any = any || labels_doc[static_cast<size_t>(k)];
    }
    if (!any) labels_doc[static_cast<size_t>(pick(rng))] = true;

    const LabelSequence& t = truth[static_cast<size_t>(n)];
    for (int k = 0; k < cfg.num_annotators; ++k) {
      if (!labels_doc[static_cast<size_t>(k)]) continue;
      const MatrixXd& table = data.annotator_tables[static_cast<size_t>(k)];
      LabelSequence c;
      Label prev = kOutside;
      for (Label j : t) {
        const Eigen::Index row = sequential ? j * J + prev : j;
        const Label m = sample_categorical(rng, table.row(row));
        c.push_back(m);
        prev = m;
      }
      data.annotations.set(n, k, std::move(c));
    }
  }

  data.gold.sequences.reserve(truth.size());
  for (auto& t : truth) data.gold.sequences.emplace_back(std::move(t));
  return data;
}

}  // namespace bsc
