#include "bsc/baselines.hpp"
#include "bsc/inference.hpp"
#include "bsc/synth.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace bsc;

namespace {

const std::vector<ModelKind> kAllKinds = {ModelKind::Acc, ModelKind::Spam, ModelKind::Cv,
                                          ModelKind::Cm, ModelKind::Seq};

/// Replaces every posterior in the model with randomised pseudo-counts.
void randomise(BscModel& model, int K, int V, std::mt19937_64& rng) {
  for (int k = 0; k < K; ++k) {
    AnnotatorPosterior a = model.annotators()[static_cast<size_t>(k)];
    a.counts = oracle::jitter(a.prior, rng);
    if (a.kind == ModelKind::Spam) a.spam_counts = oracle::jitter(a.spam_prior, rng);
    model.set_annotator(k, a);
  }
  TransitionPosterior t = model.transitions();
  t.counts = oracle::jitter(t.prior, rng);
  model.set_transitions(t);
  ObservationPosterior o = model.observations();
  if (o.counts.size() > 0) {
    o.counts = oracle::jitter(MatrixXd::Constant(o.counts.rows(), V, o.kappa0), rng);
    model.set_observations(o);
  }
}

SynthData synth(ModelKind kind, std::uint64_t seed, int N = 50, int L = 10, double diag = 0.8) {
  SynthConfig cfg;
  cfg.model_kind = kind;
  cfg.seed = seed;
  cfg.num_docs = N;
  cfg.doc_length = L;
  cfg.diag_mass = diag;
  return synth_generate(LabelScheme({"ENT"}), cfg);
}

}  // namespace

TEST_CASE("e-step matches exhaustive enumeration") {
  const LabelScheme s({"ENT"});
  std::mt19937_64 rng(42);
  int checked = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const ModelKind kind = kAllKinds[static_cast<size_t>(trial) % kAllKinds.size()];
    auto fx = oracle::random_fixture(rng, 4, 4, 3, 3, 5);
    BscConfig cfg;
    cfg.model_kind = kind;
    cfg.use_text = trial % 2 == 0;
    cfg.use_transitions = trial % 3 != 0;
    BscModel model(fx.corpus, fx.annotations, s, cfg);
    randomise(model, fx.annotations.num_annotators(), fx.corpus.vocab_size(), rng);
    for (int n = 0; n < fx.corpus.num_docs(); ++n) {
      const MatrixXd ll = oracle::token_log_likelihood(model, fx.corpus, fx.annotations, n);
      CHECK(model.token_log_likelihood(n).isApprox(ll, 1e-12));
      const auto e = oracle::enumerate(model.expected_log_initial(),
                                       model.expected_log_transitions(), ll);
      const DocPosterior post = model.e_step(n);
      CAPTURE(trial);
      CHECK((post.r - e.r).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(post.log_partition == doctest::Approx(e.log_partition).epsilon(1e-12));
      CHECK(model.viterbi(n).path == e.best);
      for (size_t t = 0; t < post.s.size(); ++t) {
        CHECK((post.s[t].rowwise().sum().transpose() - post.r.row(static_cast<Eigen::Index>(t)))
                  .cwiseAbs()
                  .maxCoeff() < 1e-10);
        CHECK((post.s[t].colwise().sum() - post.r.row(static_cast<Eigen::Index>(t) + 1))
                  .cwiseAbs()
                  .maxCoeff() < 1e-10);
      }
      ++checked;
    }
  }
  CHECK(checked > 60);
}

TEST_CASE("forward and backward on small chains") {
  using V = RowVector<double>;
  const MatrixXd log_trans = MatrixXd::Constant(2, 2, std::log(0.5));
  V log_init = V::Constant(2, std::log(0.5));
  MatrixXd ll(1, 2);
  ll << -0.3, -1.2;
  const MatrixXd a1 = forward_log<double>(log_init, log_trans, ll);
  CHECK(a1.isApprox(ll + log_init.replicate(1, 1)));

  MatrixXd ll2(2, 2);
  ll2 << -0.3, -1.2, -0.7, -0.1;
  MatrixXd trans(2, 2);
  trans << std::log(0.9), std::log(0.1), std::log(0.4), std::log(0.6);
  const MatrixXd a2 = forward_log<double>(log_init, trans, ll2);
  const MatrixXd b2 = backward_log<double>(trans, ll2);
  CHECK(b2.row(1).isZero());
  for (int j = 0; j < 2; ++j) {
    double fw = 0.0, bw = 0.0;
    for (int i = 0; i < 2; ++i) {
      fw += std::exp(log_init(i) + ll2(0, i) + trans(i, j));
      bw += std::exp(trans(j, i) + ll2(1, i));
    }
    CHECK(a2(1, j) == doctest::Approx(std::log(fw) + ll2(1, j)).epsilon(1e-10));
    CHECK(b2(0, j) == doctest::Approx(std::log(bw)).epsilon(1e-10));
  }

  const MatrixXd one = MatrixXd::Zero(3, 1);
  const MatrixXd b1 = backward_log<double>(MatrixXd::Zero(1, 1), one);
  CHECK(b1.isZero());
  const auto path = viterbi_log<double>(V::Zero(1), MatrixXd::Zero(1, 1), one);
  CHECK(path.path == std::vector<int>{0, 0, 0});
}

TEST_CASE("disallowed edge carries almost no mass") {
  const LabelScheme s({"ENT"});
  Corpus c;
  c.intern("w");
  c.add_document(Document{"d", {0, 0}});
  AnnotationSet ann(1, 1);
  ann.set(0, 0, {0, 2});
  BscConfig cfg;
  cfg.model_kind = ModelKind::Cm;
  cfg.use_text = false;
  BscModel model(c, ann, s, cfg);
  const DocPosterior post = model.e_step(0);
  CHECK(post.s[0](0, 2) < 1e-4);
  const auto path = model.viterbi(0);
  CHECK(s.count_invalid_transitions(path.path) == 0);
}

TEST_CASE("no annotators and no text gives zero likelihood") {
  const LabelScheme s({"ENT"});
  Corpus c;
  c.intern("w");
  c.add_document(Document{"d", {0, 0, 0}});
  AnnotationSet ann(0, 1);
  BscConfig cfg;
  cfg.use_text = false;
  BscModel model(c, ann, s, cfg);
  CHECK(model.token_log_likelihood(0).isZero());
}

TEST_CASE("uniform word counts shift the likelihood by a constant") {
  const SynthData d = synth(ModelKind::Cm, 1, 5, 6);
  const LabelScheme s({"ENT"});
  BscConfig with_text, without;
  with_text.model_kind = without.model_kind = ModelKind::Cm;
  without.use_text = false;
  BscModel a(d.corpus, d.annotations, s, with_text);
  BscModel b(d.corpus, d.annotations, s, without);
  const MatrixXd diff = a.token_log_likelihood(0) - b.token_log_likelihood(0);
  CHECK((diff.array() - diff(0, 0)).abs().maxCoeff() < 1e-12);
}

TEST_CASE("one-hot CM likelihood cell") {
  const LabelScheme s({"ENT"});
  Corpus c;
  c.intern("w");
  c.add_document(Document{"d", {0}});
  AnnotationSet ann(1, 1);
  ann.set(0, 0, {1});
  BscConfig cfg;
  cfg.model_kind = ModelKind::Cm;
  cfg.use_text = false;
  BscModel model(c, ann, s, cfg);
  // row B of the prior is [1, 2, 1]
  CHECK(model.token_log_likelihood(0, 0, 1) ==
        doctest::Approx(oracle::digamma(2.0) - oracle::digamma(4.0)).epsilon(1e-14));
  CHECK(model.token_log_likelihood(0, 0, 0) ==
        doctest::Approx(oracle::digamma(1.0) - oracle::digamma(4.0)).epsilon(1e-14));
}

TEST_CASE("a dominant annotator pins the posterior") {
  const LabelScheme s({"ENT"});
  Corpus c;
  c.intern("w");
  c.add_document(Document{"d", {0, 0, 0, 0}});
  AnnotationSet ann(1, 1);
  const LabelSequence truth{1, 2, 0, 1};
  ann.set(0, 0, truth);
  BscConfig cfg;
  cfg.model_kind = ModelKind::Cm;
  BscModel model(c, ann, s, cfg);
  AnnotatorPosterior a = model.annotators()[0];
  a.counts = MatrixXd::Constant(3, 3, 1e-3) + 1e9 * MatrixXd::Identity(3, 3);
  model.set_annotator(0, a);
  const DocPosterior post = model.e_step(0);
  for (int t = 0; t < 4; ++t) CHECK(post.r(t, truth[static_cast<size_t>(t)]) > 1.0 - 1e-9);
  model.e_step_all();
  model.decode_all();
  CHECK(model.sequences().viterbi[0] == truth);
  CHECK(model.sequence_confidence(0) >= 0.99);
  CHECK(model.sequence_confidence(0) <= 1.0 + 1e-9);
}

TEST_CASE("transition and word updates from hard posteriors") {
  const LabelScheme s({"ENT"});
  Corpus c;
  for (auto w : {"a", "b", "c"}) c.intern(w);
  c.add_document(Document{"d", {0, 1, 0}});
  AnnotationSet ann(1, 1);
  ann.set(0, 0, {1, 2, 0});
  BscConfig cfg;
  cfg.model_kind = ModelKind::Cm;
  cfg.kappa0 = 0.5;
  BscModel model(c, ann, s, cfg);
  AnnotatorPosterior a = model.annotators()[0];
  a.counts = MatrixXd::Constant(3, 3, 1e-3) + 1e9 * MatrixXd::Identity(3, 3);
  model.set_annotator(0, a);
  model.e_step_all();
  model.m_step_transitions();
  model.m_step_observations();
  MatrixXd tally = MatrixXd::Zero(3, 3);
  tally(0, 1) = 1.0;  // start -> B
  tally(1, 2) = 1.0;
  tally(2, 0) = 1.0;
  CHECK((model.transitions().counts - model.transitions().prior - tally).cwiseAbs().maxCoeff() <
        1e-6);
  const MatrixXd& w = model.observations().counts;
  CHECK(w(0, 2) == 0.5);
  CHECK(w(1, 1) == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(w(2, 1) == doctest::Approx(1.5).epsilon(1e-6));
  CHECK(w(1, 0) == doctest::Approx(1.5).epsilon(1e-6));

  TransitionPosterior t = model.transitions();
  t.counts = MatrixXd::Ones(3, 3);
  model.set_transitions(t);
  CHECK(model.expected_log_transitions()(1, 0) ==
        doctest::Approx(oracle::digamma(1.0) - oracle::digamma(3.0)).epsilon(1e-14));
}

TEST_CASE("noiseless data is recovered exactly") {
  for (ModelKind kind : kAllKinds) {
    const SynthData d = synth(kind, 7, 40, 8, 1.0);
    BscConfig cfg;
    cfg.model_kind = kind;
    const VbResult res = run_vb(d.corpus, d.annotations, LabelScheme({"ENT"}), cfg);
    CAPTURE(to_string(kind));
    for (int n = 0; n < d.corpus.num_docs(); ++n) {
      CHECK(res.sequences.viterbi[static_cast<size_t>(n)] == d.gold.at(n));
    }
  }
}

TEST_CASE("ELBO never decreases") {
  for (ModelKind kind : kAllKinds) {
    for (std::uint64_t seed : {1u, 2u}) {
      const SynthData d = synth(kind, seed, 30, 8);
      BscConfig cfg;
      cfg.model_kind = kind;
      cfg.convergence_tol = 1e-8;
      cfg.max_iters = 40;
      const VbResult res = run_vb(d.corpus, d.annotations, LabelScheme({"ENT"}), cfg);
      CAPTURE(to_string(kind));
      REQUIRE(res.trace.size() > 2);
      CHECK(std::isinf(res.trace[0].max_delta));
      for (size_t i = 1; i < res.trace.size(); ++i) {
        const double prev = res.trace[i - 1].elbo;
        CHECK(res.trace[i].elbo >= prev - 1e-6 * std::abs(prev));
      }
    }
  }
}

TEST_CASE("ELBO after one sweep is the sum of log partitions") {
  const SynthData d = synth(ModelKind::Seq, 3, 10, 5);
  BscConfig cfg;
  cfg.max_iters = 1;
  BscModel model(d.corpus, d.annotations, LabelScheme({"ENT"}), cfg);
  model.run();
  double z = 0.0;
  for (double v : model.sequences().log_partition) z += v;
  CHECK(model.elbo() == doctest::Approx(z).epsilon(1e-12));

  BscModel again(d.corpus, d.annotations, LabelScheme({"ENT"}), cfg);
  again.run();
  CHECK(again.sequences().r[4] == model.sequences().r[4]);
}

TEST_CASE("duplicated annotator keeps the ELBO finite") {
  const SynthData d = synth(ModelKind::Cm, 4, 20, 6);
  AnnotationSet dup(d.annotations.num_annotators() + 1, d.corpus.num_docs());
  for (int n = 0; n < d.corpus.num_docs(); ++n) {
    for (const auto& a : d.annotations.for_doc(n)) dup.set(n, a.annotator, a.labels);
    dup.set(n, d.annotations.num_annotators(), *d.annotations.find(n, 0));
  }
  BscConfig cfg;
  const VbResult a = run_vb(d.corpus, d.annotations, LabelScheme({"ENT"}), cfg);
  const VbResult b = run_vb(d.corpus, dup, LabelScheme({"ENT"}), cfg);
  CHECK(std::isfinite(b.trace.back().elbo));
  CHECK(a.trace.back().elbo != b.trace.back().elbo);
}

TEST_CASE("long document with many annotators stays finite") {
  SynthConfig sc;
  sc.num_docs = 1;
  sc.doc_length = 1000;
  sc.num_annotators = 40;
  sc.seed = 9;
  const LabelScheme s({"A", "B"});
  const SynthData d = synth_generate(s, sc);
  BscConfig cfg;
  cfg.max_iters = 5;
  const VbResult res = run_vb(d.corpus, d.annotations, s, cfg);
  CHECK(res.sequences.r[0].allFinite());
  CHECK(std::isfinite(res.sequences.log_partition[0]));
  CHECK(std::isfinite(res.trace.back().elbo));
  const double conf = res.sequences.sequence_confidence(0);
  CHECK(conf >= 0.0);
  CHECK(conf <= 1.0 + 1e-9);
}

TEST_CASE("annotator order does not matter") {
  const SynthData d = synth(ModelKind::Seq, 5, 20, 6);
  const int K = d.annotations.num_annotators();
  AnnotationSet rev(K, d.corpus.num_docs());
  for (int n = 0; n < d.corpus.num_docs(); ++n) {
    for (const auto& a : d.annotations.for_doc(n)) rev.set(n, K - 1 - a.annotator, a.labels);
  }
  BscConfig cfg;
  const VbResult a = run_vb(d.corpus, d.annotations, LabelScheme({"ENT"}), cfg);
  const VbResult b = run_vb(d.corpus, rev, LabelScheme({"ENT"}), cfg);
  for (int n = 0; n < d.corpus.num_docs(); ++n) {
    CHECK((a.sequences.r[static_cast<size_t>(n)] - b.sequences.r[static_cast<size_t>(n)])
              .cwiseAbs()
              .maxCoeff() < 1e-9);
  }
}

TEST_CASE("threads do not change results") {
  const SynthData d = synth(ModelKind::Seq, 6, 30, 6);
  BscConfig cfg;
  const VbResult a = run_vb(d.corpus, d.annotations, LabelScheme({"ENT"}), cfg);
  cfg.threads = 3;
  const VbResult b = run_vb(d.corpus, d.annotations, LabelScheme({"ENT"}), cfg);
  for (int n = 0; n < d.corpus.num_docs(); ++n) {
    CHECK(a.sequences.r[static_cast<size_t>(n)] == b.sequences.r[static_cast<size_t>(n)]);
  }
  CHECK(a.trace.size() == b.trace.size());
}

TEST_CASE("independent-token CM without text equals IBCC") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const SynthData d = synth(ModelKind::Cm, seed, 30, 6);
    const LabelScheme s({"ENT"});
    BscConfig cfg;
    cfg.model_kind = ModelKind::Cm;
    cfg.use_text = false;
    cfg.use_transitions = false;
    cfg.convergence_tol = 1e-10;
    cfg.max_iters = 500;
    const VbResult bsc = run_vb(d.corpus, d.annotations, s, cfg);
    IbccOptions opts;
    opts.tol = 1e-10;
    opts.max_iters = 500;
    const IbccResult ibcc = ibcc_vb(d.annotations, s.num_labels(), opts);
    for (int n = 0; n < d.corpus.num_docs(); ++n) {
      CHECK((bsc.sequences.r[static_cast<size_t>(n)] -
             ibcc.table.posteriors[static_cast<size_t>(n)])
                .cwiseAbs()
                .maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("config validation") {
  BscConfig cfg;
  cfg.gamma0 = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg = BscConfig{};
  cfg.max_iters = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("viterbi ties follow the documented rule") {
  RowVectorXd init = RowVectorXd::Zero(2);
  MatrixXd trans(2, 2);
  trans << -1.0, 0.0, 0.0, -1.0;
  const MatrixXd ll = MatrixXd::Zero(2, 2);
  // (0,1) and (1,0) tie; the later token decides, so (1,0) wins
  const auto path = viterbi_log<double>(init, trans, ll);
  CHECK(path.path == std::vector<int>{1, 0});
  CHECK(oracle::enumerate(init, trans, ll).best == path.path);

  const MatrixXd flat = MatrixXd::Zero(3, 3);
  CHECK(viterbi_log<double>(RowVectorXd::Zero(3), flat, flat).path == std::vector<int>{0, 0, 0});
}
