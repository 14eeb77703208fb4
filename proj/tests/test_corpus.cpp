#include "bsc/corpus.hpp"
#include "bsc/synth.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace bsc;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name, const std::string& content) {
  const fs::path dir = fs::temp_directory_path() / "bsc_test_corpus";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream(p) << content;
  return p;
}

}  // namespace

TEST_CASE("load crowd file with a skipped document") {
  const LabelScheme s({"PER"});
  const auto p = temp_file("crowd.tsv",
                           "d1\tJohn\tB-PER\tB-PER\t-\n"
                           "d1\tran\tO\tO\t-\n"
                           "\n"
                           "d2\tMary\tB-PER\tO\tB-PER\n");
  const CrowdData data = load_crowd_annotations(p, s);
  CHECK(data.corpus.num_docs() == 2);
  CHECK(data.annotations.num_annotators() == 3);
  CHECK(data.annotations.size() == 5);
  CHECK_FALSE(data.annotations.contains(0, 2));
  CHECK(*data.annotations.find(1, 1) == LabelSequence{0});
  CHECK(data.corpus.vocab_size() == 3);
  CHECK(data.corpus.total_tokens() == 3);
}

TEST_CASE("crowd parse errors") {
  const LabelScheme s({"PER"});
  CHECK_THROWS_AS(load_crowd_annotations(temp_file("a.tsv", "d1\tx\tO\td1\ty\tO\n"), s),
                  ParseError);
  CHECK_THROWS_AS(load_crowd_annotations(temp_file("b.tsv", "d1\tx\tO\tO\nd1\ty\tO\n"), s),
                  ParseError);
  CHECK_THROWS_AS(load_crowd_annotations(temp_file("c.tsv", "d1\tx\tB-LOC\n"), s), ParseError);
  CHECK_THROWS_AS(load_crowd_annotations(temp_file("d.tsv", "d1\tx\tO\nd1\ty\t-\n"), s),
                  ParseError);
  try {
    load_crowd_annotations(temp_file("e.tsv", "d1\tx\tO\tO\nd1\ty\tO\n"), s);
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("crowd and gold round trip") {
  const LabelScheme s({"PER", "LOC"});
  SynthConfig cfg;
  cfg.num_docs = 12;
  cfg.coverage = 0.6;
  cfg.seed = 5;
  const SynthData d = synth_generate(s, cfg);
  const auto crowd = temp_file("rt.tsv", "");
  const auto gold = temp_file("rt.conll", "");
  write_crowd_annotations(crowd, d.corpus, d.annotations, s);
  write_gold(gold, d.corpus, d.gold, s);

  const CrowdData back = load_crowd_annotations(crowd, s);
  REQUIRE(back.corpus.num_docs() == d.corpus.num_docs());
  for (int n = 0; n < d.corpus.num_docs(); ++n) {
    CHECK(back.corpus.doc(n).id == d.corpus.doc(n).id);
    CHECK(back.corpus.doc(n).length() == d.corpus.doc(n).length());
    for (int k = 0; k < cfg.num_annotators; ++k) {
      const auto* a = d.annotations.find(n, k);
      const auto* b = back.annotations.find(n, k);
      REQUIRE((a == nullptr) == (b == nullptr));
      if (a) CHECK(*a == *b);
    }
  }
  const GoldLabels g = load_gold(gold, back.corpus, s);
  for (int n = 0; n < d.corpus.num_docs(); ++n) CHECK(g.at(n) == d.gold.at(n));

  const LabelledData lab = load_labelled(gold, s);
  CHECK(lab.corpus.num_docs() == d.corpus.num_docs());
  CHECK(lab.labels.at(3) == d.gold.at(3));
}

TEST_CASE("gold file checks") {
  const LabelScheme s({"PER"});
  const CrowdData data =
      load_crowd_annotations(temp_file("g.tsv", "d1\tJohn\tB-PER\n\nd2\tran\tO\n"), s);
  const GoldLabels two = load_gold(temp_file("g2.conll", "John\tB-PER\n\nran\tO\n"), data.corpus, s);
  CHECK(two.count() == 2);
  const GoldLabels keyed = load_gold(temp_file("g3.conll", "d2\tran\tO\n"), data.corpus, s);
  CHECK(keyed.count() == 1);
  CHECK(keyed.has(1));
  CHECK_THROWS_AS(load_gold(temp_file("g4.conll", "d3\tran\tO\n"), data.corpus, s), ParseError);
  CHECK_THROWS_AS(load_gold(temp_file("g5.conll", "d2\twalked\tO\n"), data.corpus, s),
                  ParseError);
  CHECK_THROWS_AS(load_gold(temp_file("g6.conll", "John\tB-PER\n"), data.corpus, s), ParseError);
}

TEST_CASE("corpus rejects bad documents") {
  Corpus c;
  c.intern("a");
  CHECK_THROWS_AS(c.add_document(Document{"x", {}}), std::invalid_argument);
  CHECK_THROWS_AS(c.add_document(Document{"x", {3}}), std::invalid_argument);
  c.add_document(Document{"x", {0}});
  CHECK_THROWS_AS(c.add_document(Document{"x", {0}}), std::invalid_argument);
}

TEST_CASE("noiseless synthetic annotators copy gold") {
  const LabelScheme s({"ENT"});
  for (ModelKind kind : {ModelKind::Acc, ModelKind::Spam, ModelKind::Cv, ModelKind::Cm,
                         ModelKind::Seq}) {
    SynthConfig cfg;
    cfg.diag_mass = 1.0;
    cfg.model_kind = kind;
    cfg.num_docs = 30;
    const SynthData d = synth_generate(s, cfg);
    for (int n = 0; n < d.corpus.num_docs(); ++n) {
      for (const auto& a : d.annotations.for_doc(n)) CHECK(a.labels == d.gold.at(n));
    }
  }
}

TEST_CASE("synthetic data is deterministic and valid") {
  const LabelScheme s({"ENT"});
  SynthConfig cfg;
  cfg.seed = 11;
  const SynthData a = synth_generate(s, cfg);
  const SynthData b = synth_generate(s, cfg);
  for (int n = 0; n < a.corpus.num_docs(); ++n) {
    CHECK(a.corpus.doc(n).tokens == b.corpus.doc(n).tokens);
    CHECK(a.gold.at(n) == b.gold.at(n));
    CHECK(s.count_invalid_transitions(a.gold.at(n)) == 0);
    for (int k = 0; k < cfg.num_annotators; ++k) {
      CHECK(*a.annotations.find(n, k) == *b.annotations.find(n, k));
    }
  }
  CHECK(a.transitions(0, 2) == 0.0);
}

TEST_CASE("synthetic annotator accuracy near diag_mass") {
  const LabelScheme s({"ENT"});
  for (ModelKind kind : {ModelKind::Acc, ModelKind::Spam, ModelKind::Cv, ModelKind::Cm,
                         ModelKind::Seq}) {
    SynthConfig cfg;
    cfg.model_kind = kind;
    cfg.seed = 2;
    const SynthData d = synth_generate(s, cfg);
    int correct = 0, total = 0;
    for (int n = 0; n < d.corpus.num_docs(); ++n) {
      for (const auto& a : d.annotations.for_doc(n)) {
        for (size_t t = 0; t < a.labels.size(); ++t) {
          correct += a.labels[t] == d.gold.at(n)[t];
          ++total;
        }
      }
    }
    const double acc = static_cast<double>(correct) / total;
    CAPTURE(to_string(kind));
    CHECK(acc >= 0.75);
    CHECK(acc <= 0.85);
  }
}

TEST_CASE("synthetic config validation") {
  const LabelScheme s({"ENT"});
  SynthConfig cfg;
  cfg.diag_mass = 0.2;
  CHECK_THROWS_AS(synth_generate(s, cfg), std::invalid_argument);
}
