#include "bsc/inference.hpp"
#include "bsc/output.hpp"
#include "bsc/synth.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace bsc;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "bsc_test_output";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("posterior file round trips exactly") {
  const LabelScheme s({"A", "B"});
  SynthConfig sc;
  sc.num_docs = 8;
  const SynthData d = synth_generate(s, sc);
  const VbResult res = run_vb(d.corpus, d.annotations, s, BscConfig{});
  const fs::path p = scratch() / "posteriors.tsv";
  write_posteriors(p, d.corpus, res.sequences.r, s);
  const auto back = read_posteriors(p, d.corpus, s);
  for (int n = 0; n < d.corpus.num_docs(); ++n) {
    CHECK(back[static_cast<size_t>(n)] == res.sequences.r[static_cast<size_t>(n)]);
    for (Eigen::Index t = 0; t < back[static_cast<size_t>(n)].rows(); ++t) {
      CHECK(std::abs(back[static_cast<size_t>(n)].row(t).sum() - 1.0) < 1e-9);
    }
  }
  CHECK(slurp(p).rfind("doc_id\tposition\tO\tB-A\tI-A\tB-B\tI-B\n", 0) == 0);

  const LabelScheme other({"X"});
  CHECK_THROWS_AS(read_posteriors(p, d.corpus, other), ParseError);
}

TEST_CASE("decoded labels load back as gold") {
  const LabelScheme s({"ENT"});
  SynthConfig sc;
  sc.num_docs = 6;
  const SynthData d = synth_generate(s, sc);
  std::vector<LabelSequence> labels;
  for (int n = 0; n < d.corpus.num_docs(); ++n) labels.push_back(d.gold.at(n));
  const fs::path p = scratch() / "decoded.conll";
  write_decoded(p, d.corpus, labels, s);
  const GoldLabels g = load_gold(p, d.corpus, s);
  for (int n = 0; n < d.corpus.num_docs(); ++n) CHECK(g.at(n) == labels[static_cast<size_t>(n)]);
}

TEST_CASE("model dump round trips") {
  const LabelScheme s({"ENT"});
  for (ModelKind kind : {ModelKind::Spam, ModelKind::Seq, ModelKind::Cv}) {
    SynthConfig sc;
    sc.num_docs = 10;
    sc.model_kind = kind;
    const SynthData d = synth_generate(s, sc);
    BscConfig cfg;
    cfg.model_kind = kind;
    const VbResult res = run_vb(d.corpus, d.annotations, s, cfg);
    ModelDump dump;
    dump.kind = kind;
    dump.num_labels = 3;
    dump.annotators = res.annotators;
    dump.transitions = res.transitions;
    dump.observations = res.observations;
    const fs::path p = scratch() / "model.dump";
    write_model_dump(p, dump);
    const ModelDump back = read_model_dump(p);
    CHECK(back.kind == kind);
    REQUIRE(back.annotators.size() == res.annotators.size());
    for (size_t k = 0; k < back.annotators.size(); ++k) {
      CHECK(back.annotators[k].counts == res.annotators[k].counts);
      CHECK(back.annotators[k].prior == res.annotators[k].prior);
      CHECK(back.annotators[k].log_lik.isApprox(res.annotators[k].log_lik));
      if (kind == ModelKind::Spam) {
        CHECK(back.annotators[k].spam_counts == res.annotators[k].spam_counts);
      }
    }
    CHECK(back.transitions->counts == res.transitions.counts);
    CHECK(back.observations->counts == res.observations.counts);
  }
}

TEST_CASE("failed writes leave no file behind") {
  const fs::path p = scratch() / "never.txt";
  fs::remove(p);
  CHECK_THROWS(write_file_atomic(p, [](std::ostream& out) {
    out << "partial";
    throw std::runtime_error("boom");
  }));
  CHECK_FALSE(fs::exists(p));
  for (const auto& entry : fs::directory_iterator(scratch())) {
    CHECK(entry.path().filename().string().find("never.txt.tmp") == std::string::npos);
  }
}

TEST_CASE("report files use stable keys") {
  ScoreReport sr{80.0, 75.0, 77.4, 0.5};
  ErrorReport er;
  er.exact_match = 3;
  const fs::path dir = scratch();
  write_scores(dir / "scores.txt", sr, "strict");
  write_errors(dir / "errors.txt", er);
  const std::string scores = slurp(dir / "scores.txt");
  CHECK(scores.find("precision\t80\n") != std::string::npos);
  CHECK(scores.find("cee\t0.5\n") != std::string::npos);
  CHECK(slurp(dir / "errors.txt").find("exact_match\t3\n") != std::string::npos);
  const std::string table = format_report_table(sr, er, "strict");
  CHECK(table.find("77.4") != std::string::npos);
}
