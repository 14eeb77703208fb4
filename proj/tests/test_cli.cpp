#include "bsc/corpus.hpp"
#include "bsc/output.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "bsc_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

struct Run {
  int code;
  std::string err;
};

Run run_cli(const std::string& args) {
  const fs::path err = workdir() / "stderr.txt";
  const std::string cmd = "cd '" + workdir().string() + "' && '" + BSC_CLI_PATH + "' " + args +
                          " > stdout.txt 2> '" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("synth, aggregate and evaluate") {
  REQUIRE(run_cli("synth --output syn --seed 1 --num-docs 60").code == 0);
  REQUIRE(fs::exists(workdir() / "syn/crowd.tsv"));
  REQUIRE(run_cli("aggregate --crowd syn/crowd.tsv --output agg").code == 0);
  for (auto f : {"posteriors.tsv", "decoded.conll", "model.dump", "summary.txt"}) {
    CHECK(fs::exists(workdir() / "agg" / f));
  }
  const bsc::LabelScheme s({"ENT"});
  const auto data = bsc::load_crowd_annotations(workdir() / "syn/crowd.tsv", s);
  const auto r = bsc::read_posteriors(workdir() / "agg/posteriors.tsv", data.corpus, s);
  for (const auto& m : r) {
    for (Eigen::Index t = 0; t < m.rows(); ++t) CHECK(std::abs(m.row(t).sum() - 1.0) < 1e-9);
  }

  CHECK(run_cli("evaluate --pred agg/decoded.conll --gold syn/gold.conll --output ev").code == 0);
  CHECK(slurp(workdir() / "ev/scores.txt").find("cee") == std::string::npos);
  CHECK(run_cli("evaluate --pred agg/decoded.conll --gold syn/gold.conll --posteriors "
            "agg/posteriors.tsv --output ev2")
            .code == 0);
  CHECK(slurp(workdir() / "ev2/scores.txt").find("cee\t") != std::string::npos);

  CHECK(run_cli("evaluate --pred syn/gold.conll --gold syn/gold.conll --output self").code == 0);
  CHECK(slurp(workdir() / "self/scores.txt").find("f1\t100\n") != std::string::npos);

  CHECK(run_cli("cluster --model agg/model.dump --k 2 --output cl").code == 0);
  CHECK(fs::exists(workdir() / "cl/clusters.tsv"));
}

TEST_CASE("outputs are bit-identical on rerun") {
  REQUIRE(run_cli("synth --output rs --seed 2 --num-docs 40").code == 0);
  REQUIRE(run_cli("aggregate --crowd rs/crowd.tsv --gold rs/gold.conll --output a1").code == 0);
  REQUIRE(run_cli("aggregate --crowd rs/crowd.tsv --gold rs/gold.conll --output a2 --threads 2")
              .code == 0);
  for (auto f : {"posteriors.tsv", "decoded.conll", "model.dump", "scores.txt", "errors.txt"}) {
    CHECK(slurp(workdir() / "a1" / f) == slurp(workdir() / "a2" / f));
  }
  const std::string al = "active-learn --crowd rs/crowd.tsv --gold rs/gold.conll "
                         "--initial-set-size 40 --max-no-labels 60 --selectors lc,random ";
  REQUIRE(run_cli(al + "--output l1").code == 0);
  REQUIRE(run_cli(al + "--output l2").code == 0);
  CHECK(slurp(workdir() / "l1/curve.csv") == slurp(workdir() / "l2/curve.csv"));
  CHECK(slurp(workdir() / "l1/curve.csv")
            .rfind("method,selector,iteration,labels,f1_strict,f1_relaxed,cee,accuracy\n", 0) == 0);
}

TEST_CASE("majority vote over one annotator echoes the annotations") {
  write(workdir() / "one.tsv",
        "d1\tJohn\tB-ENT\nd1\tSmith\tI-ENT\nd1\tran\tO\n\nd2\tit\tI-ENT\nd2\trained\tO\n");
  REQUIRE(run_cli("aggregate --crowd one.tsv --method mv --output mv").code == 0);
  CHECK(slurp(workdir() / "mv/decoded.conll") ==
        "d1\tJohn\tB-ENT\nd1\tSmith\tI-ENT\nd1\tran\tO\n\nd2\tit\tI-ENT\nd2\trained\tO\n");
}

TEST_CASE("config file with flag overrides") {
  write(workdir() / "cfg.json",
        R"({"crowd": "one.tsv", "method": "ds", "smoothing": 0.5, "output": "from_file"})");
  REQUIRE(run_cli("aggregate -c cfg.json --method ibcc").code == 0);
  const std::string summary = slurp(workdir() / "from_file/summary.txt");
  CHECK(summary.find("\"method\": \"ibcc\"") != std::string::npos);
  CHECK(summary.find("\"smoothing\": 0.5") != std::string::npos);
  CHECK(summary.find("\"max_iters\": 200") != std::string::npos);

  write(workdir() / "bad.json", R"({"crowd": "one.tsv", "colour": 1})");
  const Run bad = run_cli("aggregate -c bad.json");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("colour") != std::string::npos);
}

TEST_CASE("usage and validation errors exit with 2") {
  Run r = run_cli("evaluate --pred x.conll");
  CHECK(r.code == 2);
  CHECK(r.err.find("--gold") != std::string::npos);
  r = run_cli("active-learn --crowd one.tsv");
  CHECK(r.code == 2);
  CHECK(r.err.find("--gold") != std::string::npos);
  CHECK(run_cli("aggregate --crowd one.tsv --method bogus").code == 2);
  CHECK(run_cli("aggregate --crowd one.tsv --alpha0 -1").code == 2);
  CHECK(run_cli("aggregate --crowd one.tsv --no-such-flag").code == 2);
  CHECK(run_cli("").code == 2);

  write(workdir() / "shifted.conll", "d9\tit\tO\nd9\trained\tO\n");
  r = run_cli("evaluate --pred mv/decoded.conll --gold shifted.conll");
  CHECK(r.code == 2);
  CHECK(r.err.find("d9") != std::string::npos);

  CHECK(run_cli("aggregate --crowd missing.tsv").code == 1);
}

TEST_CASE("relaxed scoring is more lenient on partial overlaps") {
  write(workdir() / "pp.conll", "d\ta\tB-ENT\nd\tb\tI-ENT\nd\tc\tO\nd\td\tO\n");
  write(workdir() / "pg.conll", "d\ta\tB-ENT\nd\tb\tI-ENT\nd\tc\tI-ENT\nd\td\tO\n");
  REQUIRE(run_cli("evaluate --pred pp.conll --gold pg.conll --output strict").code == 0);
  REQUIRE(run_cli("evaluate --pred pp.conll --gold pg.conll --mode relaxed --output relaxed").code ==
          0);
  CHECK(slurp(workdir() / "strict/scores.txt").find("f1\t0\n") != std::string::npos);
  CHECK(slurp(workdir() / "relaxed/scores.txt").find("f1\t0") == std::string::npos);
}
