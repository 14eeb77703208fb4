#include "config.hpp"

#include "bsc/active_learning.hpp"
#include "bsc/aggregate.hpp"
#include "bsc/cluster.hpp"
#include "bsc/corpus.hpp"
#include "bsc/metrics.hpp"
#include "bsc/output.hpp"
#include "bsc/synth.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iomanip>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace bsc::cli {
namespace {

const std::vector<std::string> kModelKeys = {
    "scheme", "method", "notext", "no_transitions", "gamma0", "alpha0", "epsilon0", "kappa0",
    "disallowed_mass", "smoothing", "tol", "max_iters", "threads", "output"};

std::vector<std::string> with(std::vector<std::string> keys, std::vector<std::string> extra) {
  keys.insert(keys.end(), extra.begin(), extra.end());
  return keys;
}

AggregatorConfig aggregator_config(const RunConfig& cfg, const std::string& method) {
  AggregatorConfig ac;
  ac.bsc.gamma0 = cfg.gamma0;
  ac.bsc.kappa0 = cfg.kappa0;
  ac.bsc.annotator.alpha0 = cfg.alpha0;
  ac.bsc.annotator.epsilon0 = cfg.epsilon0;
  ac.bsc.annotator.disallowed_mass = cfg.disallowed_mass;
  ac.bsc.use_text = !cfg.notext;
  ac.bsc.use_transitions = !cfg.no_transitions;
  ac.bsc.convergence_tol = cfg.tol;
  ac.bsc.max_iters = cfg.max_iters;
  ac.bsc.threads = cfg.threads;
  ac.smoothing = cfg.smoothing;
  try {
    set_method(ac, method);
    ac.bsc.validate();
    ac.bsc.annotator.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  return ac;
}

void write_summary(const RunConfig& cfg, const json& status) {
  json j;
  j["config"] = to_json(cfg);
  j["status"] = status;
  write_file_atomic(fs::path(cfg.output) / "summary.txt",
                    [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

struct Scored {
  std::vector<LabelSequence> pred;
  std::vector<LabelSequence> gold;
  std::vector<MatrixXd> posteriors;
};

Scored gold_subset(const std::vector<LabelSequence>& pred, const GoldLabels& gold,
                   const std::vector<MatrixXd>* posteriors, const Corpus& corpus) {
  Scored s;
  for (int n = 0; n < corpus.num_docs(); ++n) {
    if (!gold.has(n)) continue;
    s.pred.push_back(pred[static_cast<size_t>(n)]);
    s.gold.push_back(gold.at(n));
    if (posteriors) {
      const MatrixXd& r = (*posteriors)[static_cast<size_t>(n)];
      if (r.rows() != corpus.doc(n).length()) {
        throw UsageError("posteriors missing for document " + corpus.doc(n).id);
      }
      s.posteriors.push_back(r);
    }
  }
  if (s.gold.empty()) throw UsageError("no gold-labelled documents to score");
  return s;
}

json report(const RunConfig& cfg, const Scored& s, const LabelScheme& scheme, bool with_cee) {
  ScoreReport scores = cfg.mode == "relaxed" ? relaxed_f1(s.pred, s.gold, scheme)
                                             : strict_f1(s.pred, s.gold, scheme);
  if (with_cee) scores.cee = cross_entropy(s.posteriors, s.gold);
  const ErrorReport errors = error_report(s.pred, s.gold, scheme);
  write_scores(fs::path(cfg.output) / "scores.txt", scores, cfg.mode);
  write_errors(fs::path(cfg.output) / "errors.txt", errors);
  std::cout << format_report_table(scores, errors, cfg.mode);
  json j{{"precision", scores.precision}, {"recall", scores.recall}, {"f1", scores.f1}};
  if (scores.cee) j["cee"] = *scores.cee;
  return j;
}

int cmd_aggregate(const RunConfig& cfg) {
  const LabelScheme scheme(cfg.scheme);
  const AggregatorConfig ac = aggregator_config(cfg, cfg.method);
  const CrowdData data = load_crowd_annotations(cfg.crowd, scheme);
  std::optional<GoldLabels> gold;
  if (!cfg.gold.empty()) gold = load_gold(cfg.gold, data.corpus, scheme);

  const Aggregation result = aggregate(data.corpus, data.annotations, scheme, ac);
  fs::create_directories(cfg.output);
  write_posteriors(fs::path(cfg.output) / "posteriors.tsv", data.corpus, result.posteriors,
                   scheme);
  write_decoded(fs::path(cfg.output) / "decoded.conll", data.corpus, result.labels, scheme);

  json status{{"method", method_name(ac)},
              {"documents", data.corpus.num_docs()},
              {"annotators", data.annotations.num_annotators()},
              {"converged", result.converged},
              {"iterations", result.iterations}};
  if (result.bsc) {
    ModelDump dump;
    dump.kind = ac.bsc.model_kind;
    dump.num_labels = scheme.num_labels();
    dump.annotators = result.bsc->annotators;
    dump.transitions = result.bsc->transitions;
    if (ac.bsc.use_text) dump.observations = result.bsc->observations;
    write_model_dump(fs::path(cfg.output) / "model.dump", dump);
    if (!result.bsc->trace.empty()) status["elbo"] = result.bsc->trace.back().elbo;
  }
  if (gold) {
    const Scored s = gold_subset(result.labels, *gold, &result.posteriors, data.corpus);
    status["scores"] = report(cfg, s, scheme, true);
  }
  if (!result.converged) {
    status["warning"] = "not converged after " + std::to_string(result.iterations) + " iterations";
    std::cerr << "warning: " << status["warning"].get<std::string>() << '\n';
  }
  write_summary(cfg, status);
  return 0;
}

int cmd_evaluate(const RunConfig& cfg) {
  const LabelScheme scheme(cfg.scheme);
  const LabelledData pred = load_labelled(cfg.pred, scheme);
  const GoldLabels gold = load_gold(cfg.gold, pred.corpus, scheme);
  std::vector<LabelSequence> labels;
  for (int n = 0; n < pred.corpus.num_docs(); ++n) labels.push_back(pred.labels.at(n));

  std::optional<std::vector<MatrixXd>> posteriors;
  if (!cfg.posteriors.empty()) posteriors = read_posteriors(cfg.posteriors, pred.corpus, scheme);
  const Scored s = gold_subset(labels, gold, posteriors ? &*posteriors : nullptr, pred.corpus);

  fs::create_directories(cfg.output);
  json status{{"documents", static_cast<int>(s.gold.size())}};
  status["scores"] = report(cfg, s, scheme, posteriors.has_value());
  write_summary(cfg, status);
  return 0;
}

int cmd_active_learn(const RunConfig& cfg) {
  const LabelScheme scheme(cfg.scheme);
  std::vector<AggregatorConfig> methods;
  for (const auto& m : cfg.methods) {
    methods.push_back(aggregator_config(cfg, m));
    methods.back().bsc.threads = 1;
  }
  const CrowdData data = load_crowd_annotations(cfg.crowd, scheme);
  const GoldLabels gold = load_gold(cfg.gold, data.corpus, scheme);

  std::vector<LearningCurve> curves;
  json runs = json::array();
  for (const auto& ac : methods) {
    for (const auto& sel : cfg.selectors) {
      ALConfig al;
      al.initial_set_size = cfg.initial_set_size;
      al.batch_size = cfg.batch_size;
      al.max_no_labels = cfg.max_no_labels;
      al.selector = parse_selector(sel);
      al.repeats = cfg.repeats;
      al.seed = cfg.seed;
      al.aggregator = ac;
      al.threads = cfg.threads;
      curves.push_back(simulate(data.corpus, data.annotations, gold, scheme, al));
      const LearningCurve& c = curves.back();
      json run{{"method", c.method}, {"selector", c.selector}, {"rounds", c.points.size()}};
      if (!c.points.empty()) {
        run["final_labels"] = c.points.back().labels;
        run["final_f1_strict"] = c.points.back().f1_strict;
        run["final_f1_relaxed"] = c.points.back().f1_relaxed;
      }
      if (c.min_lc <= c.max_lc) {
        run["min_lc"] = c.min_lc;
        run["max_lc"] = c.max_lc;
      }
      runs.push_back(run);
    }
  }
  fs::create_directories(cfg.output);
  write_curves(fs::path(cfg.output) / "curve.csv", curves);
  write_summary(cfg, json{{"runs", runs}});
  return 0;
}

int cmd_synth(const RunConfig& cfg) {
  const LabelScheme scheme(cfg.scheme);
  SynthConfig sc;
  sc.num_docs = cfg.num_docs;
  sc.doc_length = cfg.doc_length;
  sc.num_annotators = cfg.num_annotators;
  sc.model_kind = parse_model_kind(cfg.synth_model);
  sc.diag_mass = cfg.diag_mass;
  sc.seed = cfg.seed;
  sc.vocab_size = cfg.vocab_size;
  sc.coverage = cfg.coverage;
  SynthData data;
  try {
    data = synth_generate(scheme, sc);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  fs::create_directories(cfg.output);
  write_crowd_annotations(fs::path(cfg.output) / "crowd.tsv", data.corpus, data.annotations,
                          scheme);
  write_gold(fs::path(cfg.output) / "gold.conll", data.corpus, data.gold, scheme);
  write_summary(cfg, json{{"documents", data.corpus.num_docs()},
                          {"annotations", data.annotations.size()}});
  return 0;
}

int cmd_cluster(const RunConfig& cfg) {
  const ModelDump dump = read_model_dump(cfg.model);
  std::vector<MatrixXd> tensors;
  for (const auto& a : dump.annotators) tensors.push_back(posterior_mean(a));
  if (cfg.k > static_cast<int>(tensors.size())) {
    throw UsageError("--k exceeds the number of annotators (" + std::to_string(tensors.size()) +
                     ")");
  }
  const Clustering c = cluster_annotators(tensors, cfg.k, cfg.seed);

  fs::create_directories(cfg.output);
  write_file_atomic(fs::path(cfg.output) / "clusters.tsv", [&](std::ostream& out) {
    out << "annotator\tcluster\n";
    for (size_t i = 0; i < c.assignment.size(); ++i) out << i << '\t' << c.assignment[i] << '\n';
  });
  write_file_atomic(fs::path(cfg.output) / "cluster_means.txt", [&](std::ostream& out) {
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (size_t g = 0; g < c.means.size(); ++g) {
      const auto size = std::count(c.assignment.begin(), c.assignment.end(), static_cast<int>(g));
      out << "cluster " << g << " size " << size << ' ' << c.means[g].rows() << ' '
          << c.means[g].cols() << '\n';
      for (Eigen::Index i = 0; i < c.means[g].rows(); ++i) {
        for (Eigen::Index j = 0; j < c.means[g].cols(); ++j) {
          out << (j ? " " : "") << c.means[g](i, j);
        }
        out << '\n';
      }
    }
  });
  write_summary(cfg, json{{"annotators", tensors.size()}, {"clusters", cfg.k},
                          {"iterations", c.iterations}});
  return 0;
}

}  // namespace
}  // namespace bsc::cli

int main(int argc, char** argv) {
  using namespace bsc::cli;
  CLI::App app{"Bayesian sequence combination of crowdsourced BIO labels"};
  app.require_subcommand(1);
  std::string config_path;
  RunConfig parsed;

  struct Command {
    std::string name;
    std::vector<std::string> keys;
    int (*run)(const RunConfig&);
    CLI::App* app = nullptr;
  };
  std::vector<Command> commands = {
      {"aggregate", with(kModelKeys, {"crowd", "gold", "mode"}), cmd_aggregate},
      {"evaluate", {"pred", "gold", "posteriors", "scheme", "mode", "output"}, cmd_evaluate},
      {"active-learn",
       with(kModelKeys, {"crowd", "gold", "methods", "selectors", "initial_set_size",
                         "batch_size", "max_no_labels", "repeats", "seed"}),
       cmd_active_learn},
      {"synth",
       {"scheme", "num_docs", "doc_length", "num_annotators", "synth_model", "diag_mass",
        "vocab_size", "coverage", "seed", "output"},
       cmd_synth},
      {"cluster", {"model", "k", "seed", "output"}, cmd_cluster},
  };
  const std::map<std::string, std::string> help = {
      {"aggregate", "infer true labels from crowd annotations"},
      {"evaluate", "score predicted labels against gold"},
      {"active-learn", "simulate active learning over an annotation pool"},
      {"synth", "sample a synthetic crowd dataset"},
      {"cluster", "cluster annotators by their confusion tensors"},
  };
  for (auto& c : commands) {
    c.app = app.add_subcommand(c.name, help.at(c.name));
    c.app->add_option("-c,--config", config_path, "JSON config file; flags override it");
    add_flags(*c.app, parsed, c.keys);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  for (const auto& c : commands) {
    if (!c.app->parsed()) continue;
    try {
      RunConfig cfg;
      if (!config_path.empty()) load_config_file(cfg, config_path);
      apply_flags(cfg, parsed, *c.app, c.keys);
      cfg.command = c.name;
      resolve(cfg);
      return c.run(cfg);
    } catch (const UsageError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    } catch (const bsc::ParseError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 2;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return 1;
    }
  }
  return 2;
}
