#include "config.hpp"

#include "bsc/active_learning.hpp"
#include "bsc/aggregate.hpp"
#include "bsc/annotator.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>

namespace bsc::cli {

namespace {

using nlohmann::json;

struct Field {
  std::string key;
  std::string help;
  std::function<void(RunConfig&, const json&)> read;
  std::function<json(const RunConfig&)> write;
  std::function<void(RunConfig&, const RunConfig&)> copy;
  std::function<CLI::Option*(CLI::App&, RunConfig&, const std::string&)> add;
};

template <class T>
Field make_field(std::string key, T RunConfig::*member, std::string help) {
  Field f;
  f.key = std::move(key);
  f.help = std::move(help);
  f.read = [member](RunConfig& c, const json& j) { c.*member = j.get<T>(); };
  f.write = [member](const RunConfig& c) { return json(c.*member); };
  f.copy = [member](RunConfig& dst, const RunConfig& src) { dst.*member = src.*member; };
  f.add = [member, help = f.help](CLI::App& app, RunConfig& c, const std::string& flag) {
    if constexpr (std::is_same_v<T, bool>) {
      return app.add_flag(flag, c.*member, help);
    } else if constexpr (std::is_same_v<T, std::vector<std::string>>) {
      return app.add_option(flag, c.*member, help)->delimiter(',');
    } else {
      return app.add_option(flag, c.*member, help);
    }
  };
  return f;
}

const std::vector<Field>& fields() {
  static const std::vector<Field> all = {
      make_field("crowd", &RunConfig::crowd, "crowd annotation file"),
      make_field("gold", &RunConfig::gold, "gold label file"),
      make_field("pred", &RunConfig::pred, "predicted label file (doc_id token label)"),
      make_field("posteriors", &RunConfig::posteriors, "posterior TSV for cross-entropy"),
      make_field("model", &RunConfig::model, "model dump"),
      make_field("output", &RunConfig::output, "output directory"),
      make_field("scheme", &RunConfig::scheme, "span types, in label order"),
      make_field("method", &RunConfig::method,
                 "mv | ds | ibcc | bsc-acc | bsc-spam | bsc-cv | bsc-cm | bsc-seq"),
      make_field("notext", &RunConfig::notext, "drop the word model"),
      make_field("no_transitions", &RunConfig::no_transitions,
                 "replace the label chain by independent class proportions"),
      make_field("gamma0", &RunConfig::gamma0, "transition pseudo-count"),
      make_field("alpha0", &RunConfig::alpha0, "annotator pseudo-count, every cell"),
      make_field("epsilon0", &RunConfig::epsilon0, "extra annotator pseudo-count on correct cells"),
      make_field("kappa0", &RunConfig::kappa0, "word pseudo-count"),
      make_field("disallowed_mass", &RunConfig::disallowed_mass,
                 "pseudo-count of forbidden transition cells"),
      make_field("smoothing", &RunConfig::smoothing, "Dawid-Skene additive smoothing"),
      make_field("tol", &RunConfig::tol, "convergence tolerance on token posteriors"),
      make_field("max_iters", &RunConfig::max_iters, "iteration cap"),
      make_field("seed", &RunConfig::seed, "random seed"),
      make_field("threads", &RunConfig::threads, "worker cap"),
      make_field("mode", &RunConfig::mode, "strict | relaxed span F1"),
      make_field("methods", &RunConfig::methods, "methods to simulate (default: method)"),
      make_field("selectors", &RunConfig::selectors, "least_confidence | random"),
      make_field("initial_set_size", &RunConfig::initial_set_size, "annotations before round 1"),
      make_field("batch_size", &RunConfig::batch_size, "documents selected per round"),
      make_field("max_no_labels", &RunConfig::max_no_labels, "annotation budget"),
      make_field("repeats", &RunConfig::repeats, "independent simulation repeats"),
      make_field("num_docs", &RunConfig::num_docs, "synthetic documents"),
      make_field("doc_length", &RunConfig::doc_length, "tokens per synthetic document"),
      make_field("num_annotators", &RunConfig::num_annotators, "synthetic annotators"),
      make_field("synth_model", &RunConfig::synth_model, "noise model of synthetic annotators"),
      make_field("diag_mass", &RunConfig::diag_mass, "synthetic annotator accuracy"),
      make_field("vocab_size", &RunConfig::vocab_size, "synthetic vocabulary size"),
      make_field("coverage", &RunConfig::coverage, "chance an annotator labels a document"),
      make_field("k", &RunConfig::k, "number of clusters"),
  };
  return all;
}

const Field& field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw std::logic_error("no config field " + key);
}

std::string flag_name(const std::string& key) {
  std::string flag = "--" + key;
  std::replace(flag.begin(), flag.end(), '_', '-');
  return flag;
}

[[noreturn]] void missing(const std::string& key) {
  throw UsageError("missing required " + flag_name(key));
}

void require_positive(const std::string& key, double value) {
  if (!(value > 0.0)) throw UsageError(flag_name(key) + " must be positive");
}

}  // namespace

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& f : fields()) keys.push_back(f.key);
  return keys;
}

void apply_json(RunConfig& cfg, const json& j) {
  if (!j.is_object()) throw UsageError("config must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "command") continue;
    const Field* f = nullptr;
    for (const auto& candidate : fields()) {
      if (candidate.key == key) f = &candidate;
    }
    if (!f) throw UsageError("unknown config key '" + key + "'");
    try {
      f->read(cfg, value);
    } catch (const json::exception& e) {
      throw UsageError("config key '" + key + "': " + e.what());
    }
  }
}

void load_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw UsageError("config " + path.string() + ": " + e.what());
  }
  apply_json(cfg, j);
}

json to_json(const RunConfig& cfg) {
  json j = json::object();
  j["command"] = cfg.command;
  for (const auto& f : fields()) j[f.key] = f.write(cfg);
  return j;
}

void add_flags(CLI::App& app, RunConfig& parsed, const std::vector<std::string>& keys) {
  for (const auto& key : keys) {
    const Field& f = field(key);
    f.add(app, parsed, flag_name(key));
  }
}

void apply_flags(RunConfig& cfg, const RunConfig& parsed, const CLI::App& app,
                 const std::vector<std::string>& keys) {
  for (const auto& key : keys) {
    const CLI::Option* opt = app.get_option_no_throw(flag_name(key));
    if (opt && opt->count() > 0) field(key).copy(cfg, parsed);
  }
}

void resolve(RunConfig& cfg) {
  if (cfg.methods.empty()) cfg.methods = {cfg.method};
  if (cfg.scheme.empty()) throw UsageError("--scheme needs at least one span type");
  try {
    AggregatorConfig probe;
    set_method(probe, cfg.method);
    for (const auto& m : cfg.methods) set_method(probe, m);
    for (const auto& s : cfg.selectors) parse_selector(s);
    parse_model_kind(cfg.synth_model);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (cfg.mode != "strict" && cfg.mode != "relaxed") {
    throw UsageError("--mode must be strict or relaxed");
  }
  require_positive("gamma0", cfg.gamma0);
  require_positive("alpha0", cfg.alpha0);
  require_positive("kappa0", cfg.kappa0);
  require_positive("disallowed_mass", cfg.disallowed_mass);
  require_positive("smoothing", cfg.smoothing);
  require_positive("tol", cfg.tol);
  if (cfg.epsilon0 < 0.0) throw UsageError("--epsilon0 must be non-negative");
  if (cfg.max_iters < 1) throw UsageError("--max-iters must be at least 1");
  if (cfg.threads < 1) throw UsageError("--threads must be at least 1");
  if (cfg.selectors.empty()) throw UsageError("--selectors needs at least one selector");
  if (cfg.initial_set_size < 0 || cfg.batch_size < 1 || cfg.max_no_labels < 0 ||
      cfg.repeats < 1) {
    throw UsageError("active-learning sizes must be non-negative, batch and repeats positive");
  }
  if (cfg.num_docs < 1 || cfg.doc_length < 1 || cfg.num_annotators < 1 || cfg.vocab_size < 1) {
    throw UsageError("synthetic sizes must be positive");
  }
  if (!(cfg.coverage > 0.0 && cfg.coverage <= 1.0)) {
    throw UsageError("--coverage must lie in (0, 1]");
  }
  if (cfg.k < 1) throw UsageError("--k must be at least 1");

  const std::string& c = cfg.command;
  if (c == "aggregate" || c == "active-learn") {
    if (cfg.crowd.empty()) missing("crowd");
  }
  if (c == "evaluate" || c == "active-learn") {
    if (cfg.gold.empty()) missing("gold");
  }
  if (c == "evaluate" && cfg.pred.empty()) missing("pred");
  if (c == "cluster" && cfg.model.empty()) missing("model");
}

}  // namespace bsc::cli
