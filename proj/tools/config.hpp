#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace CLI {
class App;
class Option;
}  // namespace CLI

namespace bsc::cli {

/// Bad flags, config or inputs; reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string command;

  std::string crowd;
  std::string gold;
  std::string pred;
  std::string posteriors;
  std::string model;
  std::string output = "out";

  std::vector<std::string> scheme{"ENT"};
  std::string method = "bsc-seq";
  bool notext = false;
  bool no_transitions = false;

  double gamma0 = 1.0;
  double alpha0 = 1.0;
  double epsilon0 = 1.0;
  double kappa0 = 1.0;
  double disallowed_mass = 1e-6;
  double smoothing = 0.1;
  double tol = 1e-4;
  int max_iters = 200;
  std::uint64_t seed = 0;
  int threads = 1;

  std::string mode = "strict";

  std::vector<std::string> methods;
  std::vector<std::string> selectors{"least_confidence"};
  int initial_set_size = 100;
  int batch_size = 10;
  int max_no_labels = 300;
  int repeats = 1;

  int num_docs = 200;
  int doc_length = 10;
  int num_annotators = 5;
  std::string synth_model = "seq";
  double diag_mass = 0.8;
  int vocab_size = 20;
  double coverage = 1.0;

  int k = 5;
};

/// Every key of the config file, with its flag spelling (`--` plus the key
/// with underscores turned into dashes).
std::vector<std::string> config_keys();

/// Reads a JSON object; unknown keys and wrongly typed values throw
/// UsageError naming the key.
void apply_json(RunConfig& cfg, const nlohmann::json& j);
void load_config_file(RunConfig& cfg, const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& cfg);

/// Registers flags for `keys` on `app`, bound to fields of `parsed`.
void add_flags(CLI::App& app, RunConfig& parsed, const std::vector<std::string>& keys);
/// Copies into `cfg` every field whose flag was given on the command line.
void apply_flags(RunConfig& cfg, const RunConfig& parsed, const CLI::App& app,
                 const std::vector<std::string>& keys);

/// Fills derived defaults (e.g. `methods` from `method`) and checks every
/// value the command uses, before any input is read.
void resolve(RunConfig& cfg);

}  // namespace bsc::cli
