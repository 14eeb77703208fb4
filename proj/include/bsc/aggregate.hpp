#pragma once

#include "bsc/baselines.hpp"
#include "bsc/corpus.hpp"
#include "bsc/inference.hpp"
#include "bsc/scheme.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bsc {

enum class Method { MajorityVote, DawidSkene, Ibcc, Bsc };

/// One aggregation method with its settings. IBCC reads its priors from
/// `bsc`: annotator alpha0/epsilon0, gamma0 as the class-proportion prior,
/// plus the tolerance and iteration cap.
struct AggregatorConfig {
  Method method = Method::Bsc;
  BscConfig bsc{};
  double smoothing = 0.1;
};

/// "mv", "ds", "ibcc", "bsc-acc", "bsc-spam", "bsc-cv", "bsc-cm", "bsc-seq".
std::string method_name(const AggregatorConfig& cfg);
/// Sets `cfg.method` (and the annotator model for BSC) from a method name.
void set_method(AggregatorConfig& cfg, std::string_view name);

struct Aggregation {
  std::vector<MatrixXd> posteriors;
  std::vector<LabelSequence> labels;
  /// Probability of the decoded sequence under the method's posterior.
  std::vector<double> confidence;
  bool converged = true;
  int iterations = 0;
  /// Full model state for BSC runs.
  std::optional<VbResult> bsc;
};

/// Runs any method over the whole corpus. BSC uses every document; the
/// token-independent baselines skip documents nobody labelled and report a
/// uniform posterior decoded as all-O for them.
Aggregation aggregate(const Corpus& corpus, const AnnotationSet& annotations,
                      const LabelScheme& scheme, const AggregatorConfig& cfg);

}  // namespace bsc
