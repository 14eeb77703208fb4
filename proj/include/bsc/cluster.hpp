#pragma once

#include "bsc/types.hpp"

#include <cstdint>
#include <vector>

namespace bsc {

struct Clustering {
  std::vector<int> assignment;
  /// Mean tensor of each cluster, shaped like the inputs.
  std::vector<MatrixXd> means;
  int iterations = 0;
};

/// K-means (k-means++ seeding, Lloyd updates) over flattened annotator
/// confusion tensors. All inputs must share one shape.
Clustering cluster_annotators(const std::vector<MatrixXd>& tensors, int k, std::uint64_t seed,
                              int max_iters = 100);

}  // namespace bsc
