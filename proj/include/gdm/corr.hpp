#pragma once

#include <span>
#include <vector>

#include "gdm/data.hpp"

namespace gdm::corr {

/// Pearson correlation of features j and k. Computed as the dot product of the
/// two standardized views with a sparse merge, O(nnz_j + nnz_k). Returns 0 if
/// either feature is constant; clamped to [-1, 1].
double pearson(const data::SparseDataset& dataset, FeatureIndex j, FeatureIndex k);

struct PairCorrelation {
  FeatureIndex j;
  FeatureIndex k;
  double rho;
};

/// Every unordered pair (j before k in the deduplicated, sorted order of F).
std::vector<PairCorrelation> pairwise(const data::SparseDataset& dataset,
                                      std::span<const FeatureIndex> features);

enum class RedundancyNormalizer {
  /// 1 / (m (m - 1)) over the unordered-pair sum, as the metric is usually
  /// printed. Values lie in [0, 0.5].
  kOrderedPairs,
  /// Mean of |rho| over unordered pairs. Values lie in [0, 1].
  kMeanPairs,
};

/// Redundancy rate of a feature set: summed |rho| over all unordered pairs,
/// normalized per `normalizer`. Duplicate indices are ignored. Throws
/// std::invalid_argument if fewer than two distinct features are given.
double redundancy_rate(const data::SparseDataset& dataset,
                       std::span<const FeatureIndex> features,
                       RedundancyNormalizer normalizer = RedundancyNormalizer::kOrderedPairs);

}  // namespace gdm::corr
