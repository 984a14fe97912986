#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "gdm/data.hpp"

namespace gdm::crm {

/// Per-feature scores c_j = <standardized f_j, alpha_signed> and the ranking
/// of features by |c_j| (descending, ties by ascending index).
struct ScoreVector {
  std::vector<double> c;
  std::vector<FeatureIndex> ranking;
};

/// Ranks an arbitrary score vector with the library's tie-breaking rule.
ScoreVector rank_scores(std::vector<double> c);

/// Scores every feature against the signed dual vector (alpha_i * y_i).
/// Constant features score 0. Throws gdm::Error if alpha_signed is all zero.
ScoreVector score_features(const data::SparseDataset& dataset,
                           std::span<const double> alpha_signed);

/// One constraint: the selected support features and, for each of them, its
/// affiliated group (which starts with the support itself).
struct ConstraintMask {
  std::vector<FeatureIndex> support;
  std::vector<std::vector<FeatureIndex>> groups;

  bool operator==(const ConstraintMask&) const = default;
};

struct MatchOptions {
  std::size_t budget = 1;
  /// Features with |rho| >= 1 - tau are "correlated".
  double tau = 0.25;
  /// Euclidean norm of the signed dual vector; sets the score window width
  /// sqrt(2 tau) * alpha_norm.
  double alpha_norm = 1.0;
};

/// Optional diagnostics for one match call.
struct MatchTrace {
  std::vector<std::pair<FeatureIndex, double>> ranking_prefix;
  /// Lowest score still inside each support's window, in support order.
  std::vector<double> window_floor;
  std::size_t scanned = 0;
  std::size_t correlation_checks = 0;
  /// Copy of the returned mask's groups.
  std::vector<std::vector<FeatureIndex>> groups;
};

using CorrelationFn = std::function<double(FeatureIndex, FeatureIndex)>;

/// Greedy scan down the score ranking. Every unclaimed, eligible feature
/// becomes a support until the budget is full; a candidate whose score lies
/// inside a support's window and whose |rho| with that support is at least
/// 1 - tau is claimed as that support's affiliated feature instead (first
/// matching support wins). The scan continues past a full budget while any
/// window can still contain the next score, so every group is complete.
///
/// `skip[j]` removes feature j from the scan entirely (constant features).
/// `excluded[j]` forbids j as a support but still lets it be claimed.
/// Either vector may be empty.
ConstraintMask match(const ScoreVector& scores, const CorrelationFn& correlation,
                     const MatchOptions& options, const std::vector<bool>& skip,
                     const std::vector<bool>& excluded, MatchTrace* trace = nullptr);

/// Dataset-backed form: correlations are Pearson, constant features skipped.
ConstraintMask match(const data::SparseDataset& dataset, const ScoreVector& scores,
                     const MatchOptions& options, const std::vector<bool>& excluded,
                     MatchTrace* trace = nullptr);

}  // namespace gdm::crm
