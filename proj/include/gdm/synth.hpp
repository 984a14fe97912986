#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "gdm/data.hpp"
#include "gdm/gdm.hpp"

namespace gdm::synth {

struct SynthConfig {
  std::size_t n_samples = 512;
  std::size_t n_test_samples = 512;
  std::size_t n_features = 2000;
  std::size_t n_groups = 40;
  std::size_t n_correlated_groups = 8;
  std::pair<std::size_t, std::size_t> group_size_range{4, 8};
  double within_group_corr = 0.8;
  /// Std of the representative's deviation from its group latent.
  double noise_level = 0.1;
  /// Std of the noise added to the label logit, relative to the logit's std.
  double label_noise = 0.1;
  /// Group weights are N(0,1) conditioned on |w| >= this (0 = plain N(0,1)).
  double min_abs_weight = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct GroundTruth {
  std::vector<std::vector<FeatureIndex>> groups;
  std::vector<double> group_weights;
  std::vector<FeatureIndex> noise_indices;
  std::size_t n_features = 0;

  bool operator==(const GroundTruth&) const = default;
};

struct SynthData {
  data::SparseDataset train;
  data::SparseDataset test;
  GroundTruth truth;
};

/// Latent-group generator. Deterministic in config (including seed).
SynthData generate(const SynthConfig& config);

struct RecoveryReport {
  double hit_rate = 0.0;
  double purity = 0.0;
  /// Mean over hit correlated groups; empty if none was hit.
  std::optional<double> coverage;
  std::size_t exclusivity_violations = 0;
  std::size_t n_supports = 0;
};

RecoveryReport recovery_score(const SelectionModel& model, const GroundTruth& truth,
                              double tau);

}  // namespace gdm::synth
