#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace gdm {

using FeatureIndex = std::size_t;
using SampleIndex = std::uint32_t;

namespace data {

/// Threshold on the squared centered norm below which a feature is constant.
inline constexpr double kDefaultVarianceEpsilon = 1e-12;

struct FeatureStats {
  double mean = 0.0;
  /// Euclidean norm of f - mean * 1, i.e. sqrt(n) * sigma.
  double centered_norm = 0.0;
  bool is_degenerate = true;

  bool operator==(const FeatureStats&) const = default;
};

/// One stored feature row: strictly increasing sample indices and their
/// nonzero raw values.
struct FeatureRow {
  std::span<const SampleIndex> samples;
  std::span<const double> values;

  std::size_t size() const { return samples.size(); }
};

/// Binary-labelled data stored feature-major (one sparse row per feature).
///
/// Every correlation and score in the library works on the virtual
/// standardized view of a feature: zero mean and unit Euclidean norm over the
/// n samples. The view is never materialized; `stats(j)` carries the mean and
/// centered norm needed to correct raw sparse dot products.
///
/// Immutable after construction.
class SparseDataset {
 public:
  SparseDataset() = default;

  /// Builds from feature-major CSR arrays. `row_ptr` has n_features + 1
  /// entries. Throws DataError if labels are not +-1, sample indices are not
  /// strictly increasing within a row or out of range, or a value is zero or
  /// non-finite.
  SparseDataset(std::vector<double> labels, std::size_t n_features,
                std::vector<std::size_t> row_ptr,
                std::vector<SampleIndex> sample_index,
                std::vector<double> values,
                double variance_epsilon = kDefaultVarianceEpsilon);

  /// Dense feature-major input: feature_rows[j][i] is feature j of sample i.
  /// Zeros are dropped.
  static SparseDataset from_dense(
      std::vector<double> labels,
      const std::vector<std::vector<double>>& feature_rows);

  using SampleEntries = std::vector<std::pair<FeatureIndex, double>>;

  /// Sample-major input (0-based feature indices, strictly increasing within
  /// each sample). Zeros are dropped.
  static SparseDataset from_samples(std::vector<double> labels,
                                    std::size_t n_features,
                                    const std::vector<SampleEntries>& samples);

  std::size_t n_samples() const { return labels_.size(); }
  std::size_t n_features() const { return stats_.size(); }
  std::size_t nnz() const { return values_.size(); }

  std::span<const double> labels() const { return labels_; }
  double label(std::size_t i) const { return labels_[i]; }

  FeatureRow row(FeatureIndex j) const;
  const FeatureStats& stats(FeatureIndex j) const { return stats_[j]; }
  std::span<const FeatureStats> stats() const { return stats_; }
  bool is_degenerate(FeatureIndex j) const { return stats_[j].is_degenerate; }

  /// Dense zero-mean, unit-norm copy of feature j (all zeros if degenerate).
  std::vector<double> standardized_dense(FeatureIndex j) const;

  /// Sample-major view, used for serialization.
  std::vector<SampleEntries> to_samples() const;

  bool operator==(const SparseDataset& other) const;

 private:
  std::vector<double> labels_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<SampleIndex> sample_index_;
  std::vector<double> values_;
  std::vector<FeatureStats> stats_;
};

/// Mean and centered norm of every feature, computed from the stored nonzeros
/// only.
std::vector<FeatureStats> compute_stats(
    const SparseDataset& dataset,
    double variance_epsilon = kDefaultVarianceEpsilon);

/// Dot product of the standardized view of feature j with v:
///   (sum_nz raw * v_i - mean_j * sum(v)) / centered_norm_j
/// `sum_v` must be the sum of v's entries. Degenerate features give 0.
double standardized_dot(const SparseDataset& dataset, FeatureIndex j,
                        std::span<const double> v, double sum_v);

/// Parses LIBSVM / SVMlight text ("label idx:val ..." with 1-based strictly
/// increasing indices). Positive labels map to +1, everything else to -1.
/// Blank lines and '#' comments are ignored, as are "qid:" tokens.
/// `dimensions` fixes n_features; an index beyond it is a DataError.
SparseDataset parse_libsvm(std::istream& in,
                           std::optional<std::size_t> dimensions = {});
SparseDataset parse_libsvm(std::string_view text,
                           std::optional<std::size_t> dimensions = {});

/// Reads a LIBSVM file, transparently decompressing gzip input.
SparseDataset load_libsvm(const std::filesystem::path& path,
                          std::optional<std::size_t> dimensions = {});

/// Writes LIBSVM text with shortest round-trip value formatting.
void write_libsvm(const SparseDataset& dataset, std::ostream& out);

}  // namespace data
}  // namespace gdm
