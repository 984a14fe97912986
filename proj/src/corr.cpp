#include "gdm/corr.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace gdm::corr {

double pearson(const data::SparseDataset& dataset, FeatureIndex j, FeatureIndex k) {
  const auto& sj = dataset.stats(j);
  const auto& sk = dataset.stats(k);
  if (sj.is_degenerate || sk.is_degenerate) return 0.0;
  if (j == k) return 1.0;

  const auto a = dataset.row(j);
  const auto b = dataset.row(k);
  const double mj = sj.mean;
  const double mk = sk.mean;

  // Centered products over the union of stored samples; every sample outside
  // the union contributes (0 - mj)(0 - mk).
  double acc = 0.0;
  std::size_t p = 0, q = 0, in_union = 0;
  while (p < a.size() || q < b.size()) {
    if (q == b.size() || (p < a.size() && a.samples[p] < b.samples[q])) {
      acc += (a.values[p] - mj) * (0.0 - mk);
      ++p;
    } else if (p == a.size() || b.samples[q] < a.samples[p]) {
      acc += (0.0 - mj) * (b.values[q] - mk);
      ++q;
    } else {
      acc += (a.values[p] - mj) * (b.values[q] - mk);
      ++p;
      ++q;
    }
    ++in_union;
  }
  acc += static_cast<double>(dataset.n_samples() - in_union) * (mj * mk);
  const double rho = acc / (sj.centered_norm * sk.centered_norm);
  return std::clamp(rho, -1.0, 1.0);
}

namespace {

std::vector<FeatureIndex> distinct(std::span<const FeatureIndex> features) {
  std::vector<FeatureIndex> f(features.begin(), features.end());
  std::sort(f.begin(), f.end());
  f.erase(std::unique(f.begin(), f.end()), f.end());
  return f;
}

}  // namespace

std::vector<PairCorrelation> pairwise(const data::SparseDataset& dataset,
                                      std::span<const FeatureIndex> features) {
  const auto f = distinct(features);
  std::vector<PairCorrelation> out;
  out.reserve(f.size() * (f.size() - (f.empty() ? 0 : 1)) / 2);
  for (std::size_t a = 0; a < f.size(); ++a) {
    for (std::size_t b = a + 1; b < f.size(); ++b) {
      out.push_back({f[a], f[b], pearson(dataset, f[a], f[b])});
    }
  }
  return out;
}

double redundancy_rate(const data::SparseDataset& dataset,
                       std::span<const FeatureIndex> features,
                       RedundancyNormalizer normalizer) {
  const auto f = distinct(features);
  if (f.size() < 2) {
    throw std::invalid_argument("redundancy rate needs at least two distinct features");
  }
  for (auto j : f) {
    if (j >= dataset.n_features()) throw std::invalid_argument("feature index out of range");
  }
  const auto np = static_cast<std::ptrdiff_t>(f.size());
  double sum = 0.0;
  // Row sums first, then a fixed-order reduction, so the result does not
  // depend on the thread count.
  std::vector<double> row_sum(f.size(), 0.0);
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t a = 0; a < np; ++a) {
    double s = 0.0;
    for (std::ptrdiff_t b = a + 1; b < np; ++b) {
      s += std::abs(pearson(dataset, f[a], f[b]));
    }
    row_sum[a] = s;
  }
  for (double s : row_sum) sum += s;

  const double m = static_cast<double>(f.size());
  switch (normalizer) {
    case RedundancyNormalizer::kOrderedPairs:
      return sum / (m * (m - 1.0));
    case RedundancyNormalizer::kMeanPairs:
      return sum / (m * (m - 1.0) / 2.0);
  }
  return sum;
}

}  // namespace gdm::corr
