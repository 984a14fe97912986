#include "gdm/crm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gdm/corr.hpp"
#include "gdm/errors.hpp"

namespace gdm::crm {

namespace {
constexpr std::size_t kTracePrefix = 32;
}

ScoreVector rank_scores(std::vector<double> c) {
  ScoreVector out;
  out.c = std::move(c);
  out.ranking.resize(out.c.size());
  std::iota(out.ranking.begin(), out.ranking.end(), FeatureIndex{0});
  const auto& sc = out.c;
  std::sort(out.ranking.begin(), out.ranking.end(), [&sc](FeatureIndex a, FeatureIndex b) {
    const double x = std::abs(sc[a]);
    const double y = std::abs(sc[b]);
    if (x != y) return x > y;
    return a < b;
  });
  return out;
}

ScoreVector score_features(const data::SparseDataset& dataset,
                           std::span<const double> alpha_signed) {
  if (alpha_signed.size() != dataset.n_samples()) {
    throw std::invalid_argument("alpha_signed length != n_samples");
  }
  if (std::all_of(alpha_signed.begin(), alpha_signed.end(), [](double a) { return a == 0.0; })) {
    throw Error("degenerate dual: alpha_signed is all zero");
  }
  const double sum = std::accumulate(alpha_signed.begin(), alpha_signed.end(), 0.0);
  std::vector<double> c(dataset.n_features(), 0.0);
  const auto m = static_cast<std::ptrdiff_t>(dataset.n_features());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < m; ++j) {
    c[j] = data::standardized_dot(dataset, static_cast<FeatureIndex>(j), alpha_signed, sum);
  }
  return rank_scores(std::move(c));
}

ConstraintMask match(const ScoreVector& scores, const CorrelationFn& correlation,
                     const MatchOptions& options, const std::vector<bool>& skip,
                     const std::vector<bool>& excluded, MatchTrace* trace) {
  if (options.budget == 0) throw std::invalid_argument("budget must be >= 1");
  if (!(options.tau > 0.0 && options.tau < 1.0)) {
    throw std::invalid_argument("tau must lie in (0, 1)");
  }
  const double width = std::sqrt(2.0 * options.tau) * options.alpha_norm;
  const double threshold = 1.0 - options.tau;
  const auto& c = scores.c;

  ConstraintMask mask;
  std::vector<double> floor;  // |c_z| - width per support

  if (trace != nullptr) {
    *trace = MatchTrace{};
    const std::size_t k = std::min(kTracePrefix, scores.ranking.size());
    for (std::size_t r = 0; r < k; ++r) {
      trace->ranking_prefix.emplace_back(scores.ranking[r], c[scores.ranking[r]]);
    }
  }

  std::size_t scanned = 0, checks = 0;
  for (const FeatureIndex h : scores.ranking) {
    if (!skip.empty() && skip[h]) continue;
    const double score = std::abs(c[h]);
    // Scores only decrease along the ranking; the last support has the lowest
    // floor, so nothing further down can fall in any window.
    if (mask.support.size() == options.budget && score < floor.back()) break;
    ++scanned;

    std::size_t owner = mask.support.size();
    for (std::size_t s = 0; s < mask.support.size(); ++s) {
      if (score < floor[s]) continue;
      ++checks;
      if (std::abs(correlation(mask.support[s], h)) >= threshold) {
        owner = s;
        break;
      }
    }
    if (owner < mask.support.size()) {
      mask.groups[owner].push_back(h);
    } else if ((excluded.empty() || !excluded[h]) && mask.support.size() < options.budget) {
      mask.support.push_back(h);
      mask.groups.push_back({h});
      floor.push_back(score - width);
    }
  }

  if (trace != nullptr) {
    trace->window_floor = floor;
    trace->scanned = scanned;
    trace->correlation_checks = checks;
    trace->groups = mask.groups;
  }
  return mask;
}

ConstraintMask match(const data::SparseDataset& dataset, const ScoreVector& scores,
                     const MatchOptions& options, const std::vector<bool>& excluded,
                     MatchTrace* trace) {
  std::vector<bool> skip(dataset.n_features());
  for (FeatureIndex j = 0; j < dataset.n_features(); ++j) skip[j] = dataset.is_degenerate(j);
  const CorrelationFn rho = [&dataset](FeatureIndex a, FeatureIndex b) {
    return corr::pearson(dataset, a, b);
  };
  return match(scores, rho, options, skip, excluded, trace);
}

}  // namespace gdm::crm
