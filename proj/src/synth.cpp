#include "gdm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "gdm/errors.hpp"

namespace gdm::synth {

void SynthConfig::validate() const {
  if (n_samples < 2 || n_test_samples < 2) throw std::invalid_argument("need >= 2 samples");
  if (n_groups == 0) throw std::invalid_argument("n_groups must be >= 1");
  if (n_correlated_groups > n_groups) {
    throw std::invalid_argument("n_correlated_groups exceeds n_groups");
  }
  const auto [lo, hi] = group_size_range;
  if (lo < 2 || hi < lo) throw std::invalid_argument("group_size_range must satisfy 2 <= lo <= hi");
  if (!(within_group_corr > 0.0 && within_group_corr < 1.0)) {
    throw std::invalid_argument("within_group_corr must lie in (0, 1)");
  }
  if (noise_level < 0.0 || label_noise < 0.0 || min_abs_weight < 0.0) {
    throw std::invalid_argument("noise levels and min_abs_weight must be >= 0");
  }
  if (n_groups + n_correlated_groups * (hi - 1) > n_features) {
    throw std::invalid_argument("informative features can exceed n_features");
  }
}

namespace {

using Rng = std::mt19937_64;

Rng stream(std::uint64_t seed, std::uint64_t which) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(which)};
  return Rng(seq);
}

// Member perturbation scale so that two members share correlation r with a
// representative of variance v.
double member_scale(double v, double r) { return std::sqrt(v * (1.0 - r) / r); }

data::SparseDataset draw_split(const SynthConfig& cfg, const GroundTruth& truth,
                               std::size_t n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const std::size_t m = cfg.n_features;
  std::vector<std::vector<double>> rows(m, std::vector<double>(n));

  // Population correlation set above the target so the sample correlation
  // clears it with high probability.
  const double w = cfg.within_group_corr;
  const double margin = 2.5 * (1.0 - w * w) / std::sqrt(static_cast<double>(n));
  const double r_pop = std::min(w + margin, 0.999);
  const double rep_var = 1.0 + cfg.noise_level * cfg.noise_level;
  const double scale = member_scale(rep_var, r_pop);

  std::vector<double> logit(n, 0.0);
  for (std::size_t g = 0; g < truth.groups.size(); ++g) {
    const auto& members = truth.groups[g];
    std::vector<double> latent(n);
    for (double& x : latent) x = normal(rng);
    auto& rep = rows[members[0]];
    for (std::size_t i = 0; i < n; ++i) {
      rep[i] = latent[i] + cfg.noise_level * normal(rng);
      logit[i] += truth.group_weights[g] * latent[i];
    }
    for (std::size_t k = 1; k < members.size(); ++k) {
      auto& row = rows[members[k]];
      for (std::size_t i = 0; i < n; ++i) row[i] = rep[i] + scale * normal(rng);
    }
  }
  for (const FeatureIndex j : truth.noise_indices) {
    for (double& x : rows[j]) x = normal(rng);
  }

  double wsq = 0.0;
  for (double gw : truth.group_weights) wsq += gw * gw;
  const double label_sd = cfg.label_noise * std::sqrt(wsq);
  std::vector<double> labels(n);
  for (std::size_t i = 0; i < n; ++i) {
    labels[i] = logit[i] + label_sd * normal(rng) >= 0.0 ? 1.0 : -1.0;
  }
  const bool both = std::count(labels.begin(), labels.end(), 1.0) > 0 &&
                    std::count(labels.begin(), labels.end(), -1.0) > 0;
  if (!both) throw DataError("generated labels contain a single class");
  return data::SparseDataset::from_dense(std::move(labels), rows);
}

}  // namespace

SynthData generate(const SynthConfig& config) {
  config.validate();
  Rng rng = stream(config.seed, 0);
  std::normal_distribution<double> normal(0.0, 1.0);

  GroundTruth truth;
  truth.n_features = config.n_features;
  std::vector<FeatureIndex> position(config.n_features);
  std::iota(position.begin(), position.end(), FeatureIndex{0});
  std::shuffle(position.begin(), position.end(), rng);

  std::uniform_int_distribution<std::size_t> size_dist(config.group_size_range.first,
                                                       config.group_size_range.second);
  std::size_t next = 0;
  for (std::size_t g = 0; g < config.n_groups; ++g) {
    const std::size_t size = g < config.n_correlated_groups ? size_dist(rng) : 1;
    std::vector<FeatureIndex> members(position.begin() + next, position.begin() + next + size);
    next += size;
    truth.groups.push_back(std::move(members));
    double w = normal(rng);
    while (std::abs(w) < config.min_abs_weight) w = normal(rng);
    truth.group_weights.push_back(w);
  }
  truth.noise_indices.assign(position.begin() + next, position.end());
  std::sort(truth.noise_indices.begin(), truth.noise_indices.end());

  Rng train_rng = stream(config.seed, 1);
  Rng test_rng = stream(config.seed, 2);
  auto train = draw_split(config, truth, config.n_samples, train_rng);
  auto test = draw_split(config, truth, config.n_test_samples, test_rng);
  return {std::move(train), std::move(test), std::move(truth)};
}

RecoveryReport recovery_score(const SelectionModel& model, const GroundTruth& truth,
                              double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
  std::vector<std::ptrdiff_t> group_of(truth.n_features, -1);
  for (std::size_t g = 0; g < truth.groups.size(); ++g) {
    for (const FeatureIndex j : truth.groups[g]) group_of[j] = static_cast<std::ptrdiff_t>(g);
  }

  RecoveryReport r;
  r.n_supports = model.support.size();
  std::vector<std::vector<FeatureIndex>> supports_in(truth.groups.size());
  std::size_t informative = 0;
  for (const FeatureIndex s : model.support) {
    if (s < group_of.size() && group_of[s] >= 0) {
      ++informative;
      supports_in[group_of[s]].push_back(s);
    }
  }
  if (!model.support.empty()) {
    r.purity = static_cast<double>(informative) / static_cast<double>(model.support.size());
  }

  std::size_t hit = 0, covered_groups = 0;
  double coverage_sum = 0.0;
  for (std::size_t g = 0; g < truth.groups.size(); ++g) {
    if (supports_in[g].empty()) continue;
    ++hit;
    if (supports_in[g].size() >= 2) ++r.exclusivity_violations;
    const auto& members = truth.groups[g];
    if (members.size() < 2) continue;
    std::set<FeatureIndex> claimed;
    for (const FeatureIndex s : supports_in[g]) {
      claimed.insert(s);
      if (auto it = model.groups.find(s); it != model.groups.end()) {
        claimed.insert(it->second.begin(), it->second.end());
      }
    }
    std::size_t found = 0;
    for (const FeatureIndex j : members) found += claimed.count(j);
    coverage_sum += static_cast<double>(found) / static_cast<double>(members.size());
    ++covered_groups;
  }
  r.hit_rate = static_cast<double>(hit) / static_cast<double>(truth.groups.size());
  if (covered_groups > 0) r.coverage = coverage_sum / static_cast<double>(covered_groups);
  return r;
}

}  // namespace gdm::synth
