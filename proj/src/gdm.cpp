#include "gdm/gdm.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <set>
#include <stdexcept>

#include "gdm/corr.hpp"
#include "gdm/errors.hpp"

namespace gdm {

void GdmConfig::validate() const {
  if (budget < 1) throw std::invalid_argument("budget must be >= 1");
  if (iterations < 1) throw std::invalid_argument("iterations must be >= 1");
  if (!(tau > 0.0 && tau < 1.0)) throw std::invalid_argument("tau must lie in (0, 1)");
  if (!(C > 0.0)) throw std::invalid_argument("C must be positive");
  if (!(eps_cut > 0.0)) throw std::invalid_argument("eps_cut must be positive");
  if (!(eps_sub > 0.0)) throw std::invalid_argument("eps_sub must be positive");
  if (target_features && *target_features < 1) {
    throw std::invalid_argument("target_features must be >= 1");
  }
}

std::vector<FeatureIndex> SelectionModel::selected_with_affiliated() const {
  std::set<FeatureIndex> all(support.begin(), support.end());
  for (const auto& [s, members] : groups) all.insert(members.begin(), members.end());
  return {all.begin(), all.end()};
}

namespace {

std::vector<double> signed_dual(const data::SparseDataset& ds, const std::vector<double>& alpha) {
  std::vector<double> out(alpha.size());
  for (std::size_t i = 0; i < alpha.size(); ++i) out[i] = alpha[i] * ds.label(i);
  return out;
}

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

bool same_support(const crm::ConstraintMask& a, const crm::ConstraintMask& b) {
  auto x = a.support, y = b.support;
  std::sort(x.begin(), x.end());
  std::sort(y.begin(), y.end());
  return x == y;
}

}  // namespace

FitResult fit(const data::SparseDataset& dataset, const GdmConfig& config) {
  config.validate();
  const std::size_t n = dataset.n_samples();
  const std::size_t m = dataset.n_features();
  if (n < 2) throw DataError("need at least two samples");
  const auto labels = dataset.labels();
  const bool has_pos = std::any_of(labels.begin(), labels.end(), [](double y) { return y > 0; });
  const bool has_neg = std::any_of(labels.begin(), labels.end(), [](double y) { return y < 0; });
  if (!has_pos || !has_neg) throw DataError("labels contain a single class");

  const auto start = std::chrono::steady_clock::now();
  auto elapsed = [&start] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };

  FitResult result;
  auto& state = result.state;
  auto& model = result.model;
  model.config = config;
  model.n_features = m;

  state.alpha.assign(n, 1.0 / static_cast<double>(n));
  std::vector<bool> excluded(m, false);
  std::vector<bool> in_support(m, false);
  std::vector<bool> skip(m, false);
  for (FeatureIndex j = 0; j < m; ++j) skip[j] = dataset.is_degenerate(j);
  const crm::CorrelationFn rho = [&dataset](FeatureIndex a, FeatureIndex b) {
    return corr::pearson(dataset, a, b);
  };

  std::vector<solver::QuadraticPiece> pool;
  solver::MinMaxOptions solver_options;
  solver_options.C = config.C;
  solver_options.eps_sub = config.eps_sub;

  crm::MatchOptions match_options;
  match_options.budget = config.effective_budget();
  match_options.tau = config.tau;

  crm::ScoreVector scores;
  for (std::size_t t = 1; t <= config.iterations; ++t) {
    state.alpha_signed = signed_dual(dataset, state.alpha);
    scores = crm::score_features(dataset, state.alpha_signed);
    match_options.alpha_norm = norm2(state.alpha);
    crm::MatchTrace match_trace;
    auto mask = crm::match(scores, rho, match_options, skip, excluded, &match_trace);
    state.crm_traces.push_back(std::move(match_trace));

    TraceEntry entry;
    entry.theta = state.theta;
    entry.support_size = model.support.size();

    if (mask.support.empty()) {
      if (t == 1) throw DataError("no usable features (all features are constant)");
      state.stop_reason = "exhausted";
      state.converged = true;
      entry.wall_time_s = elapsed();
      state.trace.push_back(entry);
      break;
    }

    solver::QuadraticPiece piece(dataset, mask.support);
    entry.violation = piece.value(state.alpha, config.C);
    const bool duplicate = std::any_of(
        state.constraints.begin(), state.constraints.end(),
        [&mask](const crm::ConstraintMask& c) { return same_support(c, mask); });
    if (duplicate || (t > 1 && entry.violation <= state.theta * (1.0 + config.eps_cut))) {
      state.stop_reason = duplicate ? "duplicate" : "converged";
      state.converged = true;
      entry.wall_time_s = elapsed();
      state.trace.push_back(entry);
      break;
    }

    for (std::size_t k = 0; k < mask.support.size(); ++k) {
      const FeatureIndex s = mask.support[k];
      if (!in_support[s]) {
        in_support[s] = true;
        model.support.push_back(s);
      }
      auto& group = model.groups[s];
      group.insert(group.end(), mask.groups[k].begin(), mask.groups[k].end());
      std::sort(group.begin(), group.end());
      group.erase(std::unique(group.begin(), group.end()), group.end());
      for (const FeatureIndex h : mask.groups[k]) excluded[h] = true;
    }
    state.constraints.push_back(mask);
    pool.push_back(std::move(piece));

    const auto solution =
        solver::solve_minmax(pool, std::span<const double>(state.alpha), solver_options);
    state.alpha = solution.alpha;
    state.theta = solution.theta;

    entry.theta = state.theta;
    entry.support_size = model.support.size();
    entry.added = true;
    entry.wall_time_s = elapsed();
    state.trace.push_back(entry);

    if (config.target_features && model.support.size() >= *config.target_features) {
      state.stop_reason = "target";
      break;
    }
    if (t == config.iterations) state.stop_reason = "iterations";
  }

  state.alpha_signed = signed_dual(dataset, state.alpha);
  if (state.stop_reason == "target" || state.stop_reason == "iterations") {
    scores = crm::score_features(dataset, state.alpha_signed);
  }
  model.scores_final.resize(m);
  for (FeatureIndex j = 0; j < m; ++j) model.scores_final[j] = std::abs(scores.c[j]);
  model.per_constraint = state.constraints;
  model.trace = state.trace;
  model.converged = state.converged;
  model.stop_reason = state.stop_reason;
  return result;
}

solver::SvmModel final_classifier(const data::SparseDataset& dataset,
                                  const SelectionModel& model, const GdmConfig& config) {
  if (model.support.empty()) throw Error("model has no support features");
  if (dataset.n_features() != model.n_features) {
    throw DataError("feature dimension mismatch between model and data");
  }
  std::vector<FeatureIndex> features =
      config.with_affiliated ? model.selected_with_affiliated() : model.support;
  if (!config.with_affiliated) std::sort(features.begin(), features.end());
  const solver::QuadraticPiece piece(dataset, std::move(features));
  solver::MinMaxOptions options;
  options.C = config.C;
  options.eps_sub = config.eps_sub;
  const std::vector<solver::QuadraticPiece> one{piece};
  const auto solution = solver::solve_minmax(one, std::nullopt, options);
  return solver::recover_svm(piece, solution.alpha, config.C);
}

std::vector<int> predict(const data::SparseDataset& dataset, const solver::SvmModel& svm) {
  const auto d = solver::decision_values(svm, dataset);
  std::vector<int> out(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) out[i] = d[i] >= 0.0 ? 1 : -1;
  return out;
}

}  // namespace gdm
