#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gdm/crm.hpp"
#include "gdm/data.hpp"
#include "gdm/solver.hpp"

namespace gdm {

struct GdmConfig {
  std::size_t budget = 10;      // supports per CRM call
  std::size_t iterations = 10;  // max outer iterations
  double tau = 0.25;
  double C = 1.0;
  double eps_cut = 1e-3;
  double eps_sub = 1e-6;
  std::uint64_t seed = 0;
  /// When set, overrides budget and stops once this many supports exist.
  std::optional<std::size_t> target_features;
  /// final_classifier trains on supports plus their affiliated features.
  bool with_affiliated = false;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;
  std::size_t effective_budget() const { return target_features.value_or(budget); }
};

struct TraceEntry {
  double theta = 0.0;
  double violation = 0.0;
  std::size_t support_size = 0;
  double wall_time_s = 0.0;
  bool added = false;  // false on the iteration that stopped the loop
};

struct FitState {
  std::vector<double> alpha;
  std::vector<double> alpha_signed;
  double theta = 0.0;
  std::vector<crm::ConstraintMask> constraints;
  std::vector<TraceEntry> trace;
  std::vector<crm::MatchTrace> crm_traces;
  bool converged = false;
  /// "converged", "duplicate", "exhausted", "target" or "iterations".
  std::string stop_reason;
};

struct SelectionModel {
  GdmConfig config;
  std::size_t n_features = 0;
  std::vector<FeatureIndex> support;
  std::map<FeatureIndex, std::vector<FeatureIndex>> groups;
  std::vector<crm::ConstraintMask> per_constraint;
  std::vector<TraceEntry> trace;
  std::vector<double> scores_final;  // |c_j| at the final dual
  bool converged = false;
  std::string stop_reason;
  std::optional<solver::SvmModel> classifier;

  /// support plus every affiliated feature, sorted.
  std::vector<FeatureIndex> selected_with_affiliated() const;
};

struct FitResult {
  SelectionModel model;
  FitState state;
};

/// Cutting-plane feature selection. Throws DataError on unusable input
/// (single class, fewer than two samples, no non-constant feature) and
/// ConvergenceError if a reduced problem cannot be solved to eps_sub.
FitResult fit(const data::SparseDataset& dataset, const GdmConfig& config);

/// Squared-hinge SVM on the model's support (or support plus affiliated).
solver::SvmModel final_classifier(const data::SparseDataset& dataset,
                                  const SelectionModel& model, const GdmConfig& config);

/// +1/-1 per sample; zero decision maps to +1.
std::vector<int> predict(const data::SparseDataset& dataset, const solver::SvmModel& svm);

}  // namespace gdm
