#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gdm/data.hpp"
#include "gdm/gdm.hpp"
#include "gdm/solver.hpp"
#include "gdm/synth.hpp"

namespace gdm::bench {

inline constexpr const char* kSweepVersion = "gdm-sweep/1";

/// Fraction of samples with sign(w'x) == y (zero counts as +1).
double accuracy(const solver::SvmModel& svm, const data::SparseDataset& dataset);

struct SweepSpec {
  std::vector<std::size_t> feature_counts;
  std::vector<std::uint64_t> seeds{0};
  /// Worker threads for independent cells.
  std::size_t jobs = 1;
  /// Count the standardization pass in wall_time_s.
  bool time_standardization = false;

  void validate() const;
};

struct Split {
  data::SparseDataset train;
  data::SparseDataset test;
  std::optional<synth::GroundTruth> truth;
};

/// Produces the data for one seed. Called once per seed.
using SplitSource = std::function<Split(std::uint64_t seed)>;

struct SweepRow {
  std::size_t k = 0;
  std::uint64_t seed = 0;
  std::optional<double> accuracy_support;
  std::optional<double> accuracy_affiliated;
  std::optional<double> red_support;
  std::optional<double> red_selected;
  std::optional<double> wall_time_s;
  std::optional<double> theta_final;
  std::optional<double> hit_rate;
  std::optional<double> purity;
  std::size_t n_support = 0;
  std::size_t n_selected = 0;
  std::string stop_reason;
  std::string status = "ok";  // "ok" or "error: ..."
};

/// One row per (k, seed), ordered by seed then k. Failures become rows with
/// status "error: ..." and empty metrics.
std::vector<SweepRow> run_sweep(const SplitSource& source, const SweepSpec& spec,
                                const GdmConfig& base);

std::vector<SweepRow> run_sweep(const data::SparseDataset& train,
                                const data::SparseDataset& test, const SweepSpec& spec,
                                const GdmConfig& base);

void write_csv(const std::vector<SweepRow>& rows, std::ostream& out);

/// Per-k mean/min/max of each metric plus counts of failed cells.
nlohmann::ordered_json summary_json(const std::vector<SweepRow>& rows);

}  // namespace gdm::bench
