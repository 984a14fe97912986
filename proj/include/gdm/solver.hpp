#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "gdm/data.hpp"

namespace gdm::solver {

/// Euclidean projection onto the probability simplex {u : u >= 0, sum u = 1}.
std::vector<double> project_simplex(std::span<const double> v);

/// g(alpha) = 1/2 ||sum_i alpha_i y_i (x_i restricted to a feature subset)||^2
///          + 1/(2C) ||alpha||^2
/// with x the standardized features. Holds its own copy of the selected rows
/// and labels, so it stays valid independently of the dataset.
class QuadraticPiece {
 public:
  QuadraticPiece(const data::SparseDataset& dataset, std::vector<FeatureIndex> features);

  std::size_t n_samples() const { return labels_.size(); }
  /// Dimension of the dataset the piece was cut from.
  std::size_t n_features() const { return n_features_; }
  std::span<const FeatureIndex> features() const { return features_; }
  std::span<const double> means() const { return mean_; }
  std::span<const double> norms() const { return norm_; }
  std::span<const double> labels() const { return labels_; }

  /// v_j = <standardized f_j, alpha * y> for each feature of the piece.
  std::vector<double> feature_weights(std::span<const double> alpha) const;

  double value(std::span<const double> alpha, double C) const;

  /// Value, with the gradient written to `gradient` (length n):
  ///   gradient_i = y_i <x_i restricted, v> + alpha_i / C
  double value_and_gradient(std::span<const double> alpha, double C,
                            std::span<double> gradient) const;

 private:
  std::size_t n_features_ = 0;
  std::vector<FeatureIndex> features_;
  std::vector<double> labels_;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<SampleIndex> samples_;
  std::vector<double> values_;
  std::vector<double> mean_;
  std::vector<double> norm_;
  std::vector<double> inv_norm_;  // 0 for constant features
};

struct PieceEvaluation {
  double value = 0.0;
  std::vector<double> gradient;
};

PieceEvaluation eval_piece(const QuadraticPiece& piece, std::span<const double> alpha,
                           double C);

struct MinMaxOptions {
  double C = 1.0;
  /// Target absolute accuracy of max_t g_t(alpha) relative to the optimum.
  double eps_sub = 1e-6;
  std::size_t max_iterations = 10000;
};

struct MinMaxSolution {
  std::vector<double> alpha;
  /// max_t g_t(alpha).
  double theta = 0.0;
  /// Convex weights over pieces.
  std::vector<double> mu;
  std::vector<double> piece_values;
  /// Certified upper bound on theta - optimum.
  double kkt_residual = 0.0;
  std::size_t iterations = 0;
  /// Smoothed objective at the start and at each accepted iterate, ending with
  /// theta. Non-increasing.
  std::vector<double> objective_trace;
};

/// min over the simplex of max_t g_t(alpha).
///
/// Minimizes a log-sum-exp smoothing of the max with monotone accelerated
/// projected gradient, tightening the smoothing in stages. Termination is
/// certified: with mu the smoothing weights at the returned alpha,
///   theta - (sum_t mu_t g_t(alpha) - FW gap of sum_t mu_t g_t at alpha)
/// bounds theta - optimum, and the solver stops once that is <= eps_sub.
/// For a single piece the certificate equals the SVM primal-dual gap.
///
/// Throws ConvergenceError (carrying the best iterate) if the iteration cap is
/// reached first.
MinMaxSolution solve_minmax(std::span<const QuadraticPiece> pieces,
                            std::optional<std::span<const double>> warm_start,
                            const MinMaxOptions& options = {});

/// Linear classifier over a feature subset, applied to standardized inputs
/// using training-set statistics. No bias term.
struct SvmModel {
  std::size_t n_features = 0;
  std::vector<FeatureIndex> features;
  std::vector<double> weights;
  std::vector<double> means;
  std::vector<double> norms;
  /// Margin offset recovered from the dual; 0 for models loaded without it.
  double gamma = 0.0;
  /// 1/2 ||w||^2 - gamma + C/2 sum xi^2 at the recovered primal point.
  double primal_objective = 0.0;

  bool operator==(const SvmModel&) const = default;
};

/// Primal point from a dual solution of the single-piece problem:
///   w = sum_i alpha_i y_i x_i (restricted), xi_i = alpha_i / C,
///   gamma = min_i (y_i w'x_i + alpha_i / C).
/// The returned point is primal feasible for any alpha in the simplex.
SvmModel recover_svm(const QuadraticPiece& piece, std::span<const double> alpha,
                     double C);

/// w' x_hat for every sample of `dataset`. Throws DataError if the dataset's
/// dimension differs from the model's.
std::vector<double> decision_values(const SvmModel& model,
                                    const data::SparseDataset& dataset);

}  // namespace gdm::solver
