#include "gdm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "gdm/errors.hpp"

namespace gdm::solver {

std::vector<double> project_simplex(std::span<const double> v) {
  if (v.empty()) throw std::invalid_argument("cannot project an empty vector");
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumsum = 0.0;
  double shift = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cumsum += u[j];
    const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) shift = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - shift, 0.0);
  return out;
}

// ---------------------------------------------------------------------------
// QuadraticPiece

QuadraticPiece::QuadraticPiece(const data::SparseDataset& dataset,
                               std::vector<FeatureIndex> features)
    : n_features_(dataset.n_features()),
      features_(std::move(features)),
      labels_(dataset.labels().begin(), dataset.labels().end()) {
  for (const FeatureIndex j : features_) {
    if (j >= dataset.n_features()) throw std::invalid_argument("piece feature out of range");
    const auto r = dataset.row(j);
    samples_.insert(samples_.end(), r.samples.begin(), r.samples.end());
    values_.insert(values_.end(), r.values.begin(), r.values.end());
    row_ptr_.push_back(values_.size());
    const auto& s = dataset.stats(j);
    mean_.push_back(s.mean);
    norm_.push_back(s.centered_norm);
    inv_norm_.push_back(s.is_degenerate ? 0.0 : 1.0 / s.centered_norm);
  }
}

std::vector<double> QuadraticPiece::feature_weights(std::span<const double> alpha) const {
  double signed_sum = 0.0;
  for (std::size_t i = 0; i < labels_.size(); ++i) signed_sum += alpha[i] * labels_[i];
  std::vector<double> v(features_.size(), 0.0);
  for (std::size_t k = 0; k < features_.size(); ++k) {
    if (inv_norm_[k] == 0.0) continue;
    double acc = 0.0;
    for (std::size_t p = row_ptr_[k]; p < row_ptr_[k + 1]; ++p) {
      acc += values_[p] * alpha[samples_[p]] * labels_[samples_[p]];
    }
    v[k] = (acc - mean_[k] * signed_sum) * inv_norm_[k];
  }
  return v;
}

double QuadraticPiece::value(std::span<const double> alpha, double C) const {
  const auto v = feature_weights(alpha);
  double vv = 0.0;
  for (double x : v) vv += x * x;
  double aa = 0.0;
  for (double a : alpha) aa += a * a;
  return 0.5 * vv + aa / (2.0 * C);
}

double QuadraticPiece::value_and_gradient(std::span<const double> alpha, double C,
                                          std::span<double> gradient) const {
  const auto v = feature_weights(alpha);
  double vv = 0.0;
  double offset = 0.0;
  std::fill(gradient.begin(), gradient.end(), 0.0);
  for (std::size_t k = 0; k < features_.size(); ++k) {
    vv += v[k] * v[k];
    const double scale = v[k] * inv_norm_[k];
    if (scale == 0.0) continue;
    offset += scale * mean_[k];
    for (std::size_t p = row_ptr_[k]; p < row_ptr_[k + 1]; ++p) {
      gradient[samples_[p]] += scale * values_[p];
    }
  }
  double aa = 0.0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    gradient[i] = labels_[i] * (gradient[i] - offset) + alpha[i] / C;
    aa += alpha[i] * alpha[i];
  }
  return 0.5 * vv + aa / (2.0 * C);
}

PieceEvaluation eval_piece(const QuadraticPiece& piece, std::span<const double> alpha,
                           double C) {
  PieceEvaluation out;
  out.gradient.resize(piece.n_samples());
  out.value = piece.value_and_gradient(alpha, C, out.gradient);
  return out;
}

// ---------------------------------------------------------------------------
// Min-max solver

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

/// Log-sum-exp smoothing of max_t g_t with sharpness beta (beta = 0 means a
/// single piece). Writes the softmax weights to mu.
double smooth_max(const std::vector<double>& g, double beta, std::vector<double>& mu) {
  const double top = *std::max_element(g.begin(), g.end());
  mu.assign(g.size(), 0.0);
  if (g.size() == 1) {
    mu[0] = 1.0;
    return top;
  }
  double z = 0.0;
  for (std::size_t t = 0; t < g.size(); ++t) {
    mu[t] = std::exp(beta * (g[t] - top));
    z += mu[t];
  }
  for (double& w : mu) w /= z;
  return top + std::log(z) / beta;
}

struct Point {
  std::vector<double> alpha;
  std::vector<double> g;  // piece values
  std::vector<double> mu;
  double theta = 0.0;     // max_t g_t
  double smooth = 0.0;    // smoothed objective
  std::vector<double> grad;
  double certificate = std::numeric_limits<double>::infinity();
};

class MinMaxObjective {
 public:
  MinMaxObjective(std::span<const QuadraticPiece> pieces, double C)
      : pieces_(pieces), C_(C), grads_(pieces.size()) {}

  void values(Point& p, double beta) const {
    p.g.resize(pieces_.size());
    for (std::size_t t = 0; t < pieces_.size(); ++t) p.g[t] = pieces_[t].value(p.alpha, C_);
    p.theta = *std::max_element(p.g.begin(), p.g.end());
    p.smooth = smooth_max(p.g, beta, p.mu);
  }

  /// Values, gradient of the smoothed objective, and the optimality
  /// certificate (meaningful when alpha is in the simplex).
  void full(Point& p, double beta) {
    const std::size_t n = p.alpha.size();
    p.g.resize(pieces_.size());
    p.grad.assign(n, 0.0);
    if (pieces_.size() == 1) {
      p.g[0] = pieces_[0].value_and_gradient(p.alpha, C_, p.grad);
    } else {
      for (std::size_t t = 0; t < pieces_.size(); ++t) p.g[t] = pieces_[t].value(p.alpha, C_);
    }
    p.theta = *std::max_element(p.g.begin(), p.g.end());
    p.smooth = smooth_max(p.g, beta, p.mu);
    if (pieces_.size() == 1) {
      p.certificate = bound(p, p.mu, p.grad);
      return;
    }
    active_.clear();
    for (std::size_t t = 0; t < pieces_.size(); ++t) {
      // Weights this small cannot move the gradient at double precision.
      if (p.mu[t] < 1e-17) continue;
      active_.push_back(t);
      grads_[t].resize(n);
      pieces_[t].value_and_gradient(p.alpha, C_, grads_[t]);
      for (std::size_t i = 0; i < n; ++i) p.grad[i] += p.mu[t] * grads_[t][i];
    }
    p.certificate = bound(p, p.mu, p.grad);
    refit_multipliers(p);
  }

 private:
  /// theta - sum_t mu_t g_t + Frank-Wolfe gap of sum_t mu_t g_t. Bounds
  /// theta(alpha) - theta* for any mu in the simplex.
  static double bound(const Point& p, const std::vector<double>& mu,
                      const std::vector<double>& grad) {
    const double fw_gap = dot(grad, p.alpha) - *std::min_element(grad.begin(), grad.end());
    return (p.theta - dot(mu, p.g)) + std::max(fw_gap, 0.0);
  }

  /// Close to the optimum the softmax weights lag the exact multipliers by
  /// more than the objective can resolve. Fit mu on the active pieces so the
  /// weighted gradient is level on the support of alpha (least squares,
  /// weighted by alpha), and keep it if it certifies better.
  void refit_multipliers(Point& p) {
    const std::size_t a = active_.size();
    if (a < 2) return;
    const std::size_t n = p.alpha.size();
    // Unknowns: mu over active pieces except the last, and the level lambda.
    // The last weight is 1 - sum of the others.
    const std::size_t k = a;  // (a - 1) weights + lambda
    std::vector<double> ata(k * k, 0.0), atb(k, 0.0), row(k);
    const auto& last = grads_[active_.back()];
    for (std::size_t i = 0; i < n; ++i) {
      const double w = p.alpha[i];
      if (w <= 0.0) continue;
      for (std::size_t r = 0; r + 1 < a; ++r) row[r] = grads_[active_[r]][i] - last[i];
      row[a - 1] = -1.0;
      for (std::size_t r = 0; r < k; ++r) {
        atb[r] -= w * row[r] * last[i];
        for (std::size_t c = 0; c < k; ++c) ata[r * k + c] += w * row[r] * row[c];
      }
    }
    std::vector<double> sol;
    if (!solve_dense(ata, atb, k, sol)) return;

    std::vector<double> mu(p.mu.size(), 0.0);
    double rest = 1.0;
    for (std::size_t r = 0; r + 1 < a; ++r) {
      mu[active_[r]] = std::max(sol[r], 0.0);
      rest -= mu[active_[r]];
    }
    mu[active_.back()] = std::max(rest, 0.0);
    const double total = std::accumulate(mu.begin(), mu.end(), 0.0);
    if (!(total > 0.0)) return;
    for (double& m : mu) m /= total;

    std::vector<double> grad(n, 0.0);
    for (const std::size_t t : active_) {
      for (std::size_t i = 0; i < n; ++i) grad[i] += mu[t] * grads_[t][i];
    }
    const double c = bound(p, mu, grad);
    if (c < p.certificate) {
      p.certificate = c;
      p.mu = std::move(mu);
    }
  }

  /// Gaussian elimination with partial pivoting; false if singular.
  static bool solve_dense(std::vector<double> m, std::vector<double> b, std::size_t k,
                          std::vector<double>& x) {
    double scale = 0.0;
    for (double v : m) scale = std::max(scale, std::abs(v));
    if (!(scale > 0.0)) return false;
    for (std::size_t c = 0; c < k; ++c) {
      std::size_t piv = c;
      for (std::size_t r = c + 1; r < k; ++r) {
        if (std::abs(m[r * k + c]) > std::abs(m[piv * k + c])) piv = r;
      }
      if (std::abs(m[piv * k + c]) <= 1e-14 * scale) return false;
      if (piv != c) {
        for (std::size_t j = 0; j < k; ++j) std::swap(m[c * k + j], m[piv * k + j]);
        std::swap(b[c], b[piv]);
      }
      for (std::size_t r = c + 1; r < k; ++r) {
        const double f = m[r * k + c] / m[c * k + c];
        for (std::size_t j = c; j < k; ++j) m[r * k + j] -= f * m[c * k + j];
        b[r] -= f * b[c];
      }
    }
    x.assign(k, 0.0);
    for (std::size_t c = k; c-- > 0;) {
      double s = b[c];
      for (std::size_t j = c + 1; j < k; ++j) s -= m[c * k + j] * x[j];
      x[c] = s / m[c * k + c];
    }
    return true;
  }

 public:

 private:
  std::span<const QuadraticPiece> pieces_;
  double C_;
  std::vector<std::vector<double>> grads_;
  std::vector<std::size_t> active_;
};

bool in_simplex(const std::vector<double>& a) {
  return std::all_of(a.begin(), a.end(), [](double x) { return x >= 0.0; });
}

}  // namespace

MinMaxSolution solve_minmax(std::span<const QuadraticPiece> pieces,
                            std::optional<std::span<const double>> warm_start,
                            const MinMaxOptions& options) {
  if (pieces.empty()) throw std::invalid_argument("solve_minmax needs at least one piece");
  if (!(options.C > 0.0)) throw std::invalid_argument("C must be positive");
  if (!(options.eps_sub > 0.0)) throw std::invalid_argument("eps_sub must be positive");
  const std::size_t n = pieces.front().n_samples();
  for (const auto& piece : pieces) {
    if (piece.n_samples() != n) throw std::invalid_argument("pieces disagree on n_samples");
  }
  if (n == 0) throw std::invalid_argument("no samples");

  const std::size_t T = pieces.size();
  const double eps = options.eps_sub;
  MinMaxObjective objective(pieces, options.C);

  Point x;
  if (warm_start && warm_start->size() == n) {
    x.alpha = project_simplex(*warm_start);
  } else {
    if (warm_start && !warm_start->empty()) {
      throw std::invalid_argument("warm start length != n_samples");
    }
    x.alpha.assign(n, 1.0 / static_cast<double>(n));
  }

  // Residual smoothing bias at the smoothed optimum is at most (T-1)/(e beta);
  // the final sharpness also keeps mu_t below 1e-6 on pieces more than eps
  // under the max.
  const double beta_final =
      T == 1 ? 0.0 : std::max(20.0, 2.0 * static_cast<double>(T)) / eps;
  objective.values(x, 1.0);
  double beta = T == 1 ? 0.0 : std::min(beta_final, 10.0 / std::max(x.theta, 1e-300));
  objective.values(x, beta);

  MinMaxSolution sol;
  sol.objective_trace.push_back(x.smooth);

  auto finish = [&](Point& p) {
    sol.alpha = std::move(p.alpha);
    sol.theta = p.theta;
    sol.mu = p.mu;
    sol.piece_values = p.g;
    sol.kkt_residual = p.certificate;
    sol.objective_trace.push_back(p.theta);
    return sol;
  };

  if (n == 1) {
    objective.full(x, beta_final);
    return finish(x);
  }

  double L = 1.0 / options.C + 1.0;
  std::size_t iterations = 0;
  double last_certificate = std::numeric_limits<double>::infinity();

  for (;;) {
    const bool final_stage = T == 1 || beta >= beta_final;
    const double stage_tol = final_stage ? eps : std::max(eps, 1.0 / beta);

    objective.full(x, beta);
    last_certificate = x.certificate;
    if (x.certificate <= stage_tol) {
      if (final_stage) {
        sol.iterations = iterations;
        return finish(x);
      }
      beta = std::min(beta * 10.0, beta_final);
      continue;
    }

    Point y = x;
    std::vector<double> x_prev = x.alpha;
    double t = 1.0;
    Point z;
    bool stage_done = false;
    bool fresh = true;  // y's gradient is current
    while (!stage_done) {
      if (iterations >= options.max_iterations) {
        throw ConvergenceError("min-max solver hit the iteration cap", x.alpha, x.theta,
                               last_certificate);
      }
      ++iterations;

      if (!fresh) objective.full(y, beta);
      fresh = false;
      if (in_simplex(y.alpha)) {
        last_certificate = y.certificate;
        if (y.certificate <= stage_tol) {
          x = y;
          stage_done = true;
          break;
        }
      }

      // Backtracking projected step from y.
      std::vector<double> step(n);
      double decrease_bound = 0.0;
      for (;;) {
        for (std::size_t i = 0; i < n; ++i) step[i] = y.alpha[i] - y.grad[i] / L;
        z.alpha = project_simplex(step);
        objective.values(z, beta);
        double gd = 0.0, dd = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
          const double d = z.alpha[i] - y.alpha[i];
          gd += y.grad[i] * d;
          dd += d * d;
        }
        decrease_bound = y.smooth + gd + 0.5 * L * dd;
        if (z.smooth <= decrease_bound + 1e-13 * std::abs(y.smooth) || dd == 0.0) break;
        L *= 2.0;
      }

      const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
      if (z.smooth < x.smooth) {
        x_prev = x.alpha;
        x.alpha = z.alpha;
        x.g = z.g;
        x.mu = z.mu;
        x.theta = z.theta;
        x.smooth = z.smooth;
        sol.objective_trace.push_back(x.smooth);
        // Monotone FISTA extrapolation.
        const double a = (t - 1.0) / t_next;
        for (std::size_t i = 0; i < n; ++i) {
          y.alpha[i] = x.alpha[i] + a * (x.alpha[i] - x_prev[i]);
        }
        t = t_next;
      } else {
        // No progress from the extrapolated point: restart momentum at x.
        x_prev = x.alpha;
        y.alpha = x.alpha;
        t = 1.0;
        if (z.alpha == x.alpha || std::abs(z.smooth - x.smooth) <= 1e-16 * std::abs(x.smooth)) {
          // Stalled at machine precision; check x directly.
          objective.full(x, beta);
          last_certificate = x.certificate;
          if (x.certificate <= stage_tol || !final_stage) {
            stage_done = true;
            break;
          }
          throw ConvergenceError("min-max solver stalled above tolerance", x.alpha, x.theta,
                                 x.certificate);
        }
      }
      L = std::max(L * 0.9, 1e-12);
    }

    if (final_stage) {
      objective.full(x, beta);
      if (x.certificate <= eps) {
        sol.iterations = iterations;
        return finish(x);
      }
      // Certificate at y held but x re-evaluates differently only through
      // rounding; loop again from x.
      continue;
    }
    beta = std::min(beta * 10.0, beta_final);
  }
}

// ---------------------------------------------------------------------------
// SVM recovery and prediction

SvmModel recover_svm(const QuadraticPiece& piece, std::span<const double> alpha, double C) {
  if (alpha.size() != piece.n_samples()) throw std::invalid_argument("alpha length mismatch");
  SvmModel m;
  m.n_features = piece.n_features();
  m.features.assign(piece.features().begin(), piece.features().end());
  m.means.assign(piece.means().begin(), piece.means().end());
  m.norms.assign(piece.norms().begin(), piece.norms().end());
  m.weights = piece.feature_weights(alpha);

  std::vector<double> grad(piece.n_samples());
  piece.value_and_gradient(alpha, C, grad);
  // grad_i = y_i w'x_i + alpha_i / C.
  m.gamma = *std::min_element(grad.begin(), grad.end());
  double ww = 0.0, aa = 0.0;
  for (double w : m.weights) ww += w * w;
  for (double a : alpha) aa += a * a;
  m.primal_objective = 0.5 * ww - m.gamma + aa / (2.0 * C);
  return m;
}

std::vector<double> decision_values(const SvmModel& model, const data::SparseDataset& dataset) {
  if (dataset.n_features() != model.n_features) {
    throw DataError("feature dimension mismatch: model has " + std::to_string(model.n_features) +
                    ", data has " + std::to_string(dataset.n_features()));
  }
  std::vector<double> out(dataset.n_samples(), 0.0);
  double offset = 0.0;
  for (std::size_t k = 0; k < model.features.size(); ++k) {
    if (model.norms[k] <= 0.0 || model.weights[k] == 0.0) continue;
    const double scale = model.weights[k] / model.norms[k];
    offset += scale * model.means[k];
    const auto r = dataset.row(model.features[k]);
    for (std::size_t p = 0; p < r.size(); ++p) out[r.samples[p]] += scale * r.values[p];
  }
  for (double& d : out) d -= offset;
  return out;
}

}  // namespace gdm::solver
