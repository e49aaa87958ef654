#pragma once

// Mixture of level inverse Gaussians with the variability pinned to the
// level statistics, fitted by EM. Only the weights and the location
// parameters theta are estimated, so a k-component model has 2k - 1 free
// parameters.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rtig/rig.hpp"
#include "rtig/taskset.hpp"

namespace rtig {

struct EmConfig {
  double epsilon = 1e-8;  ///< Aitken tolerance on the extrapolated log-likelihood
  std::size_t max_iter = 1000;
  std::size_t k_max = 10;
  std::size_t kmeans_restarts = 10;
  std::size_t newton_max_iter = 50;
  double newton_tol = 1e-10;
  std::uint64_t seed = 0;
};

/// Statistics of the level whose IG components describe a task's response
/// times. The task at priority i uses level i - 1.
struct LevelContext {
  std::size_t level = 0;
  double u = 0.0;
  double lambda = 0.0;
};

/// Level context for the task at `priority` (uses level priority - 1).
LevelContext level_context_for_task(const TaskSet& ts, std::size_t priority);

struct RigMixtureModel {
  std::string task_id;
  std::size_t level = 0;
  double u = 0.0;
  double lambda = 0.0;
  std::vector<double> weights;
  std::vector<double> thetas;
  double loglik = 0.0;
  double bic = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Observed log-likelihood after every E-step (not serialized).
  std::vector<double> loglik_trace;

  std::size_t k() const noexcept { return thetas.size(); }
  LevelParam component(std::size_t k) const { return {u, lambda, thetas[k]}; }
  double logpdf(double x) const;
  double pdf(double x) const;
  double cdf(double x) const;
};

/// Throws ValidationError unless weights form a simplex and thetas are positive.
void validate_model(const RigMixtureModel& model);

/// Row-major n x k posterior membership probabilities.
class Responsibilities {
 public:
  Responsibilities() = default;
  Responsibilities(std::size_t n, std::size_t k) : n_(n), k_(k), z_(n * k, 0.0) {}

  std::size_t rows() const noexcept { return n_; }
  std::size_t cols() const noexcept { return k_; }
  double& operator()(std::size_t j, std::size_t k) { return z_[j * k_ + k]; }
  double operator()(std::size_t j, std::size_t k) const { return z_[j * k_ + k]; }
  std::span<const double> row(std::size_t j) const { return {z_.data() + j * k_, k_}; }
  std::vector<double> column(std::size_t k) const;

 private:
  std::size_t n_ = 0;
  std::size_t k_ = 0;
  std::vector<double> z_;
};

/// Exact maximum-likelihood theta of a single level component with the
/// variability held fixed:
///   xi = (W + sqrt(W^2 + 4 W H lambda)) / (2 H),  theta = (1 - u) xi,
/// with W = sum w_j and H = sum w_j / r_j. For lambda = 0 this is
/// (1 - u) times the harmonic mean.
double closed_form_theta(std::span<const double> sample, double u, double lambda);
double closed_form_theta(std::span<const double> sample, std::span<const double> weights,
                         double u, double lambda);

/// (1 - u) sqrt(Rbar (Rbar + 3 lambda)): the theta whose component mode
/// equals the (weighted) sample mean. Used as the Newton starting point.
double mode_matched_theta(std::span<const double> sample, double u, double lambda);
double mode_matched_theta(std::span<const double> sample, std::span<const double> weights,
                          double u, double lambda);

struct EStep {
  Responsibilities z;
  double loglik = 0.0;
};

/// Posterior memberships, computed in log space with max subtraction.
Responsibilities e_step(std::span<const double> sample, const RigMixtureModel& model);
EStep e_step_with_loglik(std::span<const double> sample, const RigMixtureModel& model);

std::vector<double> m_step_weights(const Responsibilities& z);

/// Root of the weighted score sum_j z_j d/dtheta log psi(r_j; theta),
/// found by safeguarded Newton in log theta with bisection fallback.
double m_step_theta(std::span<const double> sample, std::span<const double> z_column, double u,
                    double lambda, const EmConfig& cfg);

double log_likelihood(std::span<const double> sample, const RigMixtureModel& model);

/// 2 loglik - (2k - 1) log n.
double bic_score(double loglik, std::size_t k, std::size_t n);

struct AitkenResult {
  bool converged = false;
  std::optional<double> l_inf;  ///< extrapolated limit; the previous one when a >= 1
};

/// Aitken stopping rule on three consecutive log-likelihood values.
/// `previous_l_inf` is the extrapolation returned for the preceding triple.
AitkenResult aitken_converged(double l0, double l1, double l2, double epsilon,
                              std::optional<double> previous_l_inf = std::nullopt);

/// 1-D Lloyd k-means, quantile seeded, best inertia over `restarts` runs.
RigMixtureModel kmeans_init(std::span<const double> sample, std::size_t k, std::size_t restarts,
                            std::uint64_t seed, const LevelContext& ctx);

RigMixtureModel fit_mixture(std::span<const double> sample, const LevelContext& ctx,
                            std::size_t k, const EmConfig& cfg);

struct KCandidate {
  std::size_t k = 0;
  std::optional<RigMixtureModel> model;
  std::string diagnostic;  ///< failure reason when model is empty
};

struct Selection {
  RigMixtureModel best;
  std::vector<KCandidate> candidates;
};

/// Fits k = 1..k_max and keeps the BIC maximizer; ties go to the smaller k.
Selection select_k(std::span<const double> sample, const LevelContext& ctx, const EmConfig& cfg);

}  // namespace rtig
