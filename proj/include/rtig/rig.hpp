#pragma once

// Inverse Gaussian kernel in the classic (mean, shape) form and in the
// mode/variability form used for response times.
//
// Density convention: the exponent is negative,
//   psi(x; xi, delta) = sqrt(delta / (2 pi x^3)) exp(-delta (x - xi)^2 / (2 x xi^2)),
// which is the only sign for which the density normalizes.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace rtig {

/// Classic parameters: mean xi > 0 and shape delta > 0.
struct ClassicParams {
  double mean = 1.0;
  double shape = 1.0;
};

/// Mode mu > 0 and variability lambda = xi^2 / delta >= 0.
struct RigParams {
  double mu = 1.0;
  double lambda = 1.0;

  /// sqrt(mu (3 lambda + mu)), the distribution mean.
  double mean() const;
};

RigParams to_rig(ClassicParams p);
/// Requires lambda > 0.
ClassicParams to_classic(RigParams p);

/// Component of a response-time level: mean theta / (1 - u), variability lambda.
struct LevelParam {
  double u = 0.0;
  double lambda = 0.0;
  double theta = 1.0;

  double mean() const { return theta / (1.0 - u); }
  double mode() const;
  RigParams rig() const { return {mode(), lambda}; }
};

double rig_pdf(double x, RigParams p);
/// Never NaN for x > 0; -infinity for x <= 0.
double rig_logpdf(double x, RigParams p);
double dlogpdf_dmu(double x, RigParams p);
/// sum_j w_j dlogpdf_dmu(r_j) written through the two sufficient
/// statistics weight_sum = sum w_j and inverse_sum = sum w_j / r_j (the
/// derivative is affine in 1/x).
double dlogpdf_dmu_weighted(double weight_sum, double inverse_sum, RigParams p);

double mode_from_theta(double theta, double u, double lambda);
double dmode_dtheta(double theta, double u, double lambda);

double level_pdf(double x, const LevelParam& lp);
double level_logpdf(double x, const LevelParam& lp);

/// (x - theta/(1-u))^2 / (lambda x); chi-squared with one degree of freedom
/// when x follows the level distribution.
double chi2_stat(double x, double theta, double u, double lambda);
double chi2_cdf_1df(double x);
double chi2_quantile_1df(double p);

/// Inverse Gaussian CDF. A zero-variability level is a point mass at its mean.
double ig_cdf(double x, const LevelParam& lp);

/// Michael-Schucany-Haas transform sampler, one normal and one uniform draw
/// per variate.
class IgSampler {
 public:
  IgSampler(double mean, double lambda, std::uint64_t seed);
  explicit IgSampler(const LevelParam& lp, std::uint64_t seed)
      : IgSampler(lp.mean(), lp.lambda, seed) {}

  double operator()();

  /// One draw using an external generator.
  template <class Urbg>
  static double draw(double mean, double lambda, Urbg& gen) {
    if (lambda == 0.0) return mean;
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    const double z = normal(gen);
    const double y = z * z;
    const double ly = lambda * y;
    const double x = mean + 0.5 * ly - 0.5 * std::sqrt(ly * (4.0 * mean + ly));
    return unif(gen) <= mean / (mean + x) ? x : mean * mean / x;
  }

 private:
  double mean_;
  double lambda_;
  std::mt19937_64 gen_;
};

std::vector<double> sample_ig(const LevelParam& lp, std::size_t n, std::uint64_t seed);

}  // namespace rtig
