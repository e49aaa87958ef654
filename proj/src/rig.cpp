#include "rtig/rig.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <limits>
#include <numbers>

#include "rtig/error.hpp"
#include "rtig/numeric.hpp"

namespace rtig {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_rig(RigParams p) {
  if (!(p.mu > 0.0) || !std::isfinite(p.mu)) throw ValidationError("rIG mode must be > 0");
  if (!(p.lambda >= 0.0) || !std::isfinite(p.lambda))
    throw ValidationError("rIG variability must be >= 0");
  if (p.lambda == 0.0)
    throw DegenerateError("degenerate distribution: zero variability is a point mass");
}

void check_level(double u, double lambda) {
  if (!(u >= 0.0 && u < 1.0)) throw ValidationError("level utilization must lie in [0, 1)");
  if (!(lambda >= 0.0)) throw ValidationError("level variability must be >= 0");
}

}  // namespace

double RigParams::mean() const { return std::sqrt(mu * (3.0 * lambda + mu)); }

RigParams to_rig(ClassicParams p) {
  if (!(p.mean > 0.0) || !(p.shape > 0.0))
    throw ValidationError("classic IG parameters must be positive");
  const double lambda = p.mean * p.mean / p.shape;
  return {mode_from_theta(p.mean, 0.0, lambda), lambda};
}

ClassicParams to_classic(RigParams p) {
  check_rig(p);
  const double q = p.mu * (3.0 * p.lambda + p.mu);
  return {std::sqrt(q), q / p.lambda};
}

double LevelParam::mode() const { return mode_from_theta(theta, u, lambda); }

double rig_logpdf(double x, RigParams p) {
  check_rig(p);
  if (!(x > 0.0)) return -kInf;
  const double q = p.mu * (3.0 * p.lambda + p.mu);
  const double dev = x - std::sqrt(q);
  return 0.5 * (std::log(q) - std::log(2.0 * std::numbers::pi * p.lambda) - 3.0 * std::log(x)) -
         dev * dev / (2.0 * p.lambda * x);
}

double rig_pdf(double x, RigParams p) {
  const double lp = rig_logpdf(x, p);
  return lp == -kInf ? 0.0 : std::exp(lp);
}

double dlogpdf_dmu(double x, RigParams p) {
  if (!(x > 0.0)) throw ValidationError("dlogpdf_dmu needs x > 0");
  return dlogpdf_dmu_weighted(1.0, 1.0 / x, p);
}

double dlogpdf_dmu_weighted(double weight_sum, double inverse_sum, RigParams p) {
  check_rig(p);
  const double mu = p.mu;
  const double lam = p.lambda;
  const double s = 3.0 * lam + mu;
  const double constant = 1.0 / s + 3.0 * lam / (2.0 * mu * s) +
                          std::sqrt(mu) / (2.0 * lam * std::sqrt(s)) +
                          std::sqrt(s) / (2.0 * lam * std::sqrt(mu));
  const double inverse_coef = -1.5 - mu / lam;
  return weight_sum * constant + inverse_sum * inverse_coef;
}

double mode_from_theta(double theta, double u, double lambda) {
  check_level(u, lambda);
  if (!(theta >= 0.0)) throw ValidationError("theta must be >= 0");
  const double mean = theta / (1.0 - u);
  const double half = 1.5 * lambda;
  // sqrt(mean^2 + half^2) - half, rationalized to avoid cancellation.
  const double root = std::hypot(mean, half);
  if (root == 0.0) return 0.0;
  return mean * mean / (root + half);
}

double dmode_dtheta(double theta, double u, double lambda) {
  check_level(u, lambda);
  if (!(theta > 0.0)) throw ValidationError("theta must be > 0");
  const double slack = 1.0 - u;
  const double mean = theta / slack;
  return (theta / (slack * slack)) / std::hypot(mean, 1.5 * lambda);
}

double level_logpdf(double x, const LevelParam& lp) {
  check_level(lp.u, lp.lambda);
  if (!(lp.theta > 0.0)) throw ValidationError("theta must be > 0");
  return rig_logpdf(x, lp.rig());
}

double level_pdf(double x, const LevelParam& lp) {
  const double l = level_logpdf(x, lp);
  return l == -kInf ? 0.0 : std::exp(l);
}

double chi2_stat(double x, double theta, double u, double lambda) {
  check_level(u, lambda);
  if (!(x > 0.0)) throw ValidationError("chi2_stat needs x > 0");
  if (!(lambda > 0.0)) throw DegenerateError("chi2_stat needs lambda > 0");
  const double dev = x - theta / (1.0 - u);
  return dev * dev / (lambda * x);
}

double chi2_cdf_1df(double x) {
  if (!(x > 0.0)) return 0.0;
  if (x == kInf) return 1.0;
  return std::erf(std::sqrt(0.5 * x));
}

double chi2_quantile_1df(double p) {
  if (!(p >= 0.0 && p < 1.0)) throw ValidationError("chi2 quantile needs p in [0, 1)");
  if (p == 0.0) return 0.0;
  return boost::math::quantile(boost::math::chi_squared_distribution<double>(1.0), p);
}

double ig_cdf(double x, const LevelParam& lp) {
  check_level(lp.u, lp.lambda);
  if (!(lp.theta > 0.0)) throw ValidationError("theta must be > 0");
  if (!(x > 0.0)) return 0.0;
  if (x == kInf) return 1.0;
  const double mean = lp.mean();
  if (lp.lambda == 0.0) return x >= mean ? 1.0 : 0.0;
  const double scale = std::sqrt(lp.lambda * x);
  const double a = (x - mean) / scale;
  const double b = (x + mean) / scale;
  // exp(2 mean / lambda) Phi(-b), combined in log space
  const double tail =
      0.5 * std::exp(2.0 * mean / lp.lambda + log_erfc(b / std::numbers::sqrt2));
  return std::min(1.0, normal_cdf(a) + tail);
}

IgSampler::IgSampler(double mean, double lambda, std::uint64_t seed)
    : mean_(mean), lambda_(lambda), gen_(seed) {
  if (!(mean > 0.0)) throw ValidationError("IG sampler needs mean > 0");
  if (!(lambda >= 0.0)) throw ValidationError("IG sampler needs lambda >= 0");
}

double IgSampler::operator()() { return draw(mean_, lambda_, gen_); }

std::vector<double> sample_ig(const LevelParam& lp, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw ValidationError("sample_ig needs n >= 1");
  check_level(lp.u, lp.lambda);
  IgSampler sampler(lp, seed);
  std::vector<double> out(n);
  for (double& x : out) x = sampler();
  return out;
}

}  // namespace rtig
