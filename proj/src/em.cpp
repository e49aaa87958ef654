#include "rtig/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include <Eigen/Core>

#include "rtig/error.hpp"
#include "rtig/numeric.hpp"

namespace rtig {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_sample(std::span<const double> sample) {
  if (sample.empty()) throw ValidationError("empty sample");
  for (double r : sample)
    if (!(r > 0.0) || !std::isfinite(r))
      throw ValidationError("response times must be positive and finite");
}

void check_weights(std::span<const double> sample, std::span<const double> weights) {
  if (weights.size() != sample.size())
    throw ValidationError("weights and sample differ in length");
}

// Sufficient statistics of the fixed-variability likelihood in theta.
struct WeightedSums {
  double weight = 0.0;   // sum w_j
  double inverse = 0.0;  // sum w_j / r_j
  double linear = 0.0;   // sum w_j r_j
};

WeightedSums weighted_sums(std::span<const double> sample, std::span<const double> weights) {
  WeightedSums s;
  for (std::size_t j = 0; j < sample.size(); ++j) {
    const double w = weights.empty() ? 1.0 : weights[j];
    if (w == 0.0) continue;
    if (!(w > 0.0)) throw ValidationError("weights must be nonnegative");
    s.weight += w;
    s.inverse += w / sample[j];
    s.linear += w * sample[j];
  }
  return s;
}

double closed_form_from_sums(const WeightedSums& s, double u, double lambda) {
  if (!(s.weight > 0.0)) throw ValidationError("closed form needs positive total weight");
  if (!(u < 1.0)) throw ValidationError("closed form needs u < 1");
  const double w = s.weight;
  const double h = s.inverse;
  const double xi = (w + std::sqrt(w * w + 4.0 * w * h * lambda)) / (2.0 * h);
  return (1.0 - u) * xi;
}

double mode_matched_from_sums(const WeightedSums& s, double u, double lambda) {
  if (!(s.weight > 0.0)) throw ValidationError("empty sample");
  if (!(u < 1.0)) throw ValidationError("needs u < 1");
  const double mean = s.linear / s.weight;
  return (1.0 - u) * std::sqrt(mean * (mean + 3.0 * lambda));
}

// Per-component constants of log psi(x; theta):
//   0.5 (log q - log(2 pi lambda)) - 1.5 log x - (x - xi)^2 / (2 lambda x)
struct ComponentKernel {
  double xi;
  double log_norm;
};

ComponentKernel component_kernel(const LevelParam& lp) {
  const RigParams p = lp.rig();
  const double q = p.mu * (3.0 * p.lambda + p.mu);
  return {std::sqrt(q), 0.5 * (std::log(q) - std::log(2.0 * std::numbers::pi * p.lambda))};
}

struct KMeansResult {
  std::vector<double> centers;
  std::vector<std::size_t> labels;  // per sorted observation
  double inertia = kInf;
};

// Lloyd iterations on sorted data: with sorted centers every cluster is a
// contiguous run bounded by center midpoints, so one pass costs O(k log n).
KMeansResult lloyd(const std::vector<double>& xs, std::vector<double> centers) {
  const std::size_t n = xs.size();
  const std::size_t k = centers.size();
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t j = 0; j < n; ++j) prefix[j + 1] = prefix[j] + xs[j];
  // cluster c owns xs[bounds[c], bounds[c + 1])
  std::vector<std::size_t> bounds(k + 1, 0);
  std::vector<std::size_t> previous;
  for (int iter = 0; iter < 300; ++iter) {
    std::sort(centers.begin(), centers.end());
    bounds[0] = 0;
    bounds[k] = n;
    for (std::size_t c = 1; c < k; ++c) {
      const double mid = 0.5 * (centers[c - 1] + centers[c]);
      // ties go to the lower center
      bounds[c] = static_cast<std::size_t>(
          std::upper_bound(xs.begin(), xs.end(), mid) - xs.begin());
      bounds[c] = std::max(bounds[c], bounds[c - 1]);
    }
    bool changed = bounds != previous;
    previous = bounds;
    std::size_t empty = k;
    for (std::size_t c = 0; c < k; ++c) {
      const std::size_t count = bounds[c + 1] - bounds[c];
      if (count == 0) empty = c;
      else centers[c] = (prefix[bounds[c + 1]] - prefix[bounds[c]]) / static_cast<double>(count);
    }
    if (empty != k) {
      // reseed at the observation farthest from its center (a run endpoint)
      double far_d = -1.0;
      double far_x = xs[0];
      for (std::size_t c = 0; c < k; ++c) {
        if (bounds[c + 1] == bounds[c]) continue;
        for (const std::size_t j : {bounds[c], bounds[c + 1] - 1}) {
          const double d = std::abs(xs[j] - centers[c]);
          if (d > far_d) {
            far_d = d;
            far_x = xs[j];
          }
        }
      }
      centers[empty] = far_x;
      changed = true;
    }
    if (!changed) break;
  }
  std::vector<std::size_t> labels(n);
  for (std::size_t c = 0; c < k; ++c)
    std::fill(labels.begin() + static_cast<std::ptrdiff_t>(bounds[c]),
              labels.begin() + static_cast<std::ptrdiff_t>(bounds[c + 1]), c);
  KMeansResult res;
  res.inertia = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double d = xs[j] - centers[labels[j]];
    res.inertia += d * d;
  }
  res.centers = std::move(centers);
  res.labels = std::move(labels);
  return res;
}

}  // namespace

LevelContext level_context_for_task(const TaskSet& ts, std::size_t priority) {
  if (priority < 1 || priority > ts.size())
    throw ValidationError("priority " + std::to_string(priority) + " out of range");
  const std::size_t level = priority - 1;
  const auto& lambda = ts.levels().lambda[level];
  if (!lambda) throw ValidationError("overloaded level: utilization of level " +
                                     std::to_string(level) + " is >= 1");
  return {level, ts.levels().u[level], *lambda};
}

double RigMixtureModel::logpdf(double x) const {
  if (!(x > 0.0)) return -kInf;
  double m = -kInf;
  std::vector<double> terms(k());
  for (std::size_t c = 0; c < k(); ++c) {
    terms[c] = weights[c] > 0.0 ? std::log(weights[c]) + level_logpdf(x, component(c)) : -kInf;
    m = std::max(m, terms[c]);
  }
  if (m == -kInf) return -kInf;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - m);
  return m + std::log(s);
}

double RigMixtureModel::pdf(double x) const {
  const double l = logpdf(x);
  return l == -kInf ? 0.0 : std::exp(l);
}

double RigMixtureModel::cdf(double x) const {
  double f = 0.0;
  for (std::size_t c = 0; c < k(); ++c) f += weights[c] * ig_cdf(x, component(c));
  return std::min(1.0, f);
}

void validate_model(const RigMixtureModel& model) {
  if (model.k() == 0 || model.weights.size() != model.thetas.size())
    throw ValidationError("model needs k >= 1 matching weights and thetas");
  double total = 0.0;
  for (double w : model.weights) {
    if (!(w >= 0.0)) throw ValidationError("model weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-10) throw ValidationError("model weights must sum to 1");
  for (double t : model.thetas)
    if (!(t > 0.0) || !std::isfinite(t)) throw ValidationError("model thetas must be positive");
  if (!(model.u >= 0.0 && model.u < 1.0)) throw ValidationError("model u must lie in [0, 1)");
  if (!(model.lambda >= 0.0)) throw ValidationError("model lambda must be >= 0");
}

std::vector<double> Responsibilities::column(std::size_t k) const {
  std::vector<double> out(n_);
  for (std::size_t j = 0; j < n_; ++j) out[j] = z_[j * k_ + k];
  return out;
}

double closed_form_theta(std::span<const double> sample, double u, double lambda) {
  check_sample(sample);
  return closed_form_from_sums(weighted_sums(sample, {}), u, lambda);
}

double closed_form_theta(std::span<const double> sample, std::span<const double> weights,
                         double u, double lambda) {
  check_sample(sample);
  check_weights(sample, weights);
  return closed_form_from_sums(weighted_sums(sample, weights), u, lambda);
}

double mode_matched_theta(std::span<const double> sample, double u, double lambda) {
  check_sample(sample);
  return mode_matched_from_sums(weighted_sums(sample, {}), u, lambda);
}

double mode_matched_theta(std::span<const double> sample, std::span<const double> weights,
                          double u, double lambda) {
  check_sample(sample);
  check_weights(sample, weights);
  return mode_matched_from_sums(weighted_sums(sample, weights), u, lambda);
}

EStep e_step_with_loglik(std::span<const double> sample, const RigMixtureModel& model) {
  validate_model(model);
  if (!(model.lambda > 0.0))
    throw DegenerateError("level has zero variability; response time equals execution time");
  const std::size_t n = sample.size();
  const std::size_t k = model.k();

  std::vector<ComponentKernel> kernels(k);
  std::vector<double> log_weights(k);
  for (std::size_t c = 0; c < k; ++c) {
    kernels[c] = component_kernel(model.component(c));
    log_weights[c] = model.weights[c] > 0.0 ? std::log(model.weights[c]) : -kInf;
  }

  EStep out{Responsibilities(n, k), 0.0};
  std::vector<double> terms(k);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = sample[j];
    if (!(x > 0.0))
      throw ValidationError("observation outside model support: " + format_double(x));
    const double base = -1.5 * std::log(x);
    const double scale = 1.0 / (2.0 * model.lambda * x);
    double m = -kInf;
    for (std::size_t c = 0; c < k; ++c) {
      const double dev = x - kernels[c].xi;
      terms[c] = log_weights[c] + kernels[c].log_norm + base - dev * dev * scale;
      m = std::max(m, terms[c]);
    }
    if (m == -kInf)
      throw ValidationError("observation outside model support: " + format_double(x));
    double s = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      terms[c] = std::exp(terms[c] - m);
      s += terms[c];
    }
    for (std::size_t c = 0; c < k; ++c) out.z(j, c) = terms[c] / s;
    out.loglik += m + std::log(s);
  }
  return out;
}

Responsibilities e_step(std::span<const double> sample, const RigMixtureModel& model) {
  return e_step_with_loglik(sample, model).z;
}

std::vector<double> m_step_weights(const Responsibilities& z) {
  const std::size_t n = z.rows();
  if (n == 0) throw ValidationError("empty responsibilities");
  std::vector<double> pi(z.cols(), 0.0);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t c = 0; c < z.cols(); ++c) pi[c] += z(j, c);
  for (double& p : pi) p /= static_cast<double>(n);
  return pi;
}

namespace {

double solve_theta(const WeightedSums& sums, std::size_t n, double u, double lambda,
                   const EmConfig& cfg) {
  if (!(sums.weight > 0.0)) throw ValidationError("component has zero total responsibility");
  const double tol = cfg.newton_tol * static_cast<double>(n);
  auto score = [&](double theta) {
    const double mode = mode_from_theta(theta, u, lambda);
    return dmode_dtheta(theta, u, lambda) *
           dlogpdf_dmu_weighted(sums.weight, sums.inverse, {mode, lambda});
  };
  // Newton runs on g(s) = theta * score(theta), s = log theta; the score
  // is positive below the root and negative above it.
  auto g = [&](double s) {
    const double theta = std::exp(s);
    return theta * score(theta);
  };

  const double theta0 = mode_matched_from_sums(sums, u, lambda);
  const double s0 = std::log(theta0);
  double s = s0;
  double gs = g(s);
  if (std::abs(gs / theta0) < tol) return theta0;

  // bracket [lo, hi] with g(lo) > 0 > g(hi)
  const double max_span = std::log(1e6);
  double lo = s0;
  double hi = s0;
  double glo = gs;
  double ghi = gs;
  if (gs > 0.0) {
    double step = std::log(2.0);
    while (ghi > 0.0) {
      if (hi - s0 >= max_span)
        throw NumericError("score has no root: score(theta0)=" + format_double(gs / theta0) +
                           ", score(theta0*1e6)=" + format_double(ghi / std::exp(hi)));
      hi = std::min(s0 + max_span, hi + step);
      ghi = g(hi);
      step *= 2.0;
    }
  } else {
    double step = std::log(2.0);
    while (glo < 0.0) {
      if (s0 - lo >= max_span)
        throw NumericError("score has no root: score(theta0/1e6)=" +
                           format_double(glo / std::exp(lo)) +
                           ", score(theta0)=" + format_double(gs / theta0));
      lo = std::max(s0 - max_span, lo - step);
      glo = g(lo);
      step *= 2.0;
    }
  }
  if (ghi == 0.0) return std::exp(hi);
  if (glo == 0.0) return std::exp(lo);

  s = gs > 0.0 ? lo : hi;
  gs = gs > 0.0 ? glo : ghi;
  for (std::size_t it = 0; it < cfg.newton_max_iter; ++it) {
    const double h = 1e-6;
    const double slope = (g(s + h) - g(s - h)) / (2.0 * h);
    double next = s - gs / slope;
    if (!(slope < 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - s);
    s = next;
    gs = g(s);
    if (gs > 0.0) lo = s;
    else hi = s;
    if (std::abs(gs / std::exp(s)) < tol || hi - lo < 1e-12 || step < 1e-14) break;
  }
  return std::exp(s);
}

// Per-observation terms that do not change across EM iterations.
struct SampleTerms {
  Eigen::ArrayXd x;
  Eigen::ArrayXd inv_x;
  Eigen::ArrayXd log_base;  // -1.5 log x
  Eigen::ArrayXd scale;     // 1 / (2 lambda x)
};

SampleTerms sample_terms(std::span<const double> sample, double lambda) {
  SampleTerms t;
  t.x = Eigen::Map<const Eigen::ArrayXd>(sample.data(), static_cast<Eigen::Index>(sample.size()));
  t.inv_x = t.x.inverse();
  t.log_base = -1.5 * t.x.log();
  t.scale = t.inv_x / (2.0 * lambda);
  return t;
}

// One pass of the E-step that keeps only what the M-step consumes: the
// observed log-likelihood and per-component sums of z, z / r and z r.
struct FusedStep {
  double loglik = 0.0;
  std::vector<WeightedSums> sums;
};

FusedStep fused_step(const SampleTerms& t, const RigMixtureModel& model) {
  const auto k = static_cast<Eigen::Index>(model.k());
  Eigen::ArrayXXd terms(t.x.size(), k);
  for (Eigen::Index c = 0; c < k; ++c) {
    const ComponentKernel kc = component_kernel(model.component(static_cast<std::size_t>(c)));
    const double w = model.weights[static_cast<std::size_t>(c)];
    const double offset = (w > 0.0 ? std::log(w) : -kInf) + kc.log_norm;
    terms.col(c) = offset + t.log_base - (t.x - kc.xi).square() * t.scale;
  }
  const Eigen::ArrayXd m = terms.rowwise().maxCoeff();
  if (!(m > -kInf).all()) {
    Eigen::Index j = 0;
    (m > -kInf).minCoeff(&j);
    throw ValidationError("observation outside model support: " + format_double(t.x(j)));
  }
  terms = (terms.colwise() - m).exp();
  const Eigen::ArrayXd total = terms.rowwise().sum();
  terms.colwise() /= total;
  // sum_j log total_j as the log of a running product, renormalized by
  // frexp; every total lies in [1, k].
  double mantissa = 1.0;
  long exponent = 0;
  for (Eigen::Index j = 0; j < total.size(); ++j) {
    mantissa *= total(j);
    if (mantissa > 1e280) {
      int e = 0;
      mantissa = std::frexp(mantissa, &e);
      exponent += e;
    }
  }
  const double log_total = std::log(mantissa) + static_cast<double>(exponent) * std::numbers::ln2;
  FusedStep out{m.sum() + log_total, std::vector<WeightedSums>(model.k())};
  for (Eigen::Index c = 0; c < k; ++c) {
    WeightedSums& s = out.sums[static_cast<std::size_t>(c)];
    s.weight = terms.col(c).sum();
    s.inverse = (terms.col(c) * t.inv_x).sum();
    s.linear = (terms.col(c) * t.x).sum();
  }
  return out;
}

}  // namespace

double m_step_theta(std::span<const double> sample, std::span<const double> z_column, double u,
                    double lambda, const EmConfig& cfg) {
  check_sample(sample);
  check_weights(sample, z_column);
  if (!(lambda > 0.0))
    throw DegenerateError("level has zero variability; response time equals execution time");
  return solve_theta(weighted_sums(sample, z_column), sample.size(), u, lambda, cfg);
}

double log_likelihood(std::span<const double> sample, const RigMixtureModel& model) {
  return e_step_with_loglik(sample, model).loglik;
}

double bic_score(double loglik, std::size_t k, std::size_t n) {
  return 2.0 * loglik - (2.0 * static_cast<double>(k) - 1.0) * std::log(static_cast<double>(n));
}

AitkenResult aitken_converged(double l0, double l1, double l2, double epsilon,
                              std::optional<double> previous_l_inf) {
  const double d1 = l1 - l0;
  if (std::abs(d1) < 10.0 * std::numeric_limits<double>::epsilon() * std::abs(l1))
    return {true, l2};
  const double a = (l2 - l1) / d1;
  if (!(a < 1.0)) return {false, previous_l_inf};
  const double l_inf = l1 + (l2 - l1) / (1.0 - a);
  const bool converged = previous_l_inf && std::abs(l_inf - *previous_l_inf) < epsilon;
  return {converged, l_inf};
}

RigMixtureModel kmeans_init(std::span<const double> sample, std::size_t k, std::size_t restarts,
                            std::uint64_t seed, const LevelContext& ctx) {
  check_sample(sample);
  if (k == 0) throw ValidationError("k must be >= 1");
  std::vector<double> xs(sample.begin(), sample.end());
  std::sort(xs.begin(), xs.end());
  std::vector<double> distinct = xs;
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  const std::size_t nd = distinct.size();
  if (k > nd) throw ValidationError("too many components for sample: k=" + std::to_string(k) +
                                    " exceeds " + std::to_string(nd) + " distinct values");

  KMeansResult best;
  for (std::size_t r = 0; r < std::max<std::size_t>(restarts, 1); ++r) {
    std::mt19937_64 gen(derive_seed(seed, r));
    std::uniform_real_distribution<double> unif;
    std::vector<std::size_t> idx(k);
    for (std::size_t c = 0; c < k; ++c) {
      const double offset = r == 0 ? 0.5 : unif(gen);
      const double q = (static_cast<double>(c) + offset) / static_cast<double>(k);
      idx[c] = std::min(nd - 1, static_cast<std::size_t>(q * static_cast<double>(nd)));
    }
    for (std::size_t c = 1; c < k; ++c) idx[c] = std::max(idx[c], idx[c - 1] + 1);
    for (std::size_t c = k; c-- > 0;) idx[c] = std::min(idx[c], nd - k + c);
    std::vector<double> centers(k);
    for (std::size_t c = 0; c < k; ++c) centers[c] = distinct[idx[c]];
    KMeansResult res = lloyd(xs, std::move(centers));
    if (res.inertia < best.inertia) best = std::move(res);
  }

  RigMixtureModel model;
  model.level = ctx.level;
  model.u = ctx.u;
  model.lambda = ctx.lambda;
  model.weights.assign(k, 0.0);
  model.thetas.assign(k, 0.0);
  std::vector<std::vector<double>> members(k);
  for (std::size_t j = 0; j < xs.size(); ++j) members[best.labels[j]].push_back(xs[j]);
  // order components by center
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return best.centers[a] < best.centers[b]; });
  for (std::size_t c = 0; c < k; ++c) {
    const auto& m = members[order[c]];
    model.weights[c] = static_cast<double>(m.size()) / static_cast<double>(xs.size());
    model.thetas[c] = closed_form_theta(m, ctx.u, ctx.lambda);
  }
  return model;
}

RigMixtureModel fit_mixture(std::span<const double> sample, const LevelContext& ctx,
                            std::size_t k, const EmConfig& cfg) {
  if (!(ctx.u >= 0.0 && ctx.u < 1.0))
    throw ValidationError("overloaded level: utilization must be < 1");
  if (!(ctx.lambda > 0.0))
    throw DegenerateError("level has zero variability; response time equals execution time");
  if (!(cfg.epsilon > 0.0)) throw ValidationError("epsilon must be > 0");
  check_sample(sample);
  if (k == 0) throw ValidationError("k must be >= 1");
  if (sample.size() < 2 * k)
    throw ValidationError("sample size " + std::to_string(sample.size()) + " < 2k for k=" +
                          std::to_string(k));

  RigMixtureModel model = kmeans_init(sample, k, cfg.kmeans_restarts, cfg.seed, ctx);
  const double n = static_cast<double>(sample.size());
  const double freeze_below = 1.0 / (10.0 * n);

  validate_model(model);
  const SampleTerms terms = sample_terms(sample, ctx.lambda);
  FusedStep es = fused_step(terms, model);
  std::vector<double>& hist = model.loglik_trace;
  hist.push_back(es.loglik);
  std::optional<double> l_inf;
  std::size_t steps = 0;
  bool converged = false;
  while (true) {
    if (hist.size() >= 3) {
      const std::size_t m = hist.size();
      const AitkenResult a = aitken_converged(hist[m - 3], hist[m - 2], hist[m - 1],
                                              cfg.epsilon, l_inf);
      if (a.converged) {
        converged = true;
        break;
      }
      l_inf = a.l_inf;
    }
    if (steps == cfg.max_iter) break;

    for (std::size_t c = 0; c < k; ++c) model.weights[c] = es.sums[c].weight / n;
    for (std::size_t c = 0; c < k; ++c) {
      if (model.weights[c] < freeze_below) continue;
      model.thetas[c] = solve_theta(es.sums[c], sample.size(), ctx.u, ctx.lambda, cfg);
    }
    ++steps;
    es = fused_step(terms, model);
    hist.push_back(es.loglik);
    if (!std::isfinite(es.loglik)) throw NumericError("log-likelihood is not finite");
  }
  model.loglik = hist.back();
  model.bic = bic_score(model.loglik, k, sample.size());
  model.iterations = steps;
  model.converged = converged;
  return model;
}

Selection select_k(std::span<const double> sample, const LevelContext& ctx, const EmConfig& cfg) {
  if (cfg.k_max == 0) throw ValidationError("k_max must be >= 1");
  if (!(ctx.lambda > 0.0))
    throw DegenerateError("level has zero variability; response time equals execution time");
  Selection sel;
  std::optional<std::size_t> best;
  for (std::size_t k = 1; k <= cfg.k_max; ++k) {
    KCandidate cand;
    cand.k = k;
    EmConfig local = cfg;
    local.seed = derive_seed(cfg.seed, k);
    try {
      cand.model = fit_mixture(sample, ctx, k, local);
    } catch (const Error& e) {
      cand.diagnostic = e.what();
    }
    sel.candidates.push_back(std::move(cand));
    const auto& added = sel.candidates.back();
    if (added.model && (!best || added.model->bic > sel.candidates[*best].model->bic))
      best = sel.candidates.size() - 1;
  }
  if (!best) {
    std::string why = "all fits failed";
    if (!sel.candidates.empty()) why += ": " + sel.candidates.front().diagnostic;
    throw NumericError(why);
  }
  sel.best = *sel.candidates[*best].model;
  return sel;
}

}  // namespace rtig
