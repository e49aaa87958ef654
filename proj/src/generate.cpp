#include "rtig/generate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rtig/error.hpp"

namespace rtig {

std::vector<double> uunifast(std::size_t n, double total, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> shares(n);
  double remaining = total;
  for (std::size_t i = 1; i < n; ++i) {
    const double next = remaining * std::pow(unif(gen), 1.0 / static_cast<double>(n - i));
    shares[i - 1] = remaining - next;
    remaining = next;
  }
  shares[n - 1] = remaining;
  return shares;
}

TaskSet taskset_from_profile(std::span<const double> shares, std::span<const double> periods,
                             DistFamily family, double alpha, std::string unit) {
  if (shares.size() != periods.size() || shares.empty())
    throw ValidationError("profile needs matching nonempty shares and periods");
  std::vector<TaskSpec> tasks;
  double carry = 0.0;
  for (std::size_t i = 0; i < shares.size(); ++i) {
    const double t = periods[i];
    if (!(shares[i] > 0.0) || !(t > 0.0))
      throw ValidationError("profile shares and periods must be positive");
    TaskSpec spec;
    spec.id = "tau" + std::to_string(i + 1);
    spec.period = t;
    spec.deadline = t;
    spec.alpha = alpha;
    if (family == DistFamily::exponential) {
      spec.exec = ExecDistribution::exponential(1.0 / (shares[i] * t));
    } else {
      const double target = (shares[i] + carry) * t;
      const double half = std::max(1.0, std::round(2.0 * target) / 2.0);
      const auto c_max = static_cast<std::int64_t>(std::llround(2.0 * half - 1.0));
      spec.exec = ExecDistribution::uniform_integer(1, c_max);
      carry = shares[i] + carry - spec.exec.mean() / t;
    }
    tasks.push_back(std::move(spec));
  }
  return TaskSet(std::move(tasks), std::move(unit));
}

GeneratedTaskSet generate_taskset(const GenerateConfig& cfg) {
  if (cfg.n_tasks == 0) throw ValidationError("n_tasks must be >= 1");
  if (!(cfg.total_utilization > 0.0 && cfg.total_utilization < 1.0))
    throw ValidationError("total utilization must lie in (0, 1)");
  const auto pmin = static_cast<std::int64_t>(std::ceil(cfg.period_min));
  const auto pmax = static_cast<std::int64_t>(std::floor(cfg.period_max));
  if (pmin < 1 || pmax < pmin) throw ValidationError("period range must contain an integer >= 1");

  std::mt19937_64 gen(cfg.seed);
  std::vector<double> shares = uunifast(cfg.n_tasks, cfg.total_utilization, gen);
  std::uniform_int_distribution<std::int64_t> period_dist(pmin, pmax);
  std::vector<double> periods(cfg.n_tasks);
  for (double& p : periods) p = static_cast<double>(period_dist(gen));

  std::vector<std::size_t> order(cfg.n_tasks);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return periods[a] < periods[b]; });
  std::vector<double> sorted_shares;
  std::vector<double> sorted_periods;
  for (std::size_t i : order) {
    sorted_shares.push_back(shares[i]);
    sorted_periods.push_back(periods[i]);
  }
  TaskSet ts = taskset_from_profile(sorted_shares, sorted_periods, cfg.family, cfg.alpha);
  return {std::move(ts), std::move(sorted_shares)};
}

}  // namespace rtig
