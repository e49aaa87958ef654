#include "rtig/taskset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "rtig/error.hpp"

namespace rtig {

ExecDistribution ExecDistribution::discrete(std::vector<double> support,
                                            std::vector<double> probabilities) {
  if (support.empty() || support.size() != probabilities.size())
    throw ValidationError("discrete distribution needs matching nonempty support and probabilities");
  double total = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    if (!(support[k] > 0.0) || !std::isfinite(support[k]))
      throw ValidationError("discrete support values must be positive and finite");
    if (k > 0 && !(support[k] > support[k - 1]))
      throw ValidationError("discrete support must be strictly increasing");
    if (!(probabilities[k] >= 0.0))
      throw ValidationError("discrete probabilities must be nonnegative");
    total += probabilities[k];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw ValidationError("discrete probabilities must sum to 1");

  ExecDistribution d;
  d.kind_ = Kind::discrete;
  double mean = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) mean += support[k] * probabilities[k];
  double var = 0.0;
  for (std::size_t k = 0; k < support.size(); ++k) {
    const double dev = support[k] - mean;
    var += dev * dev * probabilities[k];
  }
  d.support_ = std::move(support);
  d.probs_ = std::move(probabilities);
  d.mean_ = mean;
  d.variance_ = var;
  return d;
}

ExecDistribution ExecDistribution::uniform_integer(std::int64_t c_min, std::int64_t c_max) {
  if (c_min <= 0 || c_max < c_min)
    throw ValidationError("uniform-integer distribution needs 0 < c_min <= c_max");
  ExecDistribution d;
  d.kind_ = Kind::uniform_integer;
  d.int_min_ = c_min;
  d.int_max_ = c_max;
  d.mean_ = 0.5 * static_cast<double>(c_min + c_max);
  const double width = static_cast<double>(c_max - c_min + 1);
  d.variance_ = (width * width - 1.0) / 12.0;
  return d;
}

ExecDistribution ExecDistribution::exponential(double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate))
    throw ValidationError("exponential distribution needs rate > 0");
  ExecDistribution d;
  d.kind_ = Kind::exponential;
  d.rate_ = rate;
  d.mean_ = 1.0 / rate;
  d.variance_ = 1.0 / (rate * rate);
  return d;
}

ExecDistribution ExecDistribution::deterministic(double value) {
  return discrete({value}, {1.0});
}

double ExecDistribution::stddev() const { return std::sqrt(variance_); }

std::optional<double> ExecDistribution::c_min() const {
  switch (kind_) {
    case Kind::discrete: return support_.front();
    case Kind::uniform_integer: return static_cast<double>(int_min_);
    case Kind::exponential: return std::nullopt;
  }
  return std::nullopt;
}

std::optional<double> ExecDistribution::c_max() const {
  switch (kind_) {
    case Kind::discrete: return support_.back();
    case Kind::uniform_integer: return static_cast<double>(int_max_);
    case Kind::exponential: return std::nullopt;
  }
  return std::nullopt;
}

std::string_view kind_name(ExecDistribution::Kind kind) {
  switch (kind) {
    case ExecDistribution::Kind::discrete: return "discrete";
    case ExecDistribution::Kind::uniform_integer: return "uniform-integer";
    case ExecDistribution::Kind::exponential: return "exponential";
  }
  return "unknown";
}

namespace {

LevelStats compute_levels(const std::vector<TaskSpec>& tasks) {
  const std::size_t n = tasks.size();
  LevelStats ls;
  ls.u.assign(n + 1, 0.0);
  ls.v.assign(n + 1, 0.0);
  ls.lambda.assign(n + 1, std::nullopt);
  ls.u_max.assign(n + 1, std::nullopt);
  ls.v_max.assign(n + 1, std::nullopt);
  ls.sum_means.assign(n + 1, 0.0);
  ls.lambda[0] = 0.0;
  ls.u_max[0] = 0.0;
  ls.v_max[0] = 0.0;

  double var_sum = 0.0;
  for (std::size_t i = 1; i <= n; ++i) {
    const TaskSpec& t = tasks[i - 1];
    ls.u[i] = ls.u[i - 1] + t.exec.mean() / t.period;
    var_sum += t.exec.variance() / t.period;
    ls.v[i] = std::sqrt(var_sum);
    ls.sum_means[i] = ls.sum_means[i - 1] + t.exec.mean();
    if (ls.u[i] < 1.0) {
      const double slack = 1.0 - ls.u[i];
      ls.lambda[i] = var_sum / (slack * slack);
    }
    if (ls.u_max[i - 1] && t.exec.bounded()) {
      const double lo = *t.exec.c_min();
      const double hi = *t.exec.c_max();
      ls.u_max[i] = *ls.u_max[i - 1] + hi / t.period;
      ls.v_max[i] = *ls.v_max[i - 1] + (hi - lo) * (hi - lo) / t.period;
    }
  }
  return ls;
}

void check_level(const TaskSet& ts, std::size_t level) {
  if (level > ts.size())
    throw ValidationError("level index " + std::to_string(level) + " out of range 0.." +
                          std::to_string(ts.size()));
}

}  // namespace

TaskSet::TaskSet(std::vector<TaskSpec> tasks, std::string unit)
    : unit_(std::move(unit)), tasks_(std::move(tasks)) {
  std::set<std::string, std::less<>> ids;
  for (const TaskSpec& t : tasks_) {
    if (!ids.insert(t.id).second) throw ValidationError("duplicate task id '" + t.id + "'");
    if (!(t.period > 0.0) || !std::isfinite(t.period))
      throw ValidationError("task '" + t.id + "': period must be > 0");
    if (!(t.deadline > 0.0) || !std::isfinite(t.deadline))
      throw ValidationError("task '" + t.id + "': deadline must be > 0");
    if (!(t.alpha >= 0.0 && t.alpha < 1.0))
      throw ValidationError("task '" + t.id + "': alpha must lie in [0, 1)");
  }
  std::stable_sort(tasks_.begin(), tasks_.end(),
                   [](const TaskSpec& a, const TaskSpec& b) { return a.period < b.period; });
  levels_ = compute_levels(tasks_);
}

const TaskSpec& TaskSet::task(std::size_t priority) const {
  if (priority < 1 || priority > tasks_.size())
    throw ValidationError("priority " + std::to_string(priority) + " out of range 1.." +
                          std::to_string(tasks_.size()));
  return tasks_[priority - 1];
}

std::optional<std::size_t> TaskSet::priority_of(std::string_view id) const {
  for (std::size_t k = 0; k < tasks_.size(); ++k)
    if (tasks_[k].id == id) return k + 1;
  return std::nullopt;
}

double level_utilization(const TaskSet& ts, std::size_t level) {
  check_level(ts, level);
  return ts.levels().u[level];
}

double level_deviation(const TaskSet& ts, std::size_t level) {
  check_level(ts, level);
  return ts.levels().v[level];
}

double variability_coefficient(const TaskSet& ts, std::size_t level) {
  check_level(ts, level);
  const auto& lambda = ts.levels().lambda[level];
  if (!lambda) throw ValidationError("variability undefined: level utilization >= 1");
  return *lambda;
}

MaxLevelStats max_level_stats(const TaskSet& ts, std::size_t level) {
  check_level(ts, level);
  const LevelStats& ls = ts.levels();
  if (!ls.u_max[level]) throw ValidationError("maximal statistics unavailable: unbounded support");
  return {*ls.u_max[level], *ls.v_max[level]};
}

double liu_layland_bound(std::size_t n) {
  if (n == 0) return 1.0;
  const double k = static_cast<double>(n);
  return k * std::expm1(std::log(2.0) / k);
}

bool liu_layland_check(const TaskSet& ts, std::size_t level) {
  check_level(ts, level);
  const auto& u_max = ts.levels().u_max[level];
  if (!u_max) throw ValidationError("Liu-Layland check not applicable: unbounded support");
  return *u_max < liu_layland_bound(level);
}

}  // namespace rtig
