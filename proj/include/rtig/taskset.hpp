#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace rtig {

/// Execution-time distribution of one task. Moments are exact closed forms.
class ExecDistribution {
 public:
  enum class Kind { discrete, uniform_integer, exponential };

  /// Finite support, strictly positive and strictly increasing, with
  /// probabilities summing to one within 1e-12.
  static ExecDistribution discrete(std::vector<double> support,
                                   std::vector<double> probabilities);
  /// Uniform over the integers c_min..c_max inclusive.
  static ExecDistribution uniform_integer(std::int64_t c_min, std::int64_t c_max);
  static ExecDistribution exponential(double rate);
  static ExecDistribution deterministic(double value);

  Kind kind() const noexcept { return kind_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return variance_; }
  double stddev() const;

  bool bounded() const noexcept { return kind_ != Kind::exponential; }
  /// Support bounds; empty for unbounded kinds.
  std::optional<double> c_min() const;
  std::optional<double> c_max() const;

  const std::vector<double>& support() const noexcept { return support_; }
  const std::vector<double>& probabilities() const noexcept { return probs_; }
  std::int64_t int_min() const noexcept { return int_min_; }
  std::int64_t int_max() const noexcept { return int_max_; }
  double rate() const noexcept { return rate_; }

 private:
  ExecDistribution() = default;

  Kind kind_ = Kind::discrete;
  std::vector<double> support_;
  std::vector<double> probs_;
  std::int64_t int_min_ = 0;
  std::int64_t int_max_ = 0;
  double rate_ = 0.0;
  double mean_ = 0.0;
  double variance_ = 0.0;
};

std::string_view kind_name(ExecDistribution::Kind kind);

struct TaskSpec {
  std::string id;
  double period = 0.0;
  double deadline = 0.0;  ///< implicit deadline: equals period unless overridden
  double alpha = 0.0;     ///< permitted failure rate in [0, 1)
  ExecDistribution exec = ExecDistribution::deterministic(1.0);
};

/// Per-level aggregates. Index i in 0..size aggregates tasks 1..i; level 0
/// is the empty level.
struct LevelStats {
  std::vector<double> u;
  std::vector<double> v;
  std::vector<std::optional<double>> lambda;  ///< empty when u_i >= 1
  std::vector<std::optional<double>> u_max;   ///< empty when some task is unbounded
  std::vector<std::optional<double>> v_max;
  std::vector<double> sum_means;
};

/// Task set in Rate-Monotonic priority order: index 1 is the task with the
/// smallest period; equal periods keep input order.
class TaskSet {
 public:
  explicit TaskSet(std::vector<TaskSpec> tasks, std::string unit = "ms");

  std::size_t size() const noexcept { return tasks_.size(); }
  const std::string& unit() const noexcept { return unit_; }
  const std::vector<TaskSpec>& tasks() const noexcept { return tasks_; }
  /// 1-based priority index.
  const TaskSpec& task(std::size_t priority) const;
  std::optional<std::size_t> priority_of(std::string_view id) const;
  const LevelStats& levels() const noexcept { return levels_; }

 private:
  std::string unit_;
  std::vector<TaskSpec> tasks_;
  LevelStats levels_;
};

double level_utilization(const TaskSet& ts, std::size_t level);
double level_deviation(const TaskSet& ts, std::size_t level);
/// v_i^2 / (1 - u_i)^2. Throws ValidationError when u_i >= 1.
double variability_coefficient(const TaskSet& ts, std::size_t level);

struct MaxLevelStats {
  double u_max = 0.0;
  double v_max = 0.0;
};
/// Throws ValidationError when any task in 1..level has unbounded support.
MaxLevelStats max_level_stats(const TaskSet& ts, std::size_t level);

/// Liu-Layland utilization bound n (2^{1/n} - 1); tends to log 2 from above.
double liu_layland_bound(std::size_t n);
inline constexpr double kLiuLaylandLimit = 0.69314718055994530942;

/// u_max_i < i (2^{1/i} - 1). Throws ValidationError when u_max is undefined.
bool liu_layland_check(const TaskSet& ts, std::size_t level);

}  // namespace rtig
