#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "rtig/taskset.hpp"

namespace rtig {

enum class DistFamily { uniform, exponential };

/// Splits `total` into n positive shares that sum to it (UUniFast).
std::vector<double> uunifast(std::size_t n, double total, std::mt19937_64& gen);

/// Builds tasks with mean execution share_i * period_i, in input order.
/// uniform: integer support [1, 2m - 1] whose midpoint m is the target mean
/// rounded to a half-integer (at least 1); the rounding error is carried
/// into the next task so the total utilization drifts by less than one
/// rounding step. exponential: rate = 1 / (share_i * period_i).
TaskSet taskset_from_profile(std::span<const double> shares, std::span<const double> periods,
                             DistFamily family, double alpha = 0.0, std::string unit = "ms");

struct GenerateConfig {
  std::size_t n_tasks = 10;
  double total_utilization = 0.5;
  double period_min = 100.0;
  double period_max = 1000.0;
  DistFamily family = DistFamily::uniform;
  double alpha = 0.0;
  std::uint64_t seed = 0;
};

struct GeneratedTaskSet {
  TaskSet taskset;
  std::vector<double> target_shares;  ///< UUniFast shares in priority order
};

/// Integer periods drawn uniformly from [period_min, period_max]; tasks
/// named tau1..taun in priority order.
GeneratedTaskSet generate_taskset(const GenerateConfig& cfg);

}  // namespace rtig
