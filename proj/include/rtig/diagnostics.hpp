#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "rtig/em.hpp"

namespace rtig {

struct QqPoint {
  std::size_t component = 0;  ///< 0-based component index
  std::size_t rank = 0;       ///< 1-based rank within the component
  std::size_t count = 0;      ///< observations assigned to the component
  double position = 0.0;      ///< plotting position (rank - 0.5) / count
  double theoretical = 0.0;   ///< chi-squared(1) quantile at `position`
  double observed = 0.0;      ///< sorted g statistic
};

struct QqData {
  std::vector<QqPoint> points;
  std::vector<std::string> notes;  ///< skipped components
};

/// Classifies each response to its maximum-responsibility component, then
/// pairs the sorted chi-squared statistics of every component with the
/// chi-squared(1) quantiles.
QqData qq_data(std::span<const double> responses, const RigMixtureModel& model);

/// Least-squares slope of observed on theoretical quantiles over the points
/// of one component whose plotting position is at least `from_position`.
double qq_tail_slope(const QqData& qq, std::size_t component, double from_position = 0.9);

/// sqrt( (1/n) sum_j (F_n(r_j) - F(r_j))^2 ) with the right-continuous
/// empirical CDF F_n and the model mixture CDF F.
double l2_distance(std::span<const double> responses, const RigMixtureModel& model);

}  // namespace rtig
