#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rtig/em.hpp"
#include "rtig/taskset.hpp"

namespace rtig {

/// A probability that may be unavailable; `na_reason` is a machine-readable
/// code when `value` is empty.
struct Estimate {
  std::optional<double> value;
  std::string na_reason;

  static Estimate of(double v) { return {v, {}}; }
  static Estimate na(std::string reason) { return {std::nullopt, std::move(reason)}; }
};

enum class Verdict { proven, probabilistic, violated, unknown };
std::string_view verdict_name(Verdict v);

/// Fraction of responses strictly greater than the deadline.
double dmp_empirical(std::span<const double> responses, double deadline);

/// sum_k pi_k | 1{t > theta_k/(1-u)} - F_chi2_1(g(t; theta_k)) |, with the
/// strict indicator. Above the largest component mean it bounds the miss
/// probability from above; below a component mean that term is a lower bound.
double dmp_ig(const RigMixtureModel& model, double deadline);

/// exp(-t (1 - u)^2 / v_max) for level statistics (u, v_max, sum of means),
/// valid only when t > sum_means / (1 - u).
Estimate dmp_hoeffding(double u, std::optional<double> v_max, double sum_means, double deadline);
Estimate dmp_hoeffding(const TaskSet& ts, std::size_t level, double deadline);

struct VerdictResult {
  Verdict verdict = Verdict::unknown;
  std::string reason;
};

/// Liu-Layland proof first, then the IG estimate against alpha.
VerdictResult verdict(double alpha, const Estimate& delta_ig, std::optional<bool> liu_layland);

struct DmpRow {
  std::string task_id;
  std::size_t priority = 0;
  std::size_t n = 0;
  double u = 0.0;
  std::optional<double> u_max;
  double deadline = 0.0;
  double alpha = 0.0;
  Estimate delta_emp;
  Estimate delta_ig;
  Estimate delta_hoeffding;
  std::optional<bool> liu_layland;
  Verdict verdict = Verdict::unknown;
  std::string verdict_reason;
  std::size_t k = 0;
  /// "deadline-near-component-mean": within 1% of some component mean;
  /// "deadline-below-component-mean": not above the largest component mean.
  std::vector<std::string> flags;
};

/// One task's row. `model` may be empty (e.g. the highest-priority task,
/// whose level is degenerate); `model_na_reason` then explains why.
DmpRow evaluate_task(const TaskSet& ts, std::size_t priority, std::span<const double> responses,
                     const std::optional<RigMixtureModel>& model,
                     const std::string& model_na_reason = "no-model");

struct DmpReport {
  std::string unit;
  std::vector<DmpRow> rows;
};

nlohmann::ordered_json report_to_json(const DmpReport& report);
/// Aligned table with tasks as columns and one row per quantity.
std::string report_to_text(const DmpReport& report);

}  // namespace rtig
