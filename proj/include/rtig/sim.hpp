#pragma once

// Event-driven preemptive fixed-priority (Rate-Monotonic) single-core
// simulator. Jobs past their deadline keep running; within a task jobs run
// in FIFO order. At equal instants completions are processed before
// releases, and releases in priority order.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "rtig/taskset.hpp"

namespace rtig {

struct SimConfig {
  /// Exactly one of jobs_per_task / horizon must be set.
  std::optional<std::size_t> jobs_per_task;
  std::optional<double> horizon;
  std::uint64_t seed = 0;
  std::size_t discard_warmup = 0;  ///< initial jobs per task dropped from the trace
  bool record_schedule = false;
  std::size_t max_backlog = 1'000'000;
};

struct JobRecord {
  std::size_t job_index = 0;  ///< 1-based; release = (job_index - 1) * period
  double release = 0.0;
  double response = 0.0;
  double execution = 0.0;  ///< NaN when unknown (ingested traces)
};

struct TaskTrace {
  std::string task_id;
  std::vector<JobRecord> jobs;

  std::vector<double> responses() const;
};

/// Maximal interval during which one job executes.
struct ScheduleSegment {
  double start = 0.0;
  double end = 0.0;
  std::size_t priority = 0;
  std::size_t job_index = 0;
};

struct ResponseTrace {
  std::vector<TaskTrace> tasks;
  std::uint64_t seed = 0;
  double end_time = 0.0;
  double busy_time = 0.0;        ///< total processor time spent executing
  double executed_demand = 0.0;  ///< demand of completed jobs plus executed part of the rest
  std::vector<ScheduleSegment> schedule;  ///< filled when record_schedule is set

  const TaskTrace* find(const std::string& task_id) const;
};

/// One execution-time draw.
double sample_execution(const ExecDistribution& dist, std::mt19937_64& gen);

/// Per-task generator for priority `priority` under master seed `seed`.
std::mt19937_64 task_stream(std::uint64_t seed, std::size_t priority);

ResponseTrace simulate_rm(const TaskSet& ts, const SimConfig& cfg);

}  // namespace rtig
