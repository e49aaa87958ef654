#include "rtig/sim.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "rtig/error.hpp"
#include "rtig/numeric.hpp"

namespace rtig {

std::vector<double> TaskTrace::responses() const {
  std::vector<double> out;
  out.reserve(jobs.size());
  for (const JobRecord& j : jobs) out.push_back(j.response);
  return out;
}

const TaskTrace* ResponseTrace::find(const std::string& task_id) const {
  for (const TaskTrace& t : tasks)
    if (t.task_id == task_id) return &t;
  return nullptr;
}

double sample_execution(const ExecDistribution& dist, std::mt19937_64& gen) {
  switch (dist.kind()) {
    case ExecDistribution::Kind::discrete: {
      const auto& support = dist.support();
      if (support.size() == 1) return support.front();
      const double p = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
      const auto& probs = dist.probabilities();
      double acc = 0.0;
      for (std::size_t k = 0; k + 1 < support.size(); ++k) {
        acc += probs[k];
        if (p < acc) return support[k];
      }
      return support.back();
    }
    case ExecDistribution::Kind::uniform_integer:
      return static_cast<double>(
          std::uniform_int_distribution<std::int64_t>(dist.int_min(), dist.int_max())(gen));
    case ExecDistribution::Kind::exponential: {
      double x = 0.0;
      while (!(x > 0.0)) x = std::exponential_distribution<double>(dist.rate())(gen);
      return x;
    }
  }
  return dist.mean();
}

std::mt19937_64 task_stream(std::uint64_t seed, std::size_t priority) {
  return std::mt19937_64(derive_seed(seed, priority));
}

namespace {

struct Job {
  std::size_t index;
  double release;
  double demand;
  double remaining;
};

struct TaskState {
  std::deque<Job> pending;
  std::size_t next_index = 1;  // index of the next job to release
  std::size_t completed = 0;
  std::mt19937_64 gen;
};

}  // namespace

ResponseTrace simulate_rm(const TaskSet& ts, const SimConfig& cfg) {
  if (cfg.jobs_per_task.has_value() == cfg.horizon.has_value())
    throw ValidationError("set exactly one of jobs_per_task and horizon");
  const std::size_t n = ts.size();
  if (n == 0) throw ValidationError("empty task set");
  double max_period = 0.0;
  for (const TaskSpec& t : ts.tasks()) max_period = std::max(max_period, t.period);
  if (cfg.jobs_per_task) {
    if (*cfg.jobs_per_task == 0) throw ValidationError("jobs_per_task must be >= 1");
    if (cfg.discard_warmup >= *cfg.jobs_per_task)
      throw ValidationError("discard must be smaller than jobs_per_task");
  } else if (!(*cfg.horizon > max_period)) {
    throw ValidationError("horizon must exceed the largest period");
  }

  const bool by_jobs = cfg.jobs_per_task.has_value();
  const std::size_t target = by_jobs ? *cfg.jobs_per_task : 0;
  const double horizon = by_jobs ? std::numeric_limits<double>::infinity() : *cfg.horizon;

  std::vector<TaskState> state(n);
  for (std::size_t i = 0; i < n; ++i) state[i].gen = task_stream(cfg.seed, i + 1);

  ResponseTrace trace;
  trace.seed = cfg.seed;
  trace.tasks.resize(n);
  for (std::size_t i = 0; i < n; ++i) trace.tasks[i].task_id = ts.tasks()[i].id;

  double executed = 0.0;  // demand of completed jobs
  std::size_t satisfied = 0;
  double now = 0.0;

  auto run_front = [&](std::size_t i, double until) {
    Job& job = state[i].pending.front();
    const double span = until - now;
    job.remaining -= span;
    trace.busy_time += span;
    if (cfg.record_schedule && span > 0.0) {
      auto& sched = trace.schedule;
      if (!sched.empty() && sched.back().priority == i + 1 &&
          sched.back().job_index == job.index && sched.back().end == now)
        sched.back().end = until;
      else
        sched.push_back({now, until, i + 1, job.index});
    }
  };

  while (true) {
    double next_release = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double r = static_cast<double>(state[i].next_index - 1) * ts.tasks()[i].period;
      if (r < horizon) next_release = std::min(next_release, r);
    }
    std::size_t running = n;
    for (std::size_t i = 0; i < n; ++i)
      if (!state[i].pending.empty()) {
        running = i;
        break;
      }

    if (running < n) {
      const double completion = now + state[running].pending.front().remaining;
      if (completion <= next_release && completion <= horizon) {
        run_front(running, completion);
        now = completion;
        TaskState& st = state[running];
        const Job job = st.pending.front();
        st.pending.pop_front();
        executed += job.demand;
        ++st.completed;
        if (!by_jobs || job.index <= target) {
          if (job.index > cfg.discard_warmup)
            trace.tasks[running].jobs.push_back(
                {job.index, job.release, now - job.release, job.demand});
        }
        if (by_jobs && job.index == target && ++satisfied == n) break;
        continue;
      }
    }

    if (next_release == std::numeric_limits<double>::infinity()) {
      // horizon mode: no further releases
      if (running < n) {
        run_front(running, horizon);
        now = horizon;
      }
      break;
    }

    if (running < n) run_front(running, next_release);
    now = next_release;
    for (std::size_t i = 0; i < n; ++i) {
      TaskState& st = state[i];
      const TaskSpec& task = ts.tasks()[i];
      const double r = static_cast<double>(st.next_index - 1) * task.period;
      if (r != now) continue;
      const double demand = sample_execution(task.exec, st.gen);
      st.pending.push_back({st.next_index, r, demand, demand});
      ++st.next_index;
      if (st.pending.size() > cfg.max_backlog)
        throw NumericError("persistent overload: task '" + task.id + "' has more than " +
                           std::to_string(cfg.max_backlog) + " pending jobs");
    }
  }

  trace.end_time = now;
  double partial = 0.0;
  for (const TaskState& st : state)
    for (const Job& job : st.pending) partial += job.demand - job.remaining;
  trace.executed_demand = executed + partial;
  return trace;
}

}  // namespace rtig
