#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "rtig/error.hpp"
#include "rtig/generate.hpp"
#include "rtig/sim.hpp"
#include "rtig/taskset_io.hpp"
#include "rtig/trace_io.hpp"

using namespace rtig;

namespace {

TaskSpec task(std::string id, double period, ExecDistribution d) {
  TaskSpec t;
  t.id = std::move(id);
  t.period = period;
  t.deadline = period;
  t.exec = std::move(d);
  return t;
}

TaskSet golden() {
  return TaskSet({task("tau1", 4, ExecDistribution::deterministic(1)),
                  task("tau2", 6, ExecDistribution::deterministic(2))});
}

SimConfig jobs(std::size_t n, std::uint64_t seed = 0) {
  SimConfig cfg;
  cfg.jobs_per_task = n;
  cfg.seed = seed;
  return cfg;
}

std::string csv(const ResponseTrace& t) {
  std::ostringstream out;
  write_trace_csv(t, out);
  return out.str();
}

}  // namespace

TEST_CASE("golden two-task schedule") {
  auto cfg = jobs(12);
  cfg.record_schedule = true;
  const ResponseTrace tr = simulate_rm(golden(), cfg);
  const auto r1 = tr.tasks[0].responses();
  const auto r2 = tr.tasks[1].responses();
  REQUIRE(r1.size() == 12);
  REQUIRE(r2.size() == 12);
  for (double r : r1) CHECK(r == 1.0);
  CHECK(r2[0] == 3.0);
  CHECK(r2[1] == 2.0);
  // tau2's first job runs in [1, 3], its second in [6, 8]
  std::vector<ScheduleSegment> tau2;
  for (const auto& s : tr.schedule)
    if (s.priority == 2) tau2.push_back(s);
  CHECK(tau2[0].start == 1.0);
  CHECK(tau2[0].end == 3.0);
  CHECK(tau2[1].start == 6.0);
  CHECK(tau2[1].end == 8.0);
  // hyperperiod 12: tau2 releases 2 jobs per hyperperiod
  for (std::size_t j = 2; j < r2.size(); ++j) CHECK(r2[j] == r2[j - 2]);
  for (std::size_t j = 0; j < 12; ++j) {
    CHECK(tr.tasks[1].jobs[j].release == 6.0 * static_cast<double>(j));
    CHECK(tr.tasks[1].jobs[j].job_index == j + 1);
  }
}

TEST_CASE("single task: response equals execution") {
  const TaskSet ts({task("only", 10, ExecDistribution::uniform_integer(1, 9))});
  const ResponseTrace tr = simulate_rm(ts, jobs(10000, 4));
  REQUIRE(tr.tasks[0].jobs.size() == 10000);
  for (const auto& j : tr.tasks[0].jobs) CHECK(j.response == j.execution);
}

TEST_CASE("schedule invariants on a random task set") {
  const GeneratedTaskSet g = generate_taskset({8, 0.8, 10, 100, DistFamily::uniform, 0.0, 11});
  const TaskSet& ts = g.taskset;
  auto cfg = jobs(400, 2);
  cfg.record_schedule = true;
  const ResponseTrace tr = simulate_rm(ts, cfg);

  // work conservation bookkeeping
  CHECK(tr.busy_time == doctest::Approx(tr.executed_demand).epsilon(1e-12));
  // lower bound, equality for the highest priority
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (const auto& j : tr.tasks[i].jobs) {
      CHECK(j.response >= j.execution);
      if (i == 0) CHECK(j.response == j.execution);
    }
  // releases spaced by the period
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto& js = tr.tasks[i].jobs;
    for (std::size_t j = 1; j < js.size(); ++j)
      CHECK(js[j].release - js[j - 1].release == ts.task(i + 1).period);
  }

  // replay: at every segment no higher-priority job is pending, and the
  // processor never idles while a job is pending
  struct Interval {
    double release, completion;
  };
  std::vector<std::vector<Interval>> life(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (const auto& j : tr.tasks[i].jobs) life[i].push_back({j.release, j.release + j.response});
  auto pending = [&](std::size_t i, double t) {
    for (const auto& iv : life[i])
      if (iv.release <= t && t < iv.completion) return true;
    return false;
  };
  const double last = tr.tasks.back().jobs.back().release;
  for (const auto& s : tr.schedule) {
    if (s.end > last) break;
    const double mid = 0.5 * (s.start + s.end);
    for (std::size_t h = 0; h + 1 < s.priority; ++h) CHECK_FALSE(pending(h, mid));
  }
  for (std::size_t k = 1; k < tr.schedule.size(); ++k) {
    const double gap_start = tr.schedule[k - 1].end;
    const double gap_end = tr.schedule[k].start;
    if (gap_end > gap_start && gap_end < last) {
      const double mid = 0.5 * (gap_start + gap_end);
      for (std::size_t i = 0; i < ts.size(); ++i) CHECK_FALSE(pending(i, mid));
    }
  }
}

TEST_CASE("determinism and per-task streams") {
  const GeneratedTaskSet g = generate_taskset({5, 0.7, 20, 200, DistFamily::uniform, 0.0, 3});
  const std::string a = csv(simulate_rm(g.taskset, jobs(300, 9)));
  const std::string b = csv(simulate_rm(g.taskset, jobs(300, 9)));
  const std::string c = csv(simulate_rm(g.taskset, jobs(300, 10)));
  CHECK(a == b);
  CHECK(a != c);

  // adding a lower-priority task leaves the others' draws untouched
  std::vector<TaskSpec> more = g.taskset.tasks();
  more.push_back(task("late", 10000, ExecDistribution::uniform_integer(1, 5)));
  const ResponseTrace base = simulate_rm(g.taskset, jobs(50, 9));
  const ResponseTrace extended = simulate_rm(TaskSet(more), jobs(50, 9));
  for (std::size_t i = 0; i < g.taskset.size(); ++i)
    for (std::size_t j = 0; j < 50; ++j)
      CHECK(base.tasks[i].jobs[j].execution == extended.tasks[i].jobs[j].execution);
}

TEST_CASE("empirical utilization converges") {
  const GeneratedTaskSet g = generate_taskset({6, 0.6, 50, 200, DistFamily::uniform, 0.0, 8});
  const ResponseTrace tr = simulate_rm(g.taskset, jobs(10000, 1));
  double demand = 0.0;
  double rate = 0.0;
  for (std::size_t i = 0; i < g.taskset.size(); ++i) {
    double d = 0.0;
    for (const auto& j : tr.tasks[i].jobs) d += j.execution;
    demand += d / (static_cast<double>(tr.tasks[i].jobs.size()) * g.taskset.task(i + 1).period);
    rate += g.taskset.task(i + 1).exec.mean() / g.taskset.task(i + 1).period;
  }
  CHECK(std::abs(demand / rate - 1.0) < 0.01);
  CHECK(rate == doctest::Approx(g.taskset.levels().u[g.taskset.size()]));
}

TEST_CASE("simulation configuration and overload guard") {
  const TaskSet ts = golden();
  SimConfig none;
  CHECK_THROWS_AS(simulate_rm(ts, none), ValidationError);
  SimConfig both = jobs(3);
  both.horizon = 100.0;
  CHECK_THROWS_AS(simulate_rm(ts, both), ValidationError);
  SimConfig discard = jobs(3);
  discard.discard_warmup = 3;
  CHECK_THROWS_AS(simulate_rm(ts, discard), ValidationError);
  SimConfig short_h;
  short_h.horizon = 5.0;
  CHECK_THROWS_AS(simulate_rm(ts, short_h), ValidationError);

  discard.discard_warmup = 1;
  const auto kept = simulate_rm(ts, discard);
  CHECK(kept.tasks[1].jobs.size() == 2);
  CHECK(kept.tasks[1].jobs[0].job_index == 2);

  SimConfig horizon;
  horizon.horizon = 24.0;
  const auto h = simulate_rm(ts, horizon);
  CHECK(h.tasks[0].jobs.size() == 6);
  CHECK(h.tasks[1].jobs.size() == 4);

  const TaskSet over({task("a", 1, ExecDistribution::deterministic(2))});
  SimConfig guard = jobs(100);
  guard.max_backlog = 20;
  CHECK_THROWS_WITH_AS(simulate_rm(over, guard), doctest::Contains("persistent overload"),
                       NumericError);
}

TEST_CASE("execution-time sampling") {
  std::mt19937_64 gen = task_stream(5, 1);
  CHECK(sample_execution(ExecDistribution::deterministic(3.5), gen) == 3.5);
  double s = 0.0, e = 0.0;
  const auto two = ExecDistribution::discrete({1, 3}, {0.5, 0.5});
  const auto ex = ExecDistribution::exponential(1.0);
  for (int j = 0; j < 100000; ++j) {
    s += sample_execution(two, gen);
    const double x = sample_execution(ex, gen);
    CHECK(x > 0.0);
    e += x;
  }
  CHECK(std::abs(s / 1e5 - 2.0) < 0.02);
  CHECK(std::abs(e / 1e5 - 1.0) < 0.01);
}

TEST_CASE("UUniFast generation") {
  std::mt19937_64 gen(1);
  for (int rep = 0; rep < 100; ++rep) {
    const auto shares = uunifast(1 + rep % 20, 0.73, gen);
    CHECK(std::abs(std::accumulate(shares.begin(), shares.end(), 0.0) - 0.73) < 1e-9);
    for (double x : shares) CHECK(x > 0.0);
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto g = generate_taskset({12, 0.8, 100, 1000, DistFamily::uniform, 0.0, seed});
    const double u = g.taskset.levels().u[g.taskset.size()];
    CHECK(std::abs(u / 0.8 - 1.0) < 0.02);
    CHECK(std::abs(std::accumulate(g.target_shares.begin(), g.target_shares.end(), 0.0) - 0.8) <
          1e-9);
    for (std::size_t i = 1; i < g.taskset.size(); ++i)
      CHECK(g.taskset.task(i).period <= g.taskset.task(i + 1).period);
    const auto ge = generate_taskset({12, 0.8, 100, 1000, DistFamily::exponential, 0.0, seed});
    CHECK(std::abs(ge.taskset.levels().u[12] - 0.8) < 1e-9);
  }
  const auto one = generate_taskset({1, 0.5, 100, 1000, DistFamily::uniform, 0.0, 4});
  CHECK(one.taskset.size() == 1);
  CHECK(one.taskset.levels().u[1] == 0.5);
  const auto a = generate_taskset({7, 0.6, 100, 1000, DistFamily::uniform, 0.0, 7});
  const auto b = generate_taskset({7, 0.6, 100, 1000, DistFamily::uniform, 0.0, 7});
  CHECK(taskset_to_json(a.taskset).dump() == taskset_to_json(b.taskset).dump());
  CHECK_THROWS_AS(generate_taskset({0, 0.5}), ValidationError);
  CHECK_THROWS_AS(generate_taskset({3, 1.0}), ValidationError);
}

TEST_CASE("trace CSV round trip and ingestion") {
  const ResponseTrace tr = simulate_rm(golden(), jobs(5));
  const std::string text = csv(tr);
  CHECK(text.rfind("task_id,job_index,release,response,execution\n", 0) == 0);
  std::istringstream in(text);
  const ResponseTrace back = read_trace_csv(in);
  CHECK(csv(back) == text);

  std::istringstream ext("task_id,job_index,release,response\nekf2,1,0,2.5\nekf2,2,4,1.25\nnav,1,0,7\n");
  const ResponseTrace ing = read_trace_csv(ext);
  REQUIRE(ing.tasks.size() == 2);
  CHECK(ing.tasks[0].task_id == "ekf2");
  CHECK(ing.tasks[0].responses() == std::vector<double>{2.5, 1.25});
  CHECK(std::isnan(ing.tasks[0].jobs[0].execution));

  std::istringstream bad("task_id,job_index,release,response\nx,1,0,abc\n");
  CHECK_THROWS_AS(read_trace_csv(bad), ValidationError);
  std::istringstream neg("task_id,job_index,release,response\nx,1,0,-1\n");
  CHECK_THROWS_AS(read_trace_csv(neg), ValidationError);
  std::istringstream header("a,b\n");
  CHECK_THROWS_AS(read_trace_csv(header), ValidationError);
}
