#include "rtig/dmp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "rtig/error.hpp"
#include "rtig/rig.hpp"

namespace rtig {

std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::proven: return "proven";
    case Verdict::probabilistic: return "probabilistic";
    case Verdict::violated: return "violated";
    case Verdict::unknown: return "unknown";
  }
  return "unknown";
}

double dmp_empirical(std::span<const double> responses, double deadline) {
  if (responses.empty()) throw ValidationError("empty trace");
  std::size_t misses = 0;
  for (double r : responses)
    if (r > deadline) ++misses;
  return static_cast<double>(misses) / static_cast<double>(responses.size());
}

double dmp_ig(const RigMixtureModel& model, double deadline) {
  validate_model(model);
  if (!(model.lambda > 0.0))
    throw DegenerateError("degenerate model: level has zero variability");
  if (!(deadline > 0.0)) throw ValidationError("deadline must be > 0");
  double delta = 0.0;
  for (std::size_t c = 0; c < model.k(); ++c) {
    const LevelParam lp = model.component(c);
    const double indicator = deadline > lp.mean() ? 1.0 : 0.0;
    const double chi = chi2_cdf_1df(chi2_stat(deadline, lp.theta, lp.u, lp.lambda));
    delta += model.weights[c] * std::abs(indicator - chi);
  }
  return std::clamp(delta, 0.0, 1.0);
}

Estimate dmp_hoeffding(double u, std::optional<double> v_max, double sum_means, double deadline) {
  if (!(u < 1.0)) return Estimate::na("overloaded-level");
  if (!v_max) return Estimate::na("unbounded-support");
  if (*v_max == 0.0) return Estimate::na("zero-deviation");
  if (!(deadline > sum_means / (1.0 - u))) return Estimate::na("precondition-violated");
  const double slack = 1.0 - u;
  return Estimate::of(std::exp(-deadline * slack * slack / *v_max));
}

Estimate dmp_hoeffding(const TaskSet& ts, std::size_t level, double deadline) {
  if (level > ts.size()) throw ValidationError("level index out of range");
  const LevelStats& ls = ts.levels();
  return dmp_hoeffding(ls.u[level], ls.v_max[level], ls.sum_means[level], deadline);
}

VerdictResult verdict(double alpha, const Estimate& delta_ig, std::optional<bool> liu_layland) {
  if (liu_layland && *liu_layland) return {Verdict::proven, "liu-layland"};
  if (!delta_ig.value) return {Verdict::unknown, delta_ig.na_reason};
  if (*delta_ig.value <= alpha) return {Verdict::probabilistic, {}};
  return {Verdict::violated, {}};
}

DmpRow evaluate_task(const TaskSet& ts, std::size_t priority, std::span<const double> responses,
                     const std::optional<RigMixtureModel>& model,
                     const std::string& model_na_reason) {
  const TaskSpec& task = ts.task(priority);
  const LevelStats& ls = ts.levels();
  DmpRow row;
  row.task_id = task.id;
  row.priority = priority;
  row.n = responses.size();
  row.u = ls.u[priority];
  row.u_max = ls.u_max[priority];
  row.deadline = task.deadline;
  row.alpha = task.alpha;

  row.delta_emp = responses.empty() ? Estimate::na("empty-trace")
                                    : Estimate::of(dmp_empirical(responses, task.deadline));
  if (model) {
    row.k = model->k();
    row.delta_ig = Estimate::of(dmp_ig(*model, task.deadline));
    double largest_mean = 0.0;
    bool near = false;
    for (std::size_t c = 0; c < model->k(); ++c) {
      const double mean = model->component(c).mean();
      largest_mean = std::max(largest_mean, mean);
      if (std::abs(task.deadline - mean) <= 0.01 * mean) near = true;
    }
    if (near) row.flags.emplace_back("deadline-near-component-mean");
    if (!(task.deadline > largest_mean)) row.flags.emplace_back("deadline-below-component-mean");
  } else {
    row.delta_ig = Estimate::na(model_na_reason);
  }
  row.delta_hoeffding = dmp_hoeffding(ts, priority, task.deadline);
  if (row.u_max) row.liu_layland = liu_layland_check(ts, priority);

  const VerdictResult v = verdict(task.alpha, row.delta_ig, row.liu_layland);
  row.verdict = v.verdict;
  row.verdict_reason = v.reason;
  return row;
}

namespace {

nlohmann::ordered_json estimate_json(const Estimate& e) {
  if (e.value) return *e.value;
  return nullptr;
}

std::string fmt_prob(const Estimate& e) {
  if (!e.value) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", *e.value);
  return buf;
}

std::string fmt_num(double v, const char* spec = "%.4f") {
  char buf[32];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

}  // namespace

nlohmann::ordered_json report_to_json(const DmpReport& report) {
  nlohmann::ordered_json doc;
  doc["unit"] = report.unit;
  auto rows = nlohmann::ordered_json::array();
  for (const DmpRow& r : report.rows) {
    nlohmann::ordered_json j;
    j["task_id"] = r.task_id;
    j["priority"] = r.priority;
    j["n"] = r.n;
    j["u"] = r.u;
    j["u_max"] = r.u_max ? nlohmann::ordered_json(*r.u_max) : nlohmann::ordered_json(nullptr);
    j["deadline"] = r.deadline;
    j["alpha"] = r.alpha;
    j["k"] = r.k;
    j["delta_emp"] = estimate_json(r.delta_emp);
    j["delta_ig"] = estimate_json(r.delta_ig);
    j["delta_hoeffding"] = estimate_json(r.delta_hoeffding);
    nlohmann::ordered_json na = nlohmann::ordered_json::object();
    if (!r.delta_emp.value) na["delta_emp"] = r.delta_emp.na_reason;
    if (!r.delta_ig.value) na["delta_ig"] = r.delta_ig.na_reason;
    if (!r.delta_hoeffding.value) na["delta_hoeffding"] = r.delta_hoeffding.na_reason;
    j["na"] = na;
    j["liu_layland"] =
        r.liu_layland ? nlohmann::ordered_json(*r.liu_layland) : nlohmann::ordered_json(nullptr);
    j["verdict"] = std::string(verdict_name(r.verdict));
    if (!r.verdict_reason.empty()) j["verdict_reason"] = r.verdict_reason;
    j["flags"] = r.flags;
    rows.push_back(std::move(j));
  }
  doc["tasks"] = std::move(rows);
  return doc;
}

std::string report_to_text(const DmpReport& report) {
  std::vector<std::pair<std::string, std::vector<std::string>>> table;
  auto add = [&](std::string label, auto&& cell) {
    std::vector<std::string> cells;
    for (const DmpRow& r : report.rows) cells.push_back(cell(r));
    table.emplace_back(std::move(label), std::move(cells));
  };
  add("Task", [](const DmpRow& r) { return r.task_id; });
  add("Priority i", [](const DmpRow& r) { return std::to_string(r.priority); });
  add("Components k_i", [](const DmpRow& r) { return r.k ? std::to_string(r.k) : "-"; });
  add("Deadline (" + report.unit + ")", [](const DmpRow& r) { return fmt_num(r.deadline, "%g"); });
  add("Mean utilization u_i", [](const DmpRow& r) { return fmt_num(r.u); });
  add("Maximum utilization u_max_i",
      [](const DmpRow& r) { return r.u_max ? fmt_num(*r.u_max) : std::string("-"); });
  add("Empirical deadline miss probability", [](const DmpRow& r) { return fmt_prob(r.delta_emp); });
  add("IG deadline miss probability", [](const DmpRow& r) { return fmt_prob(r.delta_ig); });
  add("Hoeffding bound", [](const DmpRow& r) { return fmt_prob(r.delta_hoeffding); });
  add("Liu-Layland", [](const DmpRow& r) {
    return r.liu_layland ? std::string(*r.liu_layland ? "yes" : "no") : std::string("-");
  });
  add("Verdict", [](const DmpRow& r) { return std::string(verdict_name(r.verdict)); });

  std::size_t label_w = 0;
  for (const auto& [label, _] : table) label_w = std::max(label_w, label.size());
  std::vector<std::size_t> col_w(report.rows.size(), 0);
  for (const auto& [_, cells] : table)
    for (std::size_t c = 0; c < cells.size(); ++c) col_w[c] = std::max(col_w[c], cells[c].size());

  std::ostringstream out;
  for (const auto& [label, cells] : table) {
    out << label << std::string(label_w - label.size(), ' ');
    for (std::size_t c = 0; c < cells.size(); ++c)
      out << "  " << std::string(col_w[c] - cells[c].size(), ' ') << cells[c];
    out << '\n';
  }
  return out.str();
}

}  // namespace rtig
