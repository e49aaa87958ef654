#include "rtig/commands.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "json.hpp"
#include "rtig/error.hpp"
#include "rtig/model_io.hpp"
#include "rtig/numeric.hpp"
#include "rtig/taskset_io.hpp"
#include "rtig/trace_io.hpp"

namespace rtig {

namespace fs = std::filesystem;

std::uint64_t simulation_seed(std::uint64_t master) { return derive_seed(master, 1); }
std::uint64_t generation_seed(std::uint64_t master) { return derive_seed(master, 2); }
std::uint64_t fit_seed(std::uint64_t master, std::size_t priority) {
  return derive_seed(master, 100 + priority);
}

namespace {

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path.string() + "'");
  out << text;
}

std::vector<double> task_responses(const ResponseTrace& trace, const std::string& id,
                                   std::size_t discard) {
  const TaskTrace* t = trace.find(id);
  if (!t) return {};
  std::vector<double> r = t->responses();
  if (discard >= r.size()) return {};
  r.erase(r.begin(), r.begin() + static_cast<std::ptrdiff_t>(discard));
  return r;
}

EmConfig em_config(std::size_t k_max, double tol, std::uint64_t seed) {
  if (!(tol > 0.0)) throw ValidationError("--tol must be > 0");
  if (k_max == 0) throw ValidationError("--kmax must be >= 1");
  EmConfig cfg;
  cfg.k_max = k_max;
  cfg.epsilon = tol;
  cfg.seed = seed;
  return cfg;
}

RigMixtureModel fit_task(const TaskSet& ts, std::size_t priority, std::span<const double> r,
                         std::optional<std::size_t> k, const EmConfig& cfg) {
  const LevelContext ctx = level_context_for_task(ts, priority);
  if (!(ctx.lambda > 0.0))
    throw DegenerateError("level " + std::to_string(ctx.level) + " of task '" +
                          ts.task(priority).id +
                          "' has zero variability; response time equals execution time");
  if (r.empty()) throw ValidationError("no responses for task '" + ts.task(priority).id + "'");
  RigMixtureModel model =
      k ? fit_mixture(r, ctx, *k, cfg) : select_k(r, ctx, cfg).best;
  model.task_id = ts.task(priority).id;
  return model;
}

std::string fmt_optional(const std::optional<double>& v) {
  return v ? format_double(*v) : std::string();
}

}  // namespace

TaskSet cmd_generate(const GenerateOptions& opt) {
  GeneratedTaskSet gen = generate_taskset(opt.cfg);
  if (!opt.output.empty()) save_taskset(gen.taskset, opt.output);
  return std::move(gen.taskset);
}

ResponseTrace cmd_simulate(const SimulateOptions& opt) {
  const TaskSet ts = load_taskset(opt.taskset);
  SimConfig cfg;
  if (opt.horizon) cfg.horizon = opt.horizon;
  else cfg.jobs_per_task = opt.jobs;
  cfg.seed = opt.seed;
  cfg.discard_warmup = opt.discard;
  ResponseTrace trace = simulate_rm(ts, cfg);
  if (!opt.output.empty()) save_trace(trace, opt.output);
  return trace;
}

RigMixtureModel cmd_fit(const FitOptions& opt) {
  const TaskSet ts = load_taskset(opt.taskset);
  const auto priority = ts.priority_of(opt.task);
  if (!priority) throw ValidationError("unknown task '" + opt.task + "'");
  const ResponseTrace trace = load_trace(opt.trace);
  const std::vector<double> r = task_responses(trace, opt.task, opt.discard);
  if (opt.k && *opt.k == 0) throw ValidationError("--k must be >= 1");
  const RigMixtureModel model =
      fit_task(ts, *priority, r, opt.k, em_config(opt.k_max, opt.tol, opt.seed));
  if (!opt.output.empty()) save_model(model, opt.output);
  return model;
}

DmpReport cmd_dmp(const DmpOptions& opt) {
  const TaskSet ts = load_taskset(opt.taskset);
  const ResponseTrace trace = load_trace(opt.trace);
  DmpReport report;
  report.unit = ts.unit();
  for (std::size_t p = 1; p <= ts.size(); ++p) {
    const TaskSpec& task = ts.task(p);
    std::optional<RigMixtureModel> model;
    std::string na = "no-model";
    const auto& lambda = ts.levels().lambda[p - 1];
    if (!lambda) {
      na = "overloaded-level";
    } else if (*lambda == 0.0) {
      na = "degenerate-level";
    } else if (!opt.models.empty()) {
      const fs::path file = opt.models / (task.id + ".json");
      if (fs::exists(file)) model = load_model(file);
    }
    const std::vector<double> r = task_responses(trace, task.id, 0);
    report.rows.push_back(evaluate_task(ts, p, r, model, na));
  }
  if (!opt.output.empty()) {
    write_text(opt.output, report_to_json(report).dump(2) + "\n");
    fs::path text = opt.output;
    text.replace_extension(".txt");
    write_text(text, report_to_text(report));
  }
  return report;
}

QqData cmd_qq(const QqOptions& opt) {
  const RigMixtureModel model = load_model(opt.model);
  const ResponseTrace trace = load_trace(opt.trace);
  const std::string id = opt.task.empty() ? model.task_id : opt.task;
  const std::vector<double> r = task_responses(trace, id, 0);
  if (r.empty()) throw ValidationError("empty trace for task '" + id + "'");
  QqData qq = qq_data(r, model);
  if (!opt.output.empty()) {
    std::ostringstream out;
    out << "component,rank,count,position,chi2_quantile,g\n";
    for (const QqPoint& p : qq.points)
      out << p.component << ',' << p.rank << ',' << p.count << ',' << format_double(p.position)
          << ',' << format_double(p.theoretical) << ',' << format_double(p.observed) << '\n';
    write_text(opt.output, out.str());
  }
  return qq;
}

double cmd_l2(const L2Options& opt) {
  const RigMixtureModel model = load_model(opt.model);
  const ResponseTrace trace = load_trace(opt.trace);
  const std::string id = opt.task.empty() ? model.task_id : opt.task;
  const std::vector<double> r = task_responses(trace, id, 0);
  if (r.empty()) throw ValidationError("empty trace for task '" + id + "'");
  return l2_distance(r, model);
}

std::string fig4_csv(const DmpReport& report) {
  std::ostringstream out;
  out << "task_id,u,u_max,delta_emp,delta_ig,delta_hoeffding,ll_ok\n";
  for (const DmpRow& r : report.rows) {
    out << r.task_id << ',' << format_double(r.u) << ',' << fmt_optional(r.u_max) << ','
        << fmt_optional(r.delta_emp.value) << ',' << fmt_optional(r.delta_ig.value) << ','
        << fmt_optional(r.delta_hoeffding.value) << ',';
    if (r.liu_layland) out << (*r.liu_layland ? "true" : "false");
    out << '\n';
  }
  return out.str();
}

ReportBundle cmd_report(const ReportOptions& opt) {
  if (opt.out_dir.empty()) throw ValidationError("--out-dir is required");
  const EmConfig base = em_config(opt.k_max, opt.tol, opt.seed);

  TaskSet ts = [&] {
    if (opt.taskset) return load_taskset(*opt.taskset);
    GenerateConfig g = opt.generate;
    g.seed = generation_seed(opt.seed);
    return generate_taskset(g).taskset;
  }();

  fs::create_directories(opt.out_dir / "models");
  save_taskset(ts, opt.out_dir / "taskset.json");

  SimConfig sim;
  sim.jobs_per_task = opt.jobs;
  sim.seed = simulation_seed(opt.seed);
  sim.discard_warmup = opt.discard;
  const ResponseTrace trace = simulate_rm(ts, sim);
  save_trace(trace, opt.out_dir / "trace.csv");

  DmpReport report;
  report.unit = ts.unit();
  nlohmann::ordered_json fits = nlohmann::ordered_json::array();
  for (std::size_t p = 1; p <= ts.size(); ++p) {
    const TaskSpec& task = ts.task(p);
    const std::vector<double> r = task_responses(trace, task.id, 0);
    std::optional<RigMixtureModel> model;
    std::string na;
    EmConfig cfg = base;
    cfg.seed = fit_seed(opt.seed, p);
    try {
      model = fit_task(ts, p, r, std::nullopt, cfg);
      save_model(*model, opt.out_dir / "models" / (task.id + ".json"));
    } catch (const DegenerateError&) {
      na = "degenerate-level";
    } catch (const Error& e) {
      na = e.kind() == ErrorKind::numeric ? "fit-failed" : "invalid-level";
    }
    nlohmann::ordered_json f;
    f["task_id"] = task.id;
    f["model"] = model ? nlohmann::ordered_json("models/" + task.id + ".json")
                       : nlohmann::ordered_json(nullptr);
    if (!model) f["na"] = na;
    fits.push_back(std::move(f));
    report.rows.push_back(evaluate_task(ts, p, r, model, na));
  }

  write_text(opt.out_dir / "dmp.json", report_to_json(report).dump(2) + "\n");
  write_text(opt.out_dir / "dmp.txt", report_to_text(report));
  const fs::path fig4 = opt.out_dir / "fig4.csv";
  write_text(fig4, fig4_csv(report));

  nlohmann::ordered_json manifest;
  manifest["tool"] = kToolVersion;
  manifest["inputs"]["taskset"] =
      opt.taskset ? nlohmann::ordered_json(opt.taskset->generic_string())
                  : nlohmann::ordered_json("generated");
  manifest["outputs"] = {{"taskset", "taskset.json"}, {"trace", "trace.csv"},
                         {"report_json", "dmp.json"}, {"report_text", "dmp.txt"},
                         {"fig4", "fig4.csv"}};
  manifest["fits"] = fits;
  nlohmann::ordered_json config;
  config["seed"] = opt.seed;
  config["simulation_seed"] = sim.seed;
  config["jobs_per_task"] = opt.jobs;
  config["discard"] = opt.discard;
  config["k_max"] = opt.k_max;
  config["tol"] = opt.tol;
  config["em"] = {{"max_iter", base.max_iter},
                  {"kmeans_restarts", base.kmeans_restarts},
                  {"newton_max_iter", base.newton_max_iter},
                  {"newton_tol", base.newton_tol}};
  if (!opt.taskset) {
    config["generate"] = {{"n_tasks", opt.generate.n_tasks},
                          {"util", opt.generate.total_utilization},
                          {"period_min", opt.generate.period_min},
                          {"period_max", opt.generate.period_max},
                          {"family", opt.generate.family == DistFamily::uniform ? "uniform" : "exp"},
                          {"seed", generation_seed(opt.seed)}};
  }
  manifest["config"] = config;
  const fs::path manifest_path = opt.out_dir / "manifest.json";
  write_text(manifest_path, manifest.dump(2) + "\n");
  return {std::move(report), fig4, manifest_path};
}

}  // namespace rtig
