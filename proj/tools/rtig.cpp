// rtig: simulate Rate-Monotonic task sets, fit inverse Gaussian mixtures to
// response times and report deadline miss probabilities.

#include <cstdio>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "rtig/commands.hpp"
#include "rtig/error.hpp"
#include "rtig/model_io.hpp"
#include "rtig/numeric.hpp"
#include "rtig/taskset_io.hpp"

namespace {

int fail(std::string_view code, const std::string& message, int status) {
  std::string line = message;
  for (char& c : line)
    if (c == '\n' || c == '\r') c = ' ';
  std::cerr << code << ": " << line << '\n';
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace rtig;
  CLI::App app{"Response-time estimation for Rate-Monotonic task sets"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  GenerateOptions gen;
  std::string family = "uniform";
  auto* generate = app.add_subcommand("generate", "Generate a random task set (UUniFast)");
  generate->add_option("--n-tasks", gen.cfg.n_tasks, "Number of tasks")->required();
  generate->add_option("--util", gen.cfg.total_utilization, "Total mean utilization")->required();
  generate->add_option("--period-min", gen.cfg.period_min, "Smallest period");
  generate->add_option("--period-max", gen.cfg.period_max, "Largest period");
  generate->add_option("--family", family, "Execution-time family")
      ->check(CLI::IsMember({"uniform", "exp"}));
  generate->add_option("--alpha", gen.cfg.alpha, "Permitted failure rate of every task");
  generate->add_option("--seed", gen.cfg.seed, "Random seed");
  generate->add_option("-o,--output", gen.output, "Task-set JSON")->required();

  SimulateOptions sim;
  double horizon = 0.0;
  auto* simulate = app.add_subcommand("simulate", "Simulate the RM schedule");
  simulate->add_option("--taskset", sim.taskset, "Task-set JSON")->required();
  auto* jobs_opt = simulate->add_option("--jobs", sim.jobs, "Recorded jobs per task");
  auto* horizon_opt = simulate->add_option("--horizon", horizon, "Simulated time span");
  jobs_opt->excludes(horizon_opt);
  simulate->add_option("--seed", sim.seed, "Random seed");
  simulate->add_option("--discard", sim.discard, "Initial jobs per task to drop");
  simulate->add_option("-o,--output", sim.output, "Trace CSV")->required();

  FitOptions fit;
  std::size_t fixed_k = 0;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the IG mixture of one task");
  fit_cmd->add_option("--trace", fit.trace, "Trace CSV")->required();
  fit_cmd->add_option("--taskset", fit.taskset, "Task-set JSON")->required();
  fit_cmd->add_option("--task", fit.task, "Task id")->required();
  auto* k_opt = fit_cmd->add_option("--k", fixed_k, "Fixed number of components");
  auto* kmax_opt = fit_cmd->add_option("--kmax", fit.k_max, "Largest k tried by BIC");
  k_opt->excludes(kmax_opt);
  fit_cmd->add_option("--tol", fit.tol, "Aitken tolerance");
  fit_cmd->add_option("--seed", fit.seed, "Random seed");
  fit_cmd->add_option("--discard", fit.discard, "Initial responses to drop (warm-up)");
  fit_cmd->add_option("-o,--output", fit.output, "Model JSON")->required();

  DmpOptions dmp;
  auto* dmp_cmd = app.add_subcommand("dmp", "Deadline miss probabilities of every task");
  dmp_cmd->add_option("--taskset", dmp.taskset, "Task-set JSON")->required();
  dmp_cmd->add_option("--trace", dmp.trace, "Trace CSV")->required();
  dmp_cmd->add_option("--models", dmp.models, "Directory of <task_id>.json models");
  dmp_cmd->add_option("-o,--output", dmp.output, "Report JSON (text table written as .txt)");

  QqOptions qq;
  auto* qq_cmd = app.add_subcommand("qq", "Chi-squared QQ data per mixture component");
  qq_cmd->add_option("--trace", qq.trace, "Trace CSV")->required();
  qq_cmd->add_option("--model", qq.model, "Model JSON")->required();
  qq_cmd->add_option("--task", qq.task, "Task id (default: the model's)");
  qq_cmd->add_option("-o,--output", qq.output, "QQ CSV")->required();

  L2Options l2;
  auto* l2_cmd = app.add_subcommand("l2", "RMS distance between empirical and model CDFs");
  l2_cmd->add_option("--trace", l2.trace, "Trace CSV")->required();
  l2_cmd->add_option("--model", l2.model, "Model JSON")->required();
  l2_cmd->add_option("--task", l2.task, "Task id (default: the model's)");

  ReportOptions rep;
  std::string taskset_path;
  std::string rep_family = "uniform";
  auto* report = app.add_subcommand("report", "simulate -> fit -> dmp for every task");
  report->add_option("--taskset", taskset_path, "Task-set JSON (generated when omitted)");
  report->add_option("--n-tasks", rep.generate.n_tasks, "Generated task count");
  report->add_option("--util", rep.generate.total_utilization, "Generated total utilization");
  report->add_option("--period-min", rep.generate.period_min, "Generated smallest period");
  report->add_option("--period-max", rep.generate.period_max, "Generated largest period");
  report->add_option("--family", rep_family, "Generated execution-time family")
      ->check(CLI::IsMember({"uniform", "exp"}));
  report->add_option("--jobs", rep.jobs, "Recorded jobs per task");
  report->add_option("--discard", rep.discard, "Initial jobs per task to drop");
  report->add_option("--kmax", rep.k_max, "Largest k tried by BIC");
  report->add_option("--tol", rep.tol, "Aitken tolerance");
  report->add_option("--seed", rep.seed, "Master seed");
  report->add_option("-o,--out-dir", rep.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("validation-error", e.what(), 2);
  }

  try {
    if (*generate) {
      gen.cfg.family = family == "exp" ? DistFamily::exponential : DistFamily::uniform;
      const TaskSet ts = cmd_generate(gen);
      std::cout << "wrote " << ts.size() << " tasks to " << gen.output.string() << '\n';
    } else if (*simulate) {
      if (*horizon_opt) sim.horizon = horizon;
      const ResponseTrace trace = cmd_simulate(sim);
      std::size_t rows = 0;
      for (const auto& t : trace.tasks) rows += t.jobs.size();
      std::cout << "wrote " << rows << " jobs to " << sim.output.string() << '\n';
    } else if (*fit_cmd) {
      if (*k_opt) fit.k = fixed_k;
      const RigMixtureModel m = cmd_fit(fit);
      std::cout << "task " << m.task_id << ": k=" << m.k() << " loglik=" << format_double(m.loglik)
                << " bic=" << format_double(m.bic) << " iterations=" << m.iterations
                << (m.converged ? "" : " (not converged)") << '\n';
    } else if (*dmp_cmd) {
      const DmpReport r = cmd_dmp(dmp);
      std::cout << report_to_text(r);
    } else if (*qq_cmd) {
      const QqData q = cmd_qq(qq);
      for (const auto& note : q.notes) std::cout << "note: " << note << '\n';
      std::cout << "wrote " << q.points.size() << " QQ points to " << qq.output.string() << '\n';
    } else if (*l2_cmd) {
      std::cout << format_double(cmd_l2(l2)) << '\n';
    } else if (*report) {
      if (!taskset_path.empty()) rep.taskset = taskset_path;
      rep.generate.family = rep_family == "exp" ? DistFamily::exponential : DistFamily::uniform;
      const ReportBundle b = cmd_report(rep);
      std::cout << report_to_text(b.report);
      std::cout << "bundle written to " << rep.out_dir.string() << '\n';
    }
  } catch (const Error& e) {
    return fail(error_code(e.kind()), e.what(), exit_code(e.kind()));
  } catch (const std::filesystem::filesystem_error& e) {
    return fail("validation-error", e.what(), 2);
  } catch (const std::exception& e) {
    return fail("numeric-error", e.what(), 3);
  }
  return 0;
}
