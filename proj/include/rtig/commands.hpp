#pragma once

// Pipeline commands behind the `rtig` executable. Each command validates
// its inputs, writes its outputs and returns the in-memory result.
//
// Seed streams derived from one master seed S:
//   simulation          derive_seed(S, 1)
//   task-set generation derive_seed(S, 2)  (report without --taskset)
//   fit of priority i   derive_seed(S, 100 + i)

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rtig/diagnostics.hpp"
#include "rtig/dmp.hpp"
#include "rtig/em.hpp"
#include "rtig/generate.hpp"
#include "rtig/sim.hpp"
#include "rtig/taskset.hpp"

namespace rtig {

inline constexpr const char* kToolVersion = "rtig 1.0.0";

std::uint64_t simulation_seed(std::uint64_t master);
std::uint64_t generation_seed(std::uint64_t master);
std::uint64_t fit_seed(std::uint64_t master, std::size_t priority);

struct GenerateOptions {
  GenerateConfig cfg;
  std::filesystem::path output;
};
TaskSet cmd_generate(const GenerateOptions& opt);

struct SimulateOptions {
  std::filesystem::path taskset;
  std::size_t jobs = 10000;
  std::optional<double> horizon;
  std::uint64_t seed = 0;
  std::size_t discard = 0;
  std::filesystem::path output;
};
ResponseTrace cmd_simulate(const SimulateOptions& opt);

struct FitOptions {
  std::filesystem::path trace;
  std::filesystem::path taskset;
  std::string task;
  std::optional<std::size_t> k;  ///< fixed k; otherwise BIC over 1..k_max
  std::size_t k_max = 10;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  std::size_t discard = 0;  ///< initial trace rows of the task to drop
  std::filesystem::path output;
};
RigMixtureModel cmd_fit(const FitOptions& opt);

struct DmpOptions {
  std::filesystem::path taskset;
  std::filesystem::path trace;
  std::filesystem::path models;  ///< directory holding <task_id>.json
  std::filesystem::path output;  ///< JSON report; the text table goes next to it as .txt
};
DmpReport cmd_dmp(const DmpOptions& opt);

struct QqOptions {
  std::filesystem::path trace;
  std::filesystem::path model;
  std::string task;  ///< defaults to the model's task_id
  std::filesystem::path output;
};
QqData cmd_qq(const QqOptions& opt);

struct L2Options {
  std::filesystem::path trace;
  std::filesystem::path model;
  std::string task;
};
double cmd_l2(const L2Options& opt);

struct ReportOptions {
  std::optional<std::filesystem::path> taskset;  ///< generated from `generate` when empty
  GenerateConfig generate;
  std::size_t jobs = 10000;
  std::size_t discard = 0;
  std::size_t k_max = 10;
  double tol = 1e-8;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir;
};

struct ReportBundle {
  DmpReport report;
  std::filesystem::path fig4_csv;
  std::filesystem::path manifest;
};

/// simulate -> fit every task -> dmp, writing taskset.json, trace.csv,
/// models/<id>.json, dmp.json, dmp.txt, fig4.csv and manifest.json.
ReportBundle cmd_report(const ReportOptions& opt);

/// `task_id,u,u_max,delta_emp,delta_ig,delta_hoeffding,ll_ok`, NA as empty.
std::string fig4_csv(const DmpReport& report);

}  // namespace rtig
