#pragma once

#include <filesystem>

#include "json.hpp"
#include "rtig/taskset.hpp"

namespace rtig {

/// Task-set document:
///   {"unit": "ms", "tasks": [{"id", "period", "deadline"?, "alpha"?,
///                             "dist": {"kind", ...params}}]}
/// dist kinds: "discrete" {support[], probabilities[]},
///             "uniform-integer" {c_min, c_max}, "exponential" {rate}.
TaskSet taskset_from_json(const nlohmann::json& doc);
nlohmann::ordered_json taskset_to_json(const TaskSet& ts);

TaskSet load_taskset(const std::filesystem::path& path);
void save_taskset(const TaskSet& ts, const std::filesystem::path& path);

}  // namespace rtig
