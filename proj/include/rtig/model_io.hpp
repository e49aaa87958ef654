#pragma once

#include <filesystem>

#include "json.hpp"
#include "rtig/em.hpp"

namespace rtig {

/// {task_id, level, u, lambda, k, pi[], theta[], loglik, bic, iterations, converged}
nlohmann::ordered_json model_to_json(const RigMixtureModel& model);
RigMixtureModel model_from_json(const nlohmann::json& doc);

void save_model(const RigMixtureModel& model, const std::filesystem::path& path);
RigMixtureModel load_model(const std::filesystem::path& path);

}  // namespace rtig
