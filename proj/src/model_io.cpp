#include "rtig/model_io.hpp"

#include <fstream>

#include "rtig/error.hpp"

namespace rtig {

nlohmann::ordered_json model_to_json(const RigMixtureModel& model) {
  nlohmann::ordered_json doc;
  doc["task_id"] = model.task_id;
  doc["level"] = model.level;
  doc["u"] = model.u;
  doc["lambda"] = model.lambda;
  doc["k"] = model.k();
  doc["pi"] = model.weights;
  doc["theta"] = model.thetas;
  doc["loglik"] = model.loglik;
  doc["bic"] = model.bic;
  doc["iterations"] = model.iterations;
  doc["converged"] = model.converged;
  return doc;
}

RigMixtureModel model_from_json(const nlohmann::json& doc) {
  RigMixtureModel m;
  try {
    m.task_id = doc.value("task_id", std::string{});
    m.level = doc.at("level").get<std::size_t>();
    m.u = doc.at("u").get<double>();
    m.lambda = doc.at("lambda").get<double>();
    m.weights = doc.at("pi").get<std::vector<double>>();
    m.thetas = doc.at("theta").get<std::vector<double>>();
    m.loglik = doc.value("loglik", 0.0);
    m.bic = doc.value("bic", 0.0);
    m.iterations = doc.value("iterations", std::size_t{0});
    m.converged = doc.value("converged", false);
    if (doc.contains("k") && doc.at("k").get<std::size_t>() != m.thetas.size())
      throw ValidationError("model: k does not match theta length");
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model: ") + e.what());
  }
  validate_model(m);
  return m;
}

void save_model(const RigMixtureModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write model '" + path.string() + "'");
  out << model_to_json(model).dump(2) << '\n';
}

RigMixtureModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open model '" + path.string() + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("model '" + path.string() + "': " + e.what());
  }
  return model_from_json(doc);
}

}  // namespace rtig
