#include "rtig/taskset_io.hpp"

#include <fstream>

#include "rtig/error.hpp"

namespace rtig {

namespace {

using nlohmann::json;

const json& require(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ValidationError(where + ": missing field '" + key + "'");
  return *it;
}

double number(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number()) throw ValidationError(where + ": field '" + key + "' must be a number");
  return v.get<double>();
}

std::int64_t integer(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_number_integer())
    throw ValidationError(where + ": field '" + key + "' must be an integer");
  return v.get<std::int64_t>();
}

std::vector<double> numbers(const json& obj, const char* key, const std::string& where) {
  const json& v = require(obj, key, where);
  if (!v.is_array()) throw ValidationError(where + ": field '" + key + "' must be an array");
  std::vector<double> out;
  for (const json& x : v) {
    if (!x.is_number()) throw ValidationError(where + ": '" + key + "' must hold numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

ExecDistribution dist_from_json(const json& d, const std::string& where) {
  if (!d.is_object()) throw ValidationError(where + ": 'dist' must be an object");
  const json& kind = require(d, "kind", where);
  if (!kind.is_string()) throw ValidationError(where + ": 'kind' must be a string");
  const std::string k = kind.get<std::string>();
  if (k == "discrete")
    return ExecDistribution::discrete(numbers(d, "support", where),
                                      numbers(d, "probabilities", where));
  if (k == "uniform-integer")
    return ExecDistribution::uniform_integer(integer(d, "c_min", where),
                                             integer(d, "c_max", where));
  if (k == "exponential") return ExecDistribution::exponential(number(d, "rate", where));
  throw ValidationError(where + ": unknown distribution kind '" + k + "'");
}

nlohmann::ordered_json dist_to_json(const ExecDistribution& d) {
  nlohmann::ordered_json out;
  out["kind"] = std::string(kind_name(d.kind()));
  switch (d.kind()) {
    case ExecDistribution::Kind::discrete:
      out["support"] = d.support();
      out["probabilities"] = d.probabilities();
      break;
    case ExecDistribution::Kind::uniform_integer:
      out["c_min"] = d.int_min();
      out["c_max"] = d.int_max();
      break;
    case ExecDistribution::Kind::exponential:
      out["rate"] = d.rate();
      break;
  }
  return out;
}

}  // namespace

TaskSet taskset_from_json(const json& doc) {
  if (!doc.is_object()) throw ValidationError("task set: document must be an object");
  std::string unit = "ms";
  if (auto it = doc.find("unit"); it != doc.end()) {
    if (!it->is_string()) throw ValidationError("task set: 'unit' must be a string");
    unit = it->get<std::string>();
  }
  const json& tasks = require(doc, "tasks", "task set");
  if (!tasks.is_array() || tasks.empty())
    throw ValidationError("task set: 'tasks' must be a nonempty array");

  std::vector<TaskSpec> specs;
  for (std::size_t k = 0; k < tasks.size(); ++k) {
    const json& t = tasks[k];
    const std::string where = "task set: tasks[" + std::to_string(k) + "]";
    if (!t.is_object()) throw ValidationError(where + " must be an object");
    TaskSpec spec;
    const json& id = require(t, "id", where);
    spec.id = id.is_string() ? id.get<std::string>() : id.dump();
    spec.period = number(t, "period", where);
    spec.deadline = t.contains("deadline") ? number(t, "deadline", where) : spec.period;
    spec.alpha = t.contains("alpha") ? number(t, "alpha", where) : 0.0;
    spec.exec = dist_from_json(require(t, "dist", where), where);
    specs.push_back(std::move(spec));
  }
  return TaskSet(std::move(specs), std::move(unit));
}

nlohmann::ordered_json taskset_to_json(const TaskSet& ts) {
  nlohmann::ordered_json doc;
  doc["unit"] = ts.unit();
  auto tasks = nlohmann::ordered_json::array();
  for (const TaskSpec& t : ts.tasks()) {
    nlohmann::ordered_json row;
    row["id"] = t.id;
    row["period"] = t.period;
    row["deadline"] = t.deadline;
    row["alpha"] = t.alpha;
    row["dist"] = dist_to_json(t.exec);
    tasks.push_back(std::move(row));
  }
  doc["tasks"] = std::move(tasks);
  return doc;
}

TaskSet load_taskset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open task set '" + path.string() + "'");
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ValidationError("task set '" + path.string() + "': " + e.what());
  }
  return taskset_from_json(doc);
}

void save_taskset(const TaskSet& ts, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write task set '" + path.string() + "'");
  out << taskset_to_json(ts).dump(2) << '\n';
}

}  // namespace rtig
