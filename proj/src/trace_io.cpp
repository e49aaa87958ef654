#include "rtig/trace_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>

#include "rtig/error.hpp"
#include "rtig/numeric.hpp"

namespace rtig {

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && s[b] == ' ') ++b;
  return s.substr(b);
}

double parse_double(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ValidationError("trace line " + std::to_string(line_no) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

void write_trace_csv(const ResponseTrace& trace, std::ostream& out) {
  out << "task_id,job_index,release,response,execution\n";
  for (const TaskTrace& t : trace.tasks) {
    if (t.task_id.find_first_of(",\"\n\r") != std::string::npos)
      throw ValidationError("task id '" + t.task_id + "' cannot be written to CSV");
    for (const JobRecord& j : t.jobs) {
      out << t.task_id << ',' << j.job_index << ',' << format_double(j.release) << ','
          << format_double(j.response) << ',';
      if (!std::isnan(j.execution)) out << format_double(j.execution);
      out << '\n';
    }
  }
}

void save_trace(const ResponseTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write trace '" + path.string() + "'");
  write_trace_csv(trace, out);
}

ResponseTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("trace: missing header");
  const std::vector<std::string> header = split(trim(line));
  std::map<std::string, std::size_t> col;
  for (std::size_t c = 0; c < header.size(); ++c) col[trim(header[c])] = c;
  for (const char* name : {"task_id", "job_index", "release", "response"})
    if (!col.count(name)) throw ValidationError(std::string("trace: missing column '") + name + "'");
  const bool has_exec = col.count("execution") > 0;

  ResponseTrace trace;
  std::map<std::string, std::size_t> index;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    const std::vector<std::string> f = split(line);
    if (f.size() < header.size() - (has_exec ? 1 : 0))
      throw ValidationError("trace line " + std::to_string(line_no) + ": too few fields");
    const std::string id = trim(f[col["task_id"]]);
    JobRecord rec;
    const double idx = parse_double(trim(f[col["job_index"]]), line_no);
    if (!(idx >= 1.0) || idx != std::floor(idx))
      throw ValidationError("trace line " + std::to_string(line_no) + ": job_index must be >= 1");
    rec.job_index = static_cast<std::size_t>(idx);
    rec.release = parse_double(trim(f[col["release"]]), line_no);
    rec.response = parse_double(trim(f[col["response"]]), line_no);
    if (!(rec.response > 0.0))
      throw ValidationError("trace line " + std::to_string(line_no) + ": response must be > 0");
    rec.execution = std::numeric_limits<double>::quiet_NaN();
    if (has_exec && col["execution"] < f.size()) {
      const std::string e = trim(f[col["execution"]]);
      if (!e.empty()) rec.execution = parse_double(e, line_no);
    }
    auto [it, inserted] = index.try_emplace(id, trace.tasks.size());
    if (inserted) trace.tasks.push_back({id, {}});
    trace.tasks[it->second].jobs.push_back(rec);
  }
  return trace;
}

ResponseTrace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open trace '" + path.string() + "'");
  return read_trace_csv(in);
}

}  // namespace rtig
