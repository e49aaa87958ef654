#pragma once

#include <filesystem>
#include <iosfwd>

#include "rtig/sim.hpp"

namespace rtig {

/// CSV with header `task_id,job_index,release,response,execution`, one row
/// per completed job, tasks in trace order. Times use the shortest
/// round-trip decimal form.
void write_trace_csv(const ResponseTrace& trace, std::ostream& out);
void save_trace(const ResponseTrace& trace, const std::filesystem::path& path);

/// Reads the same format; the `execution` column is optional. Tasks appear
/// in order of first occurrence.
ResponseTrace read_trace_csv(std::istream& in);
ResponseTrace load_trace(const std::filesystem::path& path);

}  // namespace rtig
