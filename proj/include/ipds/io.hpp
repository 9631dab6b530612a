#pragma once

#include "ipds/linblock.hpp"

#include <map>
#include <string>
#include <vector>

namespace ipds {

struct TraceRecord;

/// Doubles formatted with 17 significant digits, locale-independent.
std::string format_g17(double x);

void write_matrix_csv(const std::string& path, const Mat& m);
Mat read_matrix_csv(const std::string& path);

inline constexpr const char* kTraceHeader =
    "t,wall_time,objective,feasibility,crit_bound,step_residual,theta,beta,mu";

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace);
std::vector<TraceRecord> read_trace_csv(const std::string& path);

/// Run manifest: ordered key=value lines.
void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries);
std::map<std::string, std::string> read_manifest(const std::string& path);

}  // namespace ipds
