#include "ipds/io.hpp"

#include "ipds/solver.hpp"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ipds {

std::string format_g17(double x) {
  // std::to_chars is locale-independent; %g formatting is not.
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

double parse_double(const std::string& tok, const std::string& where) {
  double v = 0.0;
  const char* b = tok.c_str();
  auto res = std::from_chars(b, b + tok.size(), v);
  if (res.ec != std::errc{})
    throw std::runtime_error("csv: cannot parse '" + tok + "' in " + where);
  return v;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  return out;
}

}  // namespace

void write_matrix_csv(const std::string& path, const Mat& m) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) f << ',';
      f << format_g17(m(i, j));
    }
    f << '\n';
  }
}

Mat read_matrix_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto toks = split_commas(line);
    std::vector<double> row;
    row.reserve(toks.size());
    for (const auto& t : toks) row.push_back(parse_double(t, path));
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("csv: ragged rows in " + path);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("csv: no data in " + path);
  Mat m(rows.size(), rows.front().size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_trace_csv(const std::string& path, const std::vector<TraceRecord>& trace) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  f << kTraceHeader << '\n';
  for (const TraceRecord& r : trace) {
    f << r.t << ',' << format_g17(r.wall_time) << ',' << format_g17(r.objective) << ','
      << format_g17(r.feasibility) << ',' << format_g17(r.crit_bound) << ','
      << format_g17(r.step_residual) << ',' << format_g17(r.theta) << ','
      << format_g17(r.beta) << ',' << format_g17(r.mu) << '\n';
  }
}

std::vector<TraceRecord> read_trace_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(f, line) || line != kTraceHeader)
    throw std::runtime_error("trace csv: bad header in " + path);
  std::vector<TraceRecord> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    auto toks = split_commas(line);
    if (toks.size() != 9) throw std::runtime_error("trace csv: bad row in " + path);
    TraceRecord r;
    r.t = std::strtol(toks[0].c_str(), nullptr, 10);
    r.wall_time = parse_double(toks[1], path);
    r.objective = parse_double(toks[2], path);
    r.feasibility = parse_double(toks[3], path);
    r.crit_bound = parse_double(toks[4], path);
    r.step_residual = parse_double(toks[5], path);
    r.theta = parse_double(toks[6], path);
    r.beta = parse_double(toks[7], path);
    r.mu = parse_double(toks[8], path);
    out.push_back(r);
  }
  return out;
}

void write_manifest(const std::string& path,
                    const std::vector<std::pair<std::string, std::string>>& entries) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& [k, v] : entries) f << k << '=' << v << '\n';
}

std::map<std::string, std::string> read_manifest(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open " + path);
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto pos = line.find('=');
    if (pos == std::string::npos) continue;
    out[line.substr(0, pos)] = line.substr(pos + 1);
  }
  return out;
}

}  // namespace ipds
