#include "plab/runlog.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace plab {
namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Minimal extraction for the flat one-line records we emit.
bool find_number(const std::string& line, const std::string& key, double* out) {
  std::string pat = "\"" + key + "\":";
  size_t pos = line.find(pat);
  if (pos == std::string::npos) return false;
  *out = std::strtod(line.c_str() + pos + pat.size(), nullptr);
  return true;
}

std::string find_string(const std::string& line, const std::string& key) {
  std::string pat = "\"" + key + "\":\"";
  size_t pos = line.find(pat);
  if (pos == std::string::npos) throw std::runtime_error("jsonl: missing key " + key);
  size_t end = line.find('"', pos + pat.size());
  return line.substr(pos + pat.size(), end - pos - pat.size());
}

}  // namespace

std::string jsonl_line(const RunLog& log, const MetricsRecord& r,
                       bool include_timing) {
  std::string s = "{\"step\":" + std::to_string(r.step) + ",\"task\":\"" +
                  log.task_names.at(r.task) + "\",\"loss_norm\":" +
                  fmt_double(r.loss_norm);
  if (!std::isnan(r.eval)) s += ",\"eval\":" + fmt_double(r.eval);
  if (!std::isnan(r.nc_dist)) s += ",\"nc_dist\":" + fmt_double(r.nc_dist);
  if (include_timing && !std::isnan(r.wall_ms))
    s += ",\"wall_ms\":" + fmt_double(r.wall_ms);
  s += "}";
  return s;
}

void write_jsonl(const RunLog& log, const std::string& path, bool include_timing) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  for (const auto& r : log.records) os << jsonl_line(log, r, include_timing) << "\n";
  if (!os) throw std::runtime_error("write failed: " + path);
}

RunLog read_jsonl(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  RunLog log;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    MetricsRecord r;
    double v;
    if (!find_number(line, "step", &v)) throw std::runtime_error("jsonl: missing step");
    r.step = static_cast<long long>(v);
    std::string task = find_string(line, "task");
    int id = -1;
    for (size_t i = 0; i < log.task_names.size(); ++i)
      if (log.task_names[i] == task) id = static_cast<int>(i);
    if (id < 0) {
      id = static_cast<int>(log.task_names.size());
      log.task_names.push_back(task);
    }
    r.task = id;
    if (!find_number(line, "loss_norm", &r.loss_norm))
      throw std::runtime_error("jsonl: missing loss_norm");
    find_number(line, "eval", &r.eval);
    find_number(line, "nc_dist", &r.nc_dist);
    find_number(line, "wall_ms", &r.wall_ms);
    log.records.push_back(r);
  }
  return log;
}

void write_escape_csv(const std::vector<EscapeRow>& rows, const std::string& path) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "label,task,seed,t_plateau,t_exit,budget,formatted\n";
  for (const auto& r : rows) {
    os << r.label << "," << r.task << "," << r.seed << ",";
    if (r.report.t_plateau) os << *r.report.t_plateau;
    os << ",";
    if (r.report.t_exit) os << *r.report.t_exit;
    os << "," << r.report.budget << ",\"" << r.report.format() << "\"\n";
  }
}

}  // namespace plab
