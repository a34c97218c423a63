#include "stlmarl/stl/trace.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace stlmarl::stl {

Trace::Trace(std::map<std::string, std::vector<double>> chans, double dt_)
    : channels(std::move(chans)), dt(dt_) {
  if (channels.empty()) throw TraceError("trace has no channels");
  length = channels.begin()->second.size();
  for (const auto& [name, series] : channels) {
    if (series.size() != length)
      throw TraceError("channel '" + name + "' length mismatch");
  }
  if (length == 0) throw TraceError("trace must have at least one step");
}

double Trace::sample(const std::string& name, std::size_t t) const {
  auto it = channels.find(name);
  if (it == channels.end()) throw TraceError("unknown channel '" + name + "'");
  if (t >= length) throw TraceError("step index out of range");
  return it->second[t];
}

Trace Trace::window(std::size_t start, std::size_t len) const {
  if (len == 0) throw TraceError("empty window");
  if (start + len > length) throw TraceError("window exceeds trace length");
  Trace out;
  out.dt = dt;
  out.length = len;
  for (const auto& [name, series] : channels)
    out.channels.emplace(name, std::vector<double>(series.begin() + start,
                                                   series.begin() + start + len));
  return out;
}

void Trace::append_step(const std::map<std::string, double>& row) {
  if (row.empty()) throw TraceError("empty row");
  if (length == 0 && channels.empty()) {
    for (const auto& [name, v] : row) channels[name] = {v};
    length = 1;
    return;
  }
  if (row.size() != channels.size()) throw TraceError("row channel set mismatch");
  for (const auto& [name, v] : row) {
    auto it = channels.find(name);
    if (it == channels.end()) throw TraceError("row channel set mismatch");
    it->second.push_back(v);
  }
  ++length;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Trace read_trace_csv(const std::string& path, double dt) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open trace file '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw TraceError("empty trace file");
  auto header = split_csv_line(line);
  if (header.empty() || header[0] != "t")
    throw TraceError("trace header must start with 't'");
  std::vector<std::string> names(header.begin() + 1, header.end());
  if (names.empty()) throw TraceError("trace has no channels");

  std::map<std::string, std::vector<double>> chans;
  for (const auto& n : names) {
    if (!chans.emplace(n, std::vector<double>{}).second)
      throw TraceError("duplicate channel '" + n + "'");
  }
  std::size_t rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != names.size() + 1)
      throw TraceError("row " + std::to_string(rows) + " has wrong column count");
    for (std::size_t i = 0; i < names.size(); ++i) {
      try {
        chans[names[i]].push_back(std::stod(cells[i + 1]));
      } catch (const std::exception&) {
        throw TraceError("bad number '" + cells[i + 1] + "' in row " +
                         std::to_string(rows));
      }
    }
    ++rows;
  }
  if (rows == 0) throw TraceError("trace has no steps");
  return Trace(std::move(chans), dt);
}

void write_trace_csv(const Trace& trace, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw TraceError("cannot open '" + path + "' for writing");
  out << "t";
  for (const auto& [name, series] : trace.channels) out << ',' << name;
  out << '\n';
  char buf[40];
  for (std::size_t t = 0; t < trace.length; ++t) {
    out << t;
    for (const auto& [name, series] : trace.channels) {
      std::snprintf(buf, sizeof buf, "%.17g", series[t]);
      out << ',' << buf;
    }
    out << '\n';
  }
}

}  // namespace stlmarl::stl
