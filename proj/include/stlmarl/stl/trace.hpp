#pragma once

#include <cstddef>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace stlmarl::stl {

class TraceError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Named scalar channels sampled at discrete time steps. All channels have
/// the same length; `dt` is informational (seconds per step).
struct Trace {
  std::map<std::string, std::vector<double>> channels;
  std::size_t length = 0;
  double dt = 1.0;

  Trace() = default;
  Trace(std::map<std::string, std::vector<double>> chans, double dt = 1.0);

  bool has_channel(const std::string& name) const {
    return channels.count(name) != 0;
  }

  /// Value of `name` at step t. Throws TraceError on missing channel or
  /// out-of-range index.
  double sample(const std::string& name, std::size_t t) const;

  /// Sub-trace of `len` steps starting at `start`.
  Trace window(std::size_t start, std::size_t len) const;

  /// Appends one step; the row must cover exactly the existing channel set
  /// (any channel set is accepted for the first step).
  void append_step(const std::map<std::string, double>& row);
};

/// CSV with header `t,<channel>,...`, one row per step.
Trace read_trace_csv(const std::string& path, double dt = 1.0);
void write_trace_csv(const Trace& trace, const std::string& path);

}  // namespace stlmarl::stl
