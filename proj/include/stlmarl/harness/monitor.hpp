#pragma once

#include <iosfwd>
#include <string>

namespace stlmarl::harness {

/// Standalone trace monitoring: evaluates the formula file against the trace
/// CSV at step t, printing the robustness value and the verdict. Returns the
/// process exit code: 0 satisfied, 1 violated, 2 on any error (parse,
/// channel mismatch, empty window, I/O), each with a distinct message.
int run_monitor(const std::string& formula_path, const std::string& trace_path,
                std::size_t t, std::ostream& out, std::ostream& err);

}  // namespace stlmarl::harness
