#include "stlmarl/harness/monitor.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "stlmarl/stl/parser.hpp"
#include "stlmarl/stl/robustness.hpp"
#include "stlmarl/stl/trace.hpp"

namespace stlmarl::harness {

int run_monitor(const std::string& formula_path, const std::string& trace_path,
                std::size_t t, std::ostream& out, std::ostream& err) {
  std::string text;
  {
    std::ifstream in(formula_path);
    if (!in) {
      err << "error: cannot open formula file '" << formula_path << "'\n";
      return 2;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  }

  stl::FormulaPtr formula;
  try {
    formula = stl::parse_formula(text);
  } catch (const stl::ParseError& e) {
    err << "formula error: " << e.what() << "\n";
    return 2;
  }

  stl::Trace trace;
  try {
    trace = stl::read_trace_csv(trace_path);
  } catch (const stl::TraceError& e) {
    err << "trace error: " << e.what() << "\n";
    return 2;
  }

  try {
    // Horizon-relative bounds resolve against the full trace length.
    auto inst = stl::instantiate_horizon(formula, static_cast<int>(trace.length));
    double rho = stl::robustness(*inst, trace, t);
    bool sat = rho >= 0.0;
    out << "rho = " << rho << "\n" << (sat ? "satisfied" : "violated") << "\n";
    return sat ? 0 : 1;
  } catch (const stl::EvalError& e) {
    err << "evaluation error: " << e.what() << "\n";
    return 2;
  } catch (const stl::FormulaError& e) {
    err << "formula error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace stlmarl::harness
