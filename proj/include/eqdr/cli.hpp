#pragma once

#include "eqdr/dr_solver.hpp"
#include "eqdr/problems.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace eqdr::cli {

/// Exit codes of the tool.
inline constexpr int kExitConverged = 0;
inline constexpr int kExitSpecError = 1;
inline constexpr int kExitMaxIter = 2;
inline constexpr int kExitInnerFailure = 3;

int exit_code(SolveStatus status);

/// Writes the trace: header `n,residual_dr,step,certificate`, one row per
/// recorded iteration (the certificate column is evaluated at y_n), then a
/// blank line and the final-solution block of `key,value` rows.
void write_trace(std::ostream& out, const ProblemInstance& problem, const SolveResult& result,
                 const SolverConfig& cfg);

/// Runs one instance with its spec's solver settings.
SolveResult run_instance(const ProblemInstance& problem, SolverConfig& cfg_out);

/// Entry point without the program name: args are argv[1..].
int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eqdr::cli
