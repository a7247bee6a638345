#pragma once

#include "eqdr/bifunctions.hpp"
#include "eqdr/dr_solver.hpp"

#include <stdexcept>
#include <string>

namespace eqdr {

/// Parse or validation failure, anchored to a line of the spec text.
/// Line 0 means the problem is not tied to one line (a missing section).
class SpecError : public std::runtime_error {
 public:
  SpecError(const std::string& source, int line, const std::string& message);
  int line() const { return line_; }

 private:
  int line_;
};

struct SetSpec {
  enum class Kind { whole_space, box, ball, halfspace, simplex };
  Kind kind = Kind::whole_space;
  Vector lo, hi;       // box
  Vector center;       // ball
  double radius = 1.0;
  Vector normal;       // halfspace <normal, x> <= offset
  double offset = 0.0;
};

struct FunctionSpec {
  ConvexFunction::Kind kind = ConvexFunction::Kind::quadratic;
  Matrix matrix;     // quadratic
  Vector linear;     // quadratic, affine
  Vector weights;    // weighted-l1
  double constant = 0.0;  // affine
};

struct BifunctionSpec {
  enum class Family { zero, affine_operator, function_difference, operator_bridge };
  Family family = Family::zero;
  /// affine-operator: <M x + c, y - x>. operator-bridge: F_B for B x = M x + c.
  Matrix matrix;
  Vector offset;
  FunctionSpec function;
};

enum class ErrorPreset { none, geometric, inverse_square };

const char* to_string(ErrorPreset preset);
/// Accepts "none", "geometric", "inverse-square".
ErrorPreset parse_error_preset(const std::string& text);

struct SolverSpec {
  double gamma = 1.0;
  /// "1.0" for a constant, "ramp <from> <to> <steps>" for a ramp.
  std::string lambda = "1";
  double tol = 1e-8;
  int max_iter = 10000;
  ErrorPreset error_preset = ErrorPreset::none;
  std::uint64_t seed = 0;
  int trace_every = 1;
};

struct ProblemSpec {
  Eigen::Index dimension = 1;
  SetSpec set;
  BifunctionSpec F;
  BifunctionSpec G;
  SolverSpec solver;
  Vector x0;
};

/// Parses the sectioned key = value format. Every section ([space], [set],
/// [F], [G], [solver], [init]) must appear; [solver] keys default.
/// Throws SpecError naming the offending line.
ProblemSpec parse_spec(const std::string& text, const std::string& source = "<spec>");
ProblemSpec load_spec(const std::string& path);
std::string write_spec(const ProblemSpec& spec);

/// Throws std::invalid_argument on a schedule outside (0,2) or bad syntax.
RelaxationSchedule parse_lambda(const std::string& text);

ConvexSet build_set(const SetSpec& spec, Eigen::Index dimension);
ConvexFunction build_function(const FunctionSpec& spec);
Bifunction build_bifunction(const BifunctionSpec& spec, const ConvexSet& C);
/// Error presets inject scale rho^n e_1 with rho = 1/2 (geometric) or
/// 1/(n+1)^2 e_1 (inverse-square) into both resolvents.
SolverConfig build_config(const SolverSpec& spec);

}  // namespace eqdr
