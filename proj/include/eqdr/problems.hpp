#pragma once

#include "eqdr/operators.hpp"
#include "eqdr/spec_file.hpp"

#include <optional>
#include <string>
#include <vector>

namespace eqdr {

enum class Provenance { analytic, brute_force };

const char* to_string(Provenance provenance);

struct ProblemInstance {
  std::string name;
  ProblemSpec spec;
  ConvexSet C;
  Bifunction F;
  Bifunction G;
  /// Representative solutions. When solution_set_is_C is set the whole of C
  /// solves the problem and these are only sample points of it.
  std::vector<Vector> known_solutions;
  bool solution_set_is_C = false;
  Provenance provenance = Provenance::analytic;
  /// How the known solutions were obtained and how to re-derive them.
  std::string oracle_spec;
  /// Grid for brute-force scans; lies inside C for bounded sets.
  GridSpec grid;

  /// Distance from x to the known solution set.
  double distance_to_solutions(const Vector& x) const;
};

/// Builds an instance from a spec with no known solutions attached.
ProblemInstance instance_from_spec(std::string name, ProblemSpec spec);

/// The six reference instances, in a fixed order:
/// pure-feasibility, quadratic-1d, vi-over-box, mixed-equilibrium,
/// skew-saddle, operator-bridge.
std::vector<ProblemInstance> corpus();

std::optional<ProblemInstance> find_problem(const std::string& name);

/// Solution of <M x + q, y - x> >= 0 on the box [lo, hi] (d <= 3) by
/// enumerating the 3^d active-set cases of the KKT system. Throws
/// std::runtime_error when no case is consistent (singular M).
Vector box_vi_by_enumeration(const Matrix& M, const Vector& q, const Vector& lo, const Vector& hi);

}  // namespace eqdr
