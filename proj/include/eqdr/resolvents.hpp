#pragma once

#include "eqdr/bifunctions.hpp"

#include <optional>
#include <stdexcept>

namespace eqdr {

enum class ResolveMethod {
  closed_form_projection,
  closed_form_linear_solve,
  prox_composition,
  inner_iterative,
};

const char* to_string(ResolveMethod method);

struct ResolventOptions {
  double inner_tol = 1e-9;
  int inner_max_iter = 50000;
  /// Overrides the family-based dispatch; must be applicable to the bifunction.
  std::optional<ResolveMethod> method;
  std::size_t verification_samples = 64;
  std::uint64_t seed = 7;
  /// Central-difference step for bifunctions without a subgradient oracle.
  double fd_step = 1e-6;
};

/// Raised when the inner solver runs out of iterations. Carries the last
/// iterate so a caller may treat it as an inexact resolvent evaluation.
class InnerSolveError : public std::runtime_error {
 public:
  InnerSolveError(const std::string& what, Vector last_iterate, double residual,
                  int iterations)
      : std::runtime_error(what),
        last_iterate(std::move(last_iterate)),
        residual(residual),
        iterations(iterations) {}

  Vector last_iterate;
  double residual;
  int iterations;
};

struct InnerSolveReport {
  Vector z;
  double residual = 0.0;
  int iterations = 0;
};

/// Solves for z in C with gamma F(z,y) + <z - x, y - z> >= 0 on C.
///
/// Ellipsoid method in the affine hull of C. The auxiliary problem is
/// 1-strongly monotone: at p in C, with g a subgradient of
/// y -> gamma F(p,y) + <p - x, y> at p and d the least-norm element of
/// g + N_C(p), every solution satisfies <d, z* - p> <= -|z* - p|^2, so
/// |z* - p| <= |d| and {<d, z - p> <= 0} keeps it. Infeasible centers are cut
/// by the deeper of that cut and the separating cut of the projection. The
/// ellipsoid restarts around the best point when it degenerates. Stops once
/// the localization radius (or |d|) is small and the sampled residual is
/// below tol.
InnerSolveReport inner_solve_report(const Bifunction& F, double gamma, const Vector& x,
                                    const ResolventOptions& options,
                                    const std::vector<Vector>& verification);

Vector inner_solve(const Bifunction& F, double gamma, const Vector& x, double tol,
                   int max_iter);

/// J_{gamma F} with the evaluation strategy fixed at construction.
class ResolventOracle {
 public:
  ResolventOracle(Bifunction F, double gamma, ResolventOptions options = {});

  Vector resolve(const Vector& x) const;
  /// 2 resolve(x) - x.
  Vector reflect(const Vector& x) const;
  /// max over the verification sample of -(gamma F(z,y) + <z - x, y - z>).
  double residual(const Vector& x, const Vector& z) const;

  ResolveMethod method() const { return method_; }
  double gamma() const { return gamma_; }
  const Bifunction& bifunction() const { return F_; }
  const ResolventOptions& options() const { return options_; }
  const std::vector<Vector>& verification_sample() const { return verification_; }

 private:
  Bifunction F_;
  Bifunction effective_;  // F with zero summands stripped
  double gamma_;
  ResolventOptions options_;
  ResolveMethod method_;
  std::vector<Vector> verification_;
  std::optional<Eigen::PartialPivLU<Matrix>> lu_;
};

}  // namespace eqdr
