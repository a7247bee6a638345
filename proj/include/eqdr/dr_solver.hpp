#pragma once

#include "eqdr/operators.hpp"
#include "eqdr/resolvents.hpp"

#include <functional>
#include <string>
#include <vector>

namespace eqdr {

/// n -> lambda_n with every value in (0, 2). Constant and eventually constant
/// schedules satisfy sum lambda_n (2 - lambda_n) = infinity.
class RelaxationSchedule {
 public:
  /// Throws std::invalid_argument unless 0 < lambda < 2.
  static RelaxationSchedule constant(double lambda);
  /// Linear from `from` to `to` over the first `steps` iterations, then `to`.
  static RelaxationSchedule ramp(double from, double to, int steps);

  double operator()(int n) const;
  std::string describe() const;

 private:
  RelaxationSchedule(double from, double to, int steps) : from_(from), to_(to), steps_(steps) {}
  double from_;
  double to_;
  int steps_;
};

/// Summable error sequences n -> e_n, all along the first coordinate axis.
class ErrorSchedule {
 public:
  enum class Kind { zero, geometric, inverse_square };

  static ErrorSchedule zero();
  /// e_n = scale * rho^n * e_1 with 0 <= rho < 1.
  static ErrorSchedule geometric(double scale, double rho);
  /// e_n = scale / (n + 1)^2 * e_1.
  static ErrorSchedule inverse_square(double scale);

  Vector operator()(int n, Eigen::Index dim) const;
  bool is_zero() const { return kind_ == Kind::zero || scale_ == 0.0; }
  Kind kind() const { return kind_; }
  std::string describe() const;

 private:
  ErrorSchedule(Kind kind, double scale, double rho) : kind_(kind), scale_(scale), rho_(rho) {}
  Kind kind_;
  double scale_;
  double rho_;
};

struct SolverConfig {
  double gamma = 1.0;
  RelaxationSchedule lambda = RelaxationSchedule::constant(1.0);
  ErrorSchedule error_a = ErrorSchedule::zero();  // added to the F resolvent
  ErrorSchedule error_b = ErrorSchedule::zero();  // added to the G resolvent
  int max_iter = 10000;
  double residual_tol = 1e-8;
  /// Record every trace_every-th iteration; the last one is always kept.
  int trace_every = 1;
  std::uint64_t seed = 0;
  std::size_t certificate_samples = 256;
  ResolventOptions resolvent;
};

struct IterationRecord {
  int n = 0;
  Vector x;
  Vector y;
  Vector z;
  double residual_dr = 0.0;  // |R_F(R_G x_n) - x_n| with exact resolvents
  double step = 0.0;         // |x_{n+1} - x_n|
};

using IterationTrace = std::vector<IterationRecord>;

enum class SolveStatus { converged, max_iter, inner_failure };

const char* to_string(SolveStatus status);

struct SolveResult {
  Vector x_star;  // last iterate x_n
  Vector y_star;  // J_{gamma G} x_star with no injected error
  SolveStatus status = SolveStatus::max_iter;
  int iterations = 0;  // number of updates performed
  double residual_dr = 0.0;
  /// min over a seeded sample y of C of F(y*,y) + G(y*,y); NaN for the
  /// operator form.
  double certificate = 0.0;
  IterationTrace trace;
  std::string message;
  std::vector<std::string> warnings;
};

struct DrStep {
  Vector y;
  Vector z;
  Vector x_next;
};

using ResolventMap = std::function<Vector(const Vector&)>;

/// y = JG x + b, z = JF(2y - x) + a, x_next = x + lambda (z - y).
DrStep dr_step(const Vector& x, const ResolventMap& JF, const ResolventMap& JG, double lambda,
               const Vector& a, const Vector& b);
DrStep dr_step(const Vector& x, const ResolventOracle& JF, const ResolventOracle& JG,
               double lambda, const Vector& a, const Vector& b);

/// |R_F(R_G x) - x| with exact resolvents.
double residual_dr(const Vector& x, const ResolventOracle& JF, const ResolventOracle& JG);

/// Splitting iteration for: find x in C with F(x,y) + G(x,y) >= 0 on C.
/// F and G must share their set. Failed checks of the standing assumptions
/// are reported in warnings, the solve still runs.
SolveResult solve(const Bifunction& F, const Bifunction& G, const Vector& x0,
                  const SolverConfig& cfg);

/// Same iteration written with operator resolvents: y = J_{gamma B} x + b,
/// z = J_{gamma A}(2y - x) + a. Shares the engine with solve().
SolveResult solve_operators(const MonotoneOperator& A, const MonotoneOperator& B,
                            const Vector& x0, const SolverConfig& cfg);

/// min over `samples` seeded points y of C of F(y_star,y) + G(y_star,y).
double equilibrium_certificate(const Bifunction& F, const Bifunction& G, const Vector& y_star,
                               std::size_t samples, std::uint64_t seed);

class KmNotConverged : public std::runtime_error {
 public:
  KmNotConverged(const std::string& what, Vector last) : std::runtime_error(what), last(std::move(last)) {}
  Vector last;
};

struct KmOptions {
  std::function<double(int)> mu = [](int) { return 0.5; };
  ErrorSchedule c = ErrorSchedule::zero();
  int max_iter = 10000;
  double tol = 1e-10;
};

/// x_{n+1} = x_n + mu_n (T x_n + c_n - x_n) until |T x_n - x_n| <= tol.
/// Throws std::invalid_argument if some mu_n is outside (0, 1) and
/// KmNotConverged after max_iter updates.
Vector km_iterate(const ResolventMap& T, const Vector& x0, const KmOptions& options);

}  // namespace eqdr
