#include "eqdr/dr_solver.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace eqdr {

namespace {

void require_relaxation(double lambda) {
  if (!(lambda > 0.0 && lambda < 2.0)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "relaxation parameter %.17g is outside the open interval (0,2)", lambda);
    throw std::invalid_argument(buf);
  }
}

}  // namespace

RelaxationSchedule RelaxationSchedule::constant(double lambda) {
  require_relaxation(lambda);
  return RelaxationSchedule(lambda, lambda, 0);
}

RelaxationSchedule RelaxationSchedule::ramp(double from, double to, int steps) {
  require_relaxation(from);
  require_relaxation(to);
  if (steps < 1) throw std::invalid_argument("ramp: steps must be >= 1");
  return RelaxationSchedule(from, to, steps);
}

double RelaxationSchedule::operator()(int n) const {
  if (n >= steps_) return to_;
  const double t = static_cast<double>(n) / static_cast<double>(steps_);
  return from_ + t * (to_ - from_);
}

std::string RelaxationSchedule::describe() const {
  char buf[128];
  if (steps_ == 0) {
    std::snprintf(buf, sizeof buf, "%.17g", to_);
  } else {
    std::snprintf(buf, sizeof buf, "ramp %.17g %.17g %d", from_, to_, steps_);
  }
  return buf;
}

ErrorSchedule ErrorSchedule::zero() { return ErrorSchedule(Kind::zero, 0.0, 0.0); }

ErrorSchedule ErrorSchedule::geometric(double scale, double rho) {
  if (!std::isfinite(scale) || !(rho >= 0.0 && rho < 1.0)) {
    throw std::invalid_argument("geometric errors need a finite scale and 0 <= rho < 1");
  }
  return ErrorSchedule(Kind::geometric, scale, rho);
}

ErrorSchedule ErrorSchedule::inverse_square(double scale) {
  if (!std::isfinite(scale)) throw std::invalid_argument("inverse_square: non-finite scale");
  return ErrorSchedule(Kind::inverse_square, scale, 0.0);
}

Vector ErrorSchedule::operator()(int n, Eigen::Index dim) const {
  Vector e = Vector::Zero(dim);
  switch (kind_) {
    case Kind::zero: break;
    case Kind::geometric: e[0] = scale_ * std::pow(rho_, n); break;
    case Kind::inverse_square: {
      const double m = static_cast<double>(n) + 1.0;
      e[0] = scale_ / (m * m);
      break;
    }
  }
  return e;
}

std::string ErrorSchedule::describe() const {
  char buf[128];
  switch (kind_) {
    case Kind::zero: return "none";
    case Kind::geometric: std::snprintf(buf, sizeof buf, "geometric %.17g %.17g", scale_, rho_); break;
    case Kind::inverse_square: std::snprintf(buf, sizeof buf, "inverse-square %.17g", scale_); break;
  }
  return buf;
}

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iter: return "max_iter";
    case SolveStatus::inner_failure: return "inner_failure";
  }
  return "unknown";
}

DrStep dr_step(const Vector& x, const ResolventMap& JF, const ResolventMap& JG, double lambda,
               const Vector& a, const Vector& b) {
  require_relaxation(lambda);
  DrStep step;
  step.y = JG(x) + b;
  step.z = JF(2.0 * step.y - x) + a;
  step.x_next = x + lambda * (step.z - step.y);
  return step;
}

DrStep dr_step(const Vector& x, const ResolventOracle& JF, const ResolventOracle& JG,
               double lambda, const Vector& a, const Vector& b) {
  if (JF.gamma() != JG.gamma()) throw std::invalid_argument("dr_step: resolvents use different gamma");
  return dr_step(
      x, [&](const Vector& v) { return JF.resolve(v); },
      [&](const Vector& v) { return JG.resolve(v); }, lambda, a, b);
}

double residual_dr(const Vector& x, const ResolventOracle& JF, const ResolventOracle& JG) {
  if (JF.gamma() != JG.gamma()) {
    throw std::invalid_argument("residual_dr: resolvents use different gamma");
  }
  return (JF.reflect(JG.reflect(x)) - x).norm();
}

namespace {

Vector reflect_with(const ResolventMap& J, const Vector& x) { return 2.0 * J(x) - x; }

SolveResult run_engine(const ResolventMap& JF, const ResolventMap& JG, const Vector& x0,
                       const SolverConfig& cfg) {
  if (!(cfg.gamma > 0.0)) throw std::invalid_argument("solver: gamma must be positive");
  if (cfg.max_iter < 0) throw std::invalid_argument("solver: max_iter must be >= 0");
  if (cfg.trace_every < 1) throw std::invalid_argument("solver: trace_every must be >= 1");
  if (!(cfg.residual_tol > 0.0)) throw std::invalid_argument("solver: residual_tol must be positive");
  require_finite(x0, "solver x0");

  const auto d = x0.size();
  SolveResult result;
  Vector x = x0;
  for (int n = 0;; ++n) {
    const double lambda = cfg.lambda(n);
    const Vector a = cfg.error_a(n, d);
    const Vector b = cfg.error_b(n, d);
    DrStep step;
    double residual = 0.0;
    try {
      step = dr_step(x, JF, JG, lambda, a, b);
      if (cfg.error_a.is_zero() && cfg.error_b.is_zero()) {
        residual = ((2.0 * step.z - (2.0 * step.y - x)) - x).norm();
      } else {
        residual = (reflect_with(JF, reflect_with(JG, x)) - x).norm();
      }
    } catch (const InnerSolveError& e) {
      result.status = SolveStatus::inner_failure;
      result.message = "iteration " + std::to_string(n) + ": " + e.what();
      break;
    }
    result.residual_dr = residual;
    const bool converged = residual <= cfg.residual_tol;
    const bool last = converged || n == cfg.max_iter;
    if (n % cfg.trace_every == 0 || last) {
      result.trace.push_back({n, x, step.y, step.z, residual, (step.x_next - x).norm()});
    }
    if (converged) {
      result.status = SolveStatus::converged;
      break;
    }
    if (n == cfg.max_iter) {
      result.status = SolveStatus::max_iter;
      result.message = "residual above tolerance after " + std::to_string(n) + " iterations";
      break;
    }
    x = step.x_next;
    result.iterations = n + 1;
  }
  result.x_star = x;
  try {
    result.y_star = JG(x);
  } catch (const InnerSolveError& e) {
    result.y_star = e.last_iterate;
    if (result.status == SolveStatus::converged) {
      result.status = SolveStatus::inner_failure;
      result.message = std::string("final resolvent: ") + e.what();
    }
  }
  return result;
}

}  // namespace

SolveResult solve(const Bifunction& F, const Bifunction& G, const Vector& x0,
                  const SolverConfig& cfg) {
  if (!(F.set() == G.set())) throw std::invalid_argument("solve: F and G live on different sets");
  require_dimension(x0, F.dimension(), "solve x0");
  std::vector<std::string> warnings;
  for (const auto* H : {&F, &G}) {
    const char* name = H == &F ? "F" : "G";
    try {
      const auto report = check_assumption1(*H, 64, cfg.seed);
      if (!report.passed) {
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "%s fails the sampled standing assumptions (diagonal %.3g, monotonicity "
                      "%.3g, convexity %.3g, hemicontinuity %.3g)",
                      name, report.diagonal, report.monotonicity, report.convexity,
                      report.hemicontinuity);
        warnings.emplace_back(buf);
      }
    } catch (const std::domain_error& e) {
      warnings.push_back(std::string(name) + ": " + e.what());
    }
  }
  const ResolventOracle JF(F, cfg.gamma, cfg.resolvent);
  const ResolventOracle JG(G, cfg.gamma, cfg.resolvent);
  SolveResult result = run_engine([&](const Vector& v) { return JF.resolve(v); },
                                  [&](const Vector& v) { return JG.resolve(v); }, x0, cfg);
  result.warnings = std::move(warnings);
  result.certificate =
      equilibrium_certificate(F, G, result.y_star, cfg.certificate_samples, cfg.seed);
  return result;
}

SolveResult solve_operators(const MonotoneOperator& A, const MonotoneOperator& B,
                            const Vector& x0, const SolverConfig& cfg) {
  if (A.dimension() != B.dimension()) throw std::invalid_argument("solve_operators: dimension mismatch");
  require_dimension(x0, A.dimension(), "solve_operators x0");
  const double gamma = cfg.gamma;
  SolveResult result = run_engine([&](const Vector& v) { return A.resolvent(gamma, v); },
                                  [&](const Vector& v) { return B.resolvent(gamma, v); }, x0, cfg);
  result.certificate = std::numeric_limits<double>::quiet_NaN();
  return result;
}

double equilibrium_certificate(const Bifunction& F, const Bifunction& G, const Vector& y_star,
                               std::size_t samples, std::uint64_t seed) {
  double lowest = std::numeric_limits<double>::infinity();
  for (const auto& y : sample_points(F.set(), samples, seed)) {
    lowest = std::min(lowest, F(y_star, y) + G(y_star, y));
  }
  return lowest;
}

Vector km_iterate(const ResolventMap& T, const Vector& x0, const KmOptions& options) {
  require_finite(x0, "km_iterate x0");
  Vector x = x0;
  for (int n = 0;; ++n) {
    const Vector Tx = T(x);
    if ((Tx - x).norm() <= options.tol) return x;
    if (n == options.max_iter) {
      throw KmNotConverged("km_iterate: no fixed point within " +
                               std::to_string(options.max_iter) + " iterations",
                           x);
    }
    const double mu = options.mu(n);
    if (!(mu > 0.0 && mu < 1.0)) {
      throw std::invalid_argument("km_iterate: mu_n must lie in (0,1)");
    }
    x = x + mu * (Tx + options.c(n, x.size()) - x);
  }
}

}  // namespace eqdr
