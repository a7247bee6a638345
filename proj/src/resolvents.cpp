#include "eqdr/resolvents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eqdr {

const char* to_string(ResolveMethod method) {
  switch (method) {
    case ResolveMethod::closed_form_projection: return "closed-form-projection";
    case ResolveMethod::closed_form_linear_solve: return "closed-form-linear-solve";
    case ResolveMethod::prox_composition: return "prox-composition";
    case ResolveMethod::inner_iterative: return "inner-iterative";
  }
  return "unknown";
}

namespace {

double sampled_residual(const Bifunction& F, double gamma, const Vector& x, const Vector& z,
                        const std::vector<Vector>& sample) {
  double worst = 0.0;
  for (const auto& y : sample) {
    const double value = gamma * F(z, y) + (z - x).dot(y - z);
    worst = std::max(worst, -value);
  }
  return worst;
}

}  // namespace

InnerSolveReport inner_solve_report(const Bifunction& F, double gamma, const Vector& x,
                                    const ResolventOptions& options,
                                    const std::vector<Vector>& verification) {
  if (!(gamma > 0.0)) throw std::invalid_argument("inner_solve: gamma must be positive");
  require_dimension(x, F.dimension(), "inner_solve");
  require_finite(x, "inner_solve");
  const ConvexSet& C = F.set();
  const double tol = options.inner_tol;
  const AffineHull hull = C.affine_hull();
  const Matrix& B = hull.basis;
  const Eigen::Index k = B.cols();
  const double kd = static_cast<double>(k);

  const Vector z0 = C.project(x);
  if (k == 0) return {z0, sampled_residual(F, gamma, x, z0, verification), 0};

  // Cut data at p in C: g is a subgradient of gamma F(p,.) + <p - x, .> at p
  // and d = g + n* its minimal-norm shift by the normal cone. Strong
  // monotonicity gives <d, z* - p> <= -|z* - p|^2, so |z* - p| <= |d|.
  struct Cut {
    Vector g;
    Vector d;
  };
  auto cut_at = [&](const Vector& p) -> Cut {
    Vector g = gamma * F.subgradient(p, p, options.fd_step) + (p - x);
    Vector d = -C.tangent_projection(p, -g);
    return {std::move(g), std::move(d)};
  };

  Vector best = z0;
  double best_bound = cut_at(z0).d.norm();
  if (best_bound == 0.0) return {z0, sampled_residual(F, gamma, x, z0, verification), 1};

  // Localization ellipsoid {t : (t - c)^T P^{-1} (t - c) <= 1} in hull
  // coordinates z = offset + B t.
  Vector center;
  Matrix P;
  double initial = 0.0;
  auto restart = [&](const Vector& p, double bound) {
    center = B.transpose() * (p - hull.offset);
    initial = 1.5 * bound + 1e-12 * (1.0 + p.norm());
    P = Matrix::Identity(k, k) * (initial * initial);
  };
  restart(z0, best_bound);

  constexpr int kMaxRestarts = 64;
  int restarts = 0;
  double residual = std::numeric_limits<double>::infinity();
  auto restart_or_fail = [&](int iter, const char* why) {
    if (++restarts > kMaxRestarts) {
      residual = sampled_residual(F, gamma, x, best, verification);
      throw InnerSolveError(std::string("inner_solve: ") + why, best, residual, iter);
    }
    restart(best, best_bound);
  };

  for (int iter = 1; iter <= options.inner_max_iter; ++iter) {
    const Vector point = hull.offset + B * center;
    const Vector p = C.project(point);
    const Cut cut = cut_at(p);
    const double bound = cut.d.norm();
    if (bound < best_bound) {
      best = p;
      best_bound = bound;
    }
    const double localization = std::sqrt(P.trace());
    if (localization <= tol || bound <= 1e-3 * tol) {
      residual = sampled_residual(F, gamma, x, p, verification);
      if (residual <= tol) return {p, residual, iter};
      if (localization <= 1e-15 * (1.0 + center.norm())) {
        restart_or_fail(iter, "stalled above tolerance");
        continue;
      }
    }

    // Deepest valid cut {<a, t - c> <= -depth sqrt(a^T P a)}.
    Vector a = B.transpose() * (bound > 0.0 ? cut.d : cut.g);
    double depth = 0.0;
    if (!C.contains(point)) {
      const Vector n = point - p;
      const Vector a_feasible = B.transpose() * n;
      const double depth_feasible = n.squaredNorm() / std::sqrt(a_feasible.dot(P * a_feasible));
      const double norm_d = std::sqrt(a.dot(P * a));
      const double depth_d = norm_d > 0.0 ? cut.d.dot(n) / norm_d : -1.0;
      if (depth_feasible >= depth_d) {
        a = a_feasible;
        depth = depth_feasible;
      } else {
        depth = depth_d;
      }
    }
    const double scale = a.dot(P * a);
    if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(depth)) {
      restart_or_fail(iter, "degenerate localization ellipsoid");
      continue;
    }
    if (depth >= 1.0 - 1e-12) {
      // The ellipsoid meets the cut only at its boundary.
      residual = sampled_residual(F, gamma, x, p, verification);
      if (residual <= tol) return {p, residual, iter};
      restart_or_fail(iter, "localization ellipsoid lost the solution");
      continue;
    }
    const Vector step = P * a / std::sqrt(scale);
    if (k == 1) {
      // Interval [c - w, c + w] cut at c - depth w on the side of a.
      const double w = std::sqrt(P(0, 0));
      const double sign = a[0] > 0.0 ? 1.0 : -1.0;
      const double lo = center[0] - sign * w;
      const double hi = center[0] - sign * depth * w;
      center[0] = 0.5 * (lo + hi);
      const double half = 0.5 * std::abs(hi - lo);
      P(0, 0) = half * half;
    } else {
      center -= ((1.0 + kd * depth) / (kd + 1.0)) * step;
      P = (kd * kd * (1.0 - depth * depth) / (kd * kd - 1.0)) *
          (P - (2.0 * (1.0 + kd * depth) / ((kd + 1.0) * (1.0 + depth))) * step *
                   step.transpose());
      P = (0.5 * (P + P.transpose())).eval();
    }
    if (!P.allFinite() || std::sqrt(P.trace()) > 4.0 * initial) {
      restart_or_fail(iter, "degenerate localization ellipsoid");
    }
  }
  residual = sampled_residual(F, gamma, x, best, verification);
  throw InnerSolveError("inner_solve: no convergence within " +
                            std::to_string(options.inner_max_iter) + " iterations",
                        best, residual, options.inner_max_iter);
}

Vector inner_solve(const Bifunction& F, double gamma, const Vector& x, double tol,
                   int max_iter) {
  ResolventOptions options;
  options.inner_tol = tol;
  options.inner_max_iter = max_iter;
  const auto sample = sample_points(F.set(), options.verification_samples, options.seed);
  return inner_solve_report(F, gamma, x, options, sample).z;
}

namespace {

Bifunction strip_zero_summands(const Bifunction& F) {
  if (F.family() != BifunctionFamily::sum_of_two || F.is_zero()) return F;
  const auto parts = F.summands();
  if (parts[0].is_zero()) return strip_zero_summands(parts[1]);
  if (parts[1].is_zero()) return strip_zero_summands(parts[0]);
  return F;
}

bool is_diagonal(const Matrix& M) {
  Matrix off = M;
  off.diagonal().setZero();
  return off.isZero(0.0);
}

bool applicable(const Bifunction& F, ResolveMethod method) {
  const SetKind kind = F.set().kind();
  switch (method) {
    case ResolveMethod::inner_iterative: return true;
    case ResolveMethod::closed_form_projection: return F.is_zero();
    case ResolveMethod::closed_form_linear_solve:
      if (F.family() != BifunctionFamily::operator_induced) return false;
      return kind == SetKind::whole_space ||
             (kind == SetKind::box && is_diagonal(*F.operator_matrix()));
    case ResolveMethod::prox_composition: {
      const ConvexFunction* f = F.convex_function();
      if (f == nullptr) return false;
      return kind == SetKind::whole_space || f->kind() == ConvexFunction::Kind::affine ||
             (kind == SetKind::box && f->is_separable());
    }
  }
  return false;
}

ResolveMethod dispatch(const Bifunction& F) {
  for (auto m : {ResolveMethod::closed_form_projection, ResolveMethod::closed_form_linear_solve,
                 ResolveMethod::prox_composition}) {
    if (applicable(F, m)) return m;
  }
  return ResolveMethod::inner_iterative;
}

}  // namespace

ResolventOracle::ResolventOracle(Bifunction F, double gamma, ResolventOptions options)
    : F_(std::move(F)),
      effective_(strip_zero_summands(F_)),
      gamma_(gamma),
      options_(std::move(options)) {
  if (!(gamma_ > 0.0) || !std::isfinite(gamma_)) {
    throw std::invalid_argument("ResolventOracle: gamma must be positive and finite");
  }
  if (!(options_.inner_tol > 0.0) || options_.inner_max_iter < 1) {
    throw std::invalid_argument("ResolventOracle: inner_tol and inner_max_iter must be positive");
  }
  if (options_.method) {
    if (!applicable(effective_, *options_.method)) {
      throw std::invalid_argument(std::string("ResolventOracle: method ") +
                                  to_string(*options_.method) + " does not apply to a " +
                                  to_string(F_.family()) + " bifunction over " +
                                  to_string(F_.set().kind()));
    }
    method_ = *options_.method;
  } else {
    method_ = dispatch(effective_);
  }
  verification_ = sample_points(F_.set(), options_.verification_samples, options_.seed);
  if (method_ == ResolveMethod::closed_form_linear_solve &&
      F_.set().kind() == SetKind::whole_space) {
    const auto d = F_.dimension();
    lu_.emplace(Matrix::Identity(d, d) + gamma_ * *effective_.operator_matrix());
  }
}

Vector ResolventOracle::resolve(const Vector& x) const {
  require_dimension(x, F_.dimension(), "resolve");
  require_finite(x, "resolve");
  const ConvexSet& C = F_.set();
  switch (method_) {
    case ResolveMethod::closed_form_projection: return C.project(x);
    case ResolveMethod::closed_form_linear_solve: {
      const Vector rhs = x - gamma_ * *effective_.operator_offset();
      if (lu_) return lu_->solve(rhs);
      const auto [lo, hi] = *C.box_bounds();
      const Vector diag = effective_.operator_matrix()->diagonal();
      const Vector free = (rhs.array() / (1.0 + gamma_ * diag.array())).matrix();
      return project_box(free, lo, hi);
    }
    case ResolveMethod::prox_composition: {
      const ConvexFunction& f = *effective_.convex_function();
      if (C.kind() == SetKind::whole_space) return f.prox(x, gamma_);
      if (f.kind() == ConvexFunction::Kind::affine) return C.project(x - gamma_ * f.linear_term());
      const auto [lo, hi] = *C.box_bounds();
      return f.prox_box(x, gamma_, lo, hi);
    }
    case ResolveMethod::inner_iterative:
      return inner_solve_report(effective_, gamma_, x, options_, verification_).z;
  }
  return x;
}

Vector ResolventOracle::reflect(const Vector& x) const { return 2.0 * resolve(x) - x; }

double ResolventOracle::residual(const Vector& x, const Vector& z) const {
  return sampled_residual(F_, gamma_, x, z, verification_);
}

}  // namespace eqdr
