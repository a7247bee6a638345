#include "eqdr/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>
#include <string>
#include <variant>

namespace eqdr {

double inner(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("inner: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  return a.dot(b);
}

void require_finite(const Vector& x, const char* what) {
  if (!x.allFinite()) {
    throw std::invalid_argument(std::string(what) + ": non-finite coordinate");
  }
}

void require_dimension(const Vector& x, Eigen::Index dim, const char* what) {
  if (x.size() != dim) {
    throw std::invalid_argument(std::string(what) + ": expected dimension " +
                                std::to_string(dim) + ", got " +
                                std::to_string(x.size()));
  }
}

std::string format_vector(const Vector& x, int digits) {
  std::string out = "[";
  char buf[64];
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, x[i]);
    if (i > 0) out += ", ";
    out += buf;
  }
  return out + "]";
}

Vector project_box(const Vector& x, const Vector& lo, const Vector& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

Vector project_simplex(const Vector& x) {
  require_finite(x, "project_simplex");
  const auto n = x.size();
  if (n < 1) throw std::invalid_argument("project_simplex: empty vector");
  // Sort-and-threshold: find tau with sum(max(x - tau, 0)) = 1.
  std::vector<double> sorted(x.data(), x.data() + n);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) tau = candidate;
  }
  Vector y = (x.array() - tau).max(0.0).matrix();
  // Remove the rounding drift so the result sums to one.
  const double total = y.sum();
  if (total > 0.0) y /= total;
  return y;
}

const char* to_string(SetKind kind) {
  switch (kind) {
    case SetKind::whole_space: return "whole-space";
    case SetKind::box: return "box";
    case SetKind::ball: return "ball";
    case SetKind::halfspace: return "halfspace";
    case SetKind::simplex: return "simplex";
    case SetKind::affine_subspace: return "affine";
    case SetKind::intersection: return "intersection";
  }
  return "unknown";
}

namespace {

struct WholeSpace {};
struct Box {
  Vector lo, hi;
};
struct Ball {
  Vector center;
  double radius;
};
struct Halfspace {
  Vector normal;
  double offset;
};
struct Simplex {};
struct Affine {
  Matrix A;
  Vector b;
  Matrix gram_inverse;  // (A A^T)^{-1}
  AffineHull hull;
};
struct Intersection {
  std::vector<ConvexSet> parts;
  double tol;
  int max_sweeps;
};

Matrix orthonormal_complement_of_ones(Eigen::Index n) {
  // Columns span {v : sum(v) = 0}.
  Matrix raw(n, n - 1);
  raw.setZero();
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    raw(j, j) = 1.0;
    raw(n - 1, j) = -1.0;
  }
  Eigen::HouseholderQR<Matrix> qr(raw);
  return qr.householderQ() * Matrix::Identity(n, n - 1);
}

}  // namespace

struct ConvexSet::Impl {
  Eigen::Index dim;
  std::variant<WholeSpace, Box, Ball, Halfspace, Simplex, Affine, Intersection>
      shape;
};

ConvexSet::ConvexSet(std::shared_ptr<const Impl> impl)
    : impl_(std::move(impl)) {}

ConvexSet ConvexSet::whole_space(Eigen::Index dim) {
  if (dim < 1) throw std::invalid_argument("whole_space: dimension must be >= 1");
  return ConvexSet(std::make_shared<Impl>(Impl{dim, WholeSpace{}}));
}

ConvexSet ConvexSet::box(Vector lo, Vector hi) {
  if (lo.size() < 1 || lo.size() != hi.size()) {
    throw std::invalid_argument("box: bound dimensions must match and be >= 1");
  }
  if (lo.hasNaN() || hi.hasNaN()) throw std::invalid_argument("box: NaN bound");
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (lo[i] > hi[i]) {
      throw std::invalid_argument("box: lower bound exceeds upper bound in coordinate " +
                                  std::to_string(i));
    }
  }
  const auto dim = lo.size();
  return ConvexSet(
      std::make_shared<Impl>(Impl{dim, Box{std::move(lo), std::move(hi)}}));
}

ConvexSet ConvexSet::ball(Vector center, double radius) {
  require_finite(center, "ball center");
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("ball: radius must be finite and nonnegative");
  }
  const auto dim = center.size();
  return ConvexSet(
      std::make_shared<Impl>(Impl{dim, Ball{std::move(center), radius}}));
}

ConvexSet ConvexSet::halfspace(Vector normal, double offset) {
  require_finite(normal, "halfspace normal");
  if (normal.norm() == 0.0) throw std::invalid_argument("halfspace: zero normal");
  const auto dim = normal.size();
  return ConvexSet(
      std::make_shared<Impl>(Impl{dim, Halfspace{std::move(normal), offset}}));
}

ConvexSet ConvexSet::simplex(Eigen::Index dim) {
  if (dim < 1) throw std::invalid_argument("simplex: dimension must be >= 1");
  return ConvexSet(std::make_shared<Impl>(Impl{dim, Simplex{}}));
}

ConvexSet ConvexSet::affine_subspace(Matrix A, Vector b) {
  if (A.rows() != b.size() || A.rows() < 1 || A.cols() < 1) {
    throw std::invalid_argument("affine_subspace: A rows must match b");
  }
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeFullV);
  svd.setThreshold(1e-12);
  if (svd.rank() != A.rows()) {
    throw std::invalid_argument("affine_subspace: A must have full row rank");
  }
  Matrix gram_inverse = (A * A.transpose()).inverse();
  const auto dim = A.cols();
  const auto rank = svd.rank();
  Vector offset = A.transpose() * (gram_inverse * b);
  Matrix basis = svd.matrixV().rightCols(dim - rank);
  Affine shape{std::move(A), std::move(b), std::move(gram_inverse),
               AffineHull{std::move(offset), std::move(basis)}};
  return ConvexSet(std::make_shared<Impl>(Impl{dim, std::move(shape)}));
}

ConvexSet ConvexSet::intersection(std::vector<ConvexSet> parts, double tol,
                                  int max_sweeps) {
  if (parts.empty()) throw std::invalid_argument("intersection: no parts");
  const auto dim = parts.front().dimension();
  for (const auto& p : parts) {
    if (p.dimension() != dim) {
      throw std::invalid_argument("intersection: parts differ in dimension");
    }
  }
  if (!(tol > 0.0) || max_sweeps < 1) {
    throw std::invalid_argument("intersection: tol and max_sweeps must be positive");
  }
  return ConvexSet(std::make_shared<Impl>(
      Impl{dim, Intersection{std::move(parts), tol, max_sweeps}}));
}

Eigen::Index ConvexSet::dimension() const { return impl_->dim; }

SetKind ConvexSet::kind() const {
  return static_cast<SetKind>(impl_->shape.index());
}

bool ConvexSet::is_approximate() const {
  return kind() == SetKind::intersection;
}

namespace {

Vector project_impl(const ConvexSet::Impl& impl, const Vector& x) {
  struct Visitor {
    const Vector& x;
    Vector operator()(const WholeSpace&) const { return x; }
    Vector operator()(const Box& s) const { return project_box(x, s.lo, s.hi); }
    Vector operator()(const Ball& s) const {
      const Vector d = x - s.center;
      const double n = d.norm();
      if (n <= s.radius) return x;
      return s.center + (s.radius / n) * d;
    }
    Vector operator()(const Halfspace& s) const {
      const double excess = s.normal.dot(x) - s.offset;
      if (excess <= 0.0) return x;
      return x - (excess / s.normal.squaredNorm()) * s.normal;
    }
    Vector operator()(const Simplex&) const { return project_simplex(x); }
    Vector operator()(const Affine& s) const {
      return x - s.A.transpose() * (s.gram_inverse * (s.A * x - s.b));
    }
    Vector operator()(const Intersection& s) const {
      // Dykstra's alternating projections; converges to the projection onto
      // the intersection, unlike plain alternating projections.
      const std::size_t m = s.parts.size();
      std::vector<Vector> corrections(m, Vector::Zero(x.size()));
      Vector current = x;
      for (int sweep = 0; sweep < s.max_sweeps; ++sweep) {
        const Vector before = current;
        double moved = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          const Vector shifted = current + corrections[i];
          const Vector next = s.parts[i].project(shifted);
          const Vector correction = shifted - next;
          moved = std::max(moved, (correction - corrections[i]).norm());
          corrections[i] = correction;
          current = next;
        }
        // Stopping on the iterate alone ends slow sweeps early.
        if (std::max(moved, (current - before).norm()) <= s.tol) break;
      }
      return current;
    }
  };
  return std::visit(Visitor{x}, impl.shape);
}

}  // namespace

Vector ConvexSet::project(const Vector& x) const {
  require_dimension(x, impl_->dim, "ConvexSet::project");
  return project_impl(*impl_, x);
}

bool ConvexSet::contains(const Vector& x, double tol) const {
  if (x.size() != impl_->dim || !x.allFinite()) return false;
  struct Visitor {
    const Vector& x;
    double tol;
    bool operator()(const WholeSpace&) const { return true; }
    bool operator()(const Box& s) const {
      return ((x - s.lo).array() >= -tol).all() &&
             ((s.hi - x).array() >= -tol).all();
    }
    bool operator()(const Ball& s) const {
      return (x - s.center).norm() <= s.radius + tol;
    }
    bool operator()(const Halfspace& s) const {
      return s.normal.dot(x) - s.offset <= tol * s.normal.norm();
    }
    bool operator()(const Simplex&) const {
      return (x.array() >= -tol).all() && std::abs(x.sum() - 1.0) <= tol;
    }
    bool operator()(const Affine& s) const {
      return (s.A * x - s.b).norm() <= tol;
    }
    bool operator()(const Intersection& s) const {
      return std::all_of(s.parts.begin(), s.parts.end(),
                         [&](const ConvexSet& p) { return p.contains(x, tol); });
    }
  };
  return std::visit(Visitor{x, tol}, impl_->shape);
}

Vector ConvexSet::reference_point() const {
  const auto d = impl_->dim;
  struct Visitor {
    Eigen::Index d;
    Vector operator()(const WholeSpace&) const { return Vector::Zero(d); }
    Vector operator()(const Box& s) const {
      Vector mid(d);
      for (Eigen::Index i = 0; i < d; ++i) {
        const bool lo_finite = std::isfinite(s.lo[i]);
        const bool hi_finite = std::isfinite(s.hi[i]);
        if (lo_finite && hi_finite) mid[i] = 0.5 * (s.lo[i] + s.hi[i]);
        else if (lo_finite) mid[i] = s.lo[i];
        else if (hi_finite) mid[i] = s.hi[i];
        else mid[i] = 0.0;
      }
      return mid;
    }
    Vector operator()(const Ball& s) const { return s.center; }
    Vector operator()(const Halfspace& s) const {
      const Vector origin = Vector::Zero(d);
      const double excess = -s.offset;
      if (excess <= 0.0) return origin;
      return origin - (excess / s.normal.squaredNorm()) * s.normal;
    }
    Vector operator()(const Simplex&) const {
      return Vector::Constant(d, 1.0 / static_cast<double>(d));
    }
    Vector operator()(const Affine& s) const { return s.hull.offset; }
    Vector operator()(const Intersection& s) const {
      Vector seed = Vector::Zero(d);
      for (const auto& p : s.parts) seed += p.reference_point();
      seed /= static_cast<double>(s.parts.size());
      return seed;
    }
  };
  const Vector ref = std::visit(Visitor{d}, impl_->shape);
  return kind() == SetKind::intersection ? project(ref) : ref;
}

double ConvexSet::sampling_scale() const {
  struct Visitor {
    double operator()(const WholeSpace&) const { return 1.0; }
    double operator()(const Box& s) const {
      double half = 0.0;
      for (Eigen::Index i = 0; i < s.lo.size(); ++i) {
        const double w = s.hi[i] - s.lo[i];
        if (std::isfinite(w)) half = std::max(half, 0.5 * w);
        else half = std::max(half, 1.0);
      }
      return std::max(half, 1e-3);
    }
    double operator()(const Ball& s) const { return std::max(s.radius, 1e-3); }
    double operator()(const Halfspace&) const { return 1.0; }
    double operator()(const Simplex&) const { return 1.0; }
    double operator()(const Affine&) const { return 1.0; }
    double operator()(const Intersection& s) const {
      double scale = 0.0;
      for (const auto& p : s.parts) scale = std::max(scale, p.sampling_scale());
      return scale;
    }
  };
  return std::visit(Visitor{}, impl_->shape);
}

AffineHull ConvexSet::affine_hull() const {
  const auto d = impl_->dim;
  const AffineHull full{Vector::Zero(d), Matrix::Identity(d, d)};
  switch (kind()) {
    case SetKind::box: {
      const auto& s = std::get<Box>(impl_->shape);
      std::vector<Eigen::Index> free;
      for (Eigen::Index i = 0; i < d; ++i) {
        if (s.lo[i] < s.hi[i]) free.push_back(i);
      }
      if (static_cast<Eigen::Index>(free.size()) == d) return full;
      AffineHull hull{Vector::Zero(d),
                      Matrix::Zero(d, static_cast<Eigen::Index>(free.size()))};
      for (Eigen::Index i = 0; i < d; ++i) {
        if (!(s.lo[i] < s.hi[i])) hull.offset[i] = s.lo[i];
      }
      for (std::size_t j = 0; j < free.size(); ++j) {
        hull.basis(free[j], static_cast<Eigen::Index>(j)) = 1.0;
      }
      return hull;
    }
    case SetKind::ball:
      if (std::get<Ball>(impl_->shape).radius == 0.0) {
        return AffineHull{std::get<Ball>(impl_->shape).center, Matrix(d, 0)};
      }
      return full;
    case SetKind::simplex:
      return AffineHull{reference_point(), orthonormal_complement_of_ones(d)};
    case SetKind::affine_subspace:
      return std::get<Affine>(impl_->shape).hull;
    case SetKind::intersection: {
      // Intersect the hulls of affine-constrained parts: stack their
      // orthogonal-complement constraints and take the common null space.
      const auto& s = std::get<Intersection>(impl_->shape);
      Matrix constraints(0, d);
      for (const auto& p : s.parts) {
        const AffineHull h = p.affine_hull();
        if (h.basis.cols() == d) continue;
        Eigen::JacobiSVD<Matrix> svd(h.basis.transpose(), Eigen::ComputeFullV);
        const Matrix normals = svd.matrixV().rightCols(d - h.basis.cols());
        Matrix stacked(constraints.rows() + normals.cols(), d);
        stacked << constraints, normals.transpose();
        constraints = std::move(stacked);
      }
      if (constraints.rows() == 0) return full;
      Eigen::JacobiSVD<Matrix> svd(constraints, Eigen::ComputeFullV);
      svd.setThreshold(1e-10);
      const auto rank = svd.rank();
      return AffineHull{reference_point(), svd.matrixV().rightCols(d - rank)};
    }
    default:
      return full;
  }
}

std::optional<std::pair<Vector, Vector>> ConvexSet::box_bounds() const {
  if (kind() != SetKind::box) return std::nullopt;
  const auto& s = std::get<Box>(impl_->shape);
  return std::make_pair(s.lo, s.hi);
}

namespace {

// Tangent cone of a half-space with outward normal n, at a boundary point.
Vector half_tangent(const Vector& u, const Vector& n) {
  const double along = u.dot(n) / n.squaredNorm();
  if (along <= 0.0) return u;
  return u - along * n;
}

Vector simplex_tangent(const Vector& x, const Vector& u) {
  // N(x) = {lambda * 1 - mu : mu >= 0, mu_i = 0 where x_i > 0}; the tangent
  // component is u - P_N(u), found by bisection on lambda.
  auto component = [&](double lambda, Eigen::Index i) {
    const double r = u[i] - lambda;
    return x[i] > kMembershipTol ? r : std::max(r, 0.0);
  };
  auto slope = [&](double lambda) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) s += component(lambda, i);
    return s;
  };
  double lo = u.minCoeff() - 1.0;
  double hi = u.maxCoeff() + 1.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (slope(mid) > 0.0) lo = mid;
    else hi = mid;
  }
  const double lambda = 0.5 * (lo + hi);
  Vector t(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) t[i] = component(lambda, i);
  return t;
}

}  // namespace

Vector ConvexSet::tangent_projection(const Vector& x, const Vector& u) const {
  require_dimension(x, impl_->dim, "tangent_projection");
  require_dimension(u, impl_->dim, "tangent_projection");
  const double tol = kMembershipTol;
  switch (kind()) {
    case SetKind::whole_space:
      return u;
    case SetKind::box: {
      const auto& s = std::get<Box>(impl_->shape);
      Vector t(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const bool at_lo = x[i] <= s.lo[i] + tol;
        const bool at_hi = x[i] >= s.hi[i] - tol;
        if (at_lo && at_hi) t[i] = 0.0;
        else if (at_lo) t[i] = std::max(u[i], 0.0);
        else if (at_hi) t[i] = std::min(u[i], 0.0);
        else t[i] = u[i];
      }
      return t;
    }
    case SetKind::ball: {
      const auto& s = std::get<Ball>(impl_->shape);
      if (s.radius == 0.0) return Vector::Zero(x.size());
      const Vector d = x - s.center;
      if (d.norm() < s.radius - tol) return u;
      return half_tangent(u, d);
    }
    case SetKind::halfspace: {
      const auto& s = std::get<Halfspace>(impl_->shape);
      if (s.normal.dot(x) - s.offset < -tol * s.normal.norm()) return u;
      return half_tangent(u, s.normal);
    }
    case SetKind::simplex:
      return simplex_tangent(x, u);
    case SetKind::affine_subspace: {
      const auto& s = std::get<Affine>(impl_->shape);
      return u - s.A.transpose() * (s.gram_inverse * (s.A * u));
    }
    case SetKind::intersection: {
      // Directional derivative of the projection; exact for polyhedral parts
      // once the step is small enough.
      const double norm = u.norm();
      if (norm == 0.0) return u;
      const double t = 1e-4 * std::max(1.0, x.norm()) / norm;
      return (project(x + t * u) - x) / t;
    }
  }
  return u;
}

double ConvexSet::normal_cone_distance(const Vector& x, const Vector& u) const {
  // Moreau: u = P_T(u) + P_N(u) with orthogonal parts.
  return tangent_projection(x, u).norm();
}

namespace {

template <typename A, typename B>
bool same_entries(const A& a, const B& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

}  // namespace

bool ConvexSet::operator==(const ConvexSet& other) const {
  if (impl_ == other.impl_) return true;
  if (impl_->dim != other.impl_->dim || kind() != other.kind()) return false;
  struct Visitor {
    const ConvexSet::Impl& rhs;
    bool operator()(const WholeSpace&) const { return true; }
    bool operator()(const Box& s) const {
      const auto& o = std::get<Box>(rhs.shape);
      return same_entries(s.lo, o.lo) && same_entries(s.hi, o.hi);
    }
    bool operator()(const Ball& s) const {
      const auto& o = std::get<Ball>(rhs.shape);
      return same_entries(s.center, o.center) && s.radius == o.radius;
    }
    bool operator()(const Halfspace& s) const {
      const auto& o = std::get<Halfspace>(rhs.shape);
      return same_entries(s.normal, o.normal) && s.offset == o.offset;
    }
    bool operator()(const Simplex&) const { return true; }
    bool operator()(const Affine& s) const {
      const auto& o = std::get<Affine>(rhs.shape);
      return same_entries(s.A, o.A) && same_entries(s.b, o.b);
    }
    bool operator()(const Intersection& s) const {
      const auto& o = std::get<Intersection>(rhs.shape);
      return s.parts == o.parts && s.tol == o.tol && s.max_sweeps == o.max_sweeps;
    }
  };
  return std::visit(Visitor{*other.impl_}, impl_->shape);
}

std::vector<Vector> sample_points(const ConvexSet& set, std::size_t n,
                                  std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const Vector ref = set.reference_point();
  const double scale = set.sampling_scale();
  std::vector<Vector> points;
  points.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    Vector g(set.dimension());
    for (Eigen::Index i = 0; i < g.size(); ++i) g[i] = normal(rng);
    points.push_back(set.project(ref + scale * g));
  }
  return points;
}

std::vector<Vector> probe_directions(Eigen::Index dim, std::size_t count,
                                     std::uint64_t seed) {
  std::vector<Vector> dirs;
  dirs.reserve(count);
  for (Eigen::Index i = 0; i < dim && dirs.size() < count; ++i) {
    dirs.push_back(Vector::Unit(dim, i));
    if (dirs.size() < count) dirs.push_back(-Vector::Unit(dim, i));
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  while (dirs.size() < count) {
    Vector g(dim);
    for (Eigen::Index i = 0; i < dim; ++i) g[i] = normal(rng);
    const double n = g.norm();
    if (n > 1e-12) dirs.push_back(g / n);
  }
  return dirs;
}

}  // namespace eqdr
