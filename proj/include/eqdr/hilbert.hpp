#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace eqdr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Default tolerance for set membership tests.
inline constexpr double kMembershipTol = 1e-10;

/// Euclidean inner product. Throws std::invalid_argument on dimension mismatch.
double inner(const Vector& a, const Vector& b);

/// Throws std::invalid_argument if any coordinate is NaN or infinite.
void require_finite(const Vector& x, const char* what);

void require_dimension(const Vector& x, Eigen::Index dim, const char* what);

/// "[a, b, c]" with the given number of significant digits.
std::string format_vector(const Vector& x, int digits = 17);

Vector project_box(const Vector& x, const Vector& lo, const Vector& hi);

/// Euclidean projection onto {y >= 0, sum(y) = 1}.
Vector project_simplex(const Vector& x);

enum class SetKind {
  whole_space,
  box,
  ball,
  halfspace,
  simplex,
  affine_subspace,
  intersection,
};

const char* to_string(SetKind kind);

/// The affine hull {offset + basis * t} of a set, with orthonormal basis
/// columns. Full-dimensional sets report offset 0 and the identity basis.
struct AffineHull {
  Vector offset;
  Matrix basis;
};

/// Nonempty closed convex subset of R^d, described by an exact projection.
///
/// Instances are immutable and cheap to copy. The intersection kind is the
/// only one whose projection is approximate (Dykstra sweeps until the
/// iterate moves less than the configured tolerance).
class ConvexSet {
 public:
  static ConvexSet whole_space(Eigen::Index dim);
  static ConvexSet box(Vector lo, Vector hi);
  static ConvexSet ball(Vector center, double radius);
  /// {x : <normal, x> <= offset}
  static ConvexSet halfspace(Vector normal, double offset);
  static ConvexSet simplex(Eigen::Index dim);
  /// {x : A x = b}; A must have full row rank.
  static ConvexSet affine_subspace(Matrix A, Vector b);
  static ConvexSet intersection(std::vector<ConvexSet> parts,
                                double tol = 1e-10, int max_sweeps = 10000);

  Eigen::Index dimension() const;
  SetKind kind() const;
  bool is_approximate() const;

  Vector project(const Vector& x) const;
  bool contains(const Vector& x, double tol = kMembershipTol) const;

  /// A point of the set used to center random sampling.
  Vector reference_point() const;
  /// Rough spread of the set, used to scale random sampling.
  double sampling_scale() const;
  AffineHull affine_hull() const;

  /// Box bounds, when kind() is box.
  std::optional<std::pair<Vector, Vector>> box_bounds() const;

  /// Projection of u onto the tangent cone at x (x must belong to the set).
  /// Closed form for every kind except intersections, which use a finite
  /// difference of the projection.
  Vector tangent_projection(const Vector& x, const Vector& u) const;
  /// Distance from u to the normal cone at x, |tangent_projection(x, u)|.
  double normal_cone_distance(const Vector& x, const Vector& u) const;

  /// Structural equality: same kind and same parameters.
  bool operator==(const ConvexSet& other) const;

  struct Impl;

 private:
  explicit ConvexSet(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;
};

/// n seeded points of C, drawn as project(reference + scale * gaussian).
std::vector<Vector> sample_points(const ConvexSet& set, std::size_t n,
                                  std::uint64_t seed);

/// Unit vectors: the 2d signed coordinate directions followed by seeded random
/// directions, count in total.
std::vector<Vector> probe_directions(Eigen::Index dim, std::size_t count,
                                     std::uint64_t seed);

}  // namespace eqdr
