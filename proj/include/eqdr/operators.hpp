#pragma once

#include "eqdr/resolvents.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace eqdr {

/// Default tolerance of operator membership tests, in units of u.
inline constexpr double kOperatorTol = 1e-8;

/// A maximally monotone operator on R^d.
///
/// Always carries a resolvent and a membership test. The point-to-set
/// evaluation is optional and, when present, returns a finite set whose
/// convex hull is A x (vertices for polyhedral images, one point for
/// single-valued maps, empty outside the domain).
class MonotoneOperator {
 public:
  using Resolvent = std::function<Vector(double gamma, const Vector& x)>;
  using Evaluate = std::function<std::vector<Vector>(const Vector& x)>;
  /// Membership test at a fixed x, approximately dist(u, A x) <= tol.
  using MembershipAt = std::function<bool(const Vector& u, double tol)>;
  /// Builds the test for one x, so that repeated queries share the work.
  using Membership = std::function<MembershipAt(const Vector& x)>;

  MonotoneOperator(ConvexSet domain, Resolvent resolvent, Membership membership,
                   Evaluate evaluate = {}, std::string label = "operator");

  Eigen::Index dimension() const { return domain_.dimension(); }
  const ConvexSet& domain_set() const { return domain_; }
  const std::string& label() const { return label_; }

  /// (Id + gamma A)^{-1} x.
  Vector resolvent(double gamma, const Vector& x) const;
  bool contains(const Vector& x, const Vector& u, double tol = kOperatorTol) const;
  MembershipAt membership_at(const Vector& x) const;

  bool has_evaluate() const { return static_cast<bool>(evaluate_); }
  /// Throws std::logic_error when the operator has no evaluation oracle.
  std::vector<Vector> evaluate(const Vector& x) const;

  /// x -> M x + c, when the operator is known to be affine and single valued.
  struct Affine {
    Matrix M;
    Vector c;
  };
  const std::optional<Affine>& affine_form() const { return affine_; }
  MonotoneOperator with_affine_form(Matrix M, Vector c) const;

 private:
  ConvexSet domain_;
  Resolvent resolvent_;
  Membership membership_;
  Evaluate evaluate_;
  std::string label_;
  std::optional<Affine> affine_;
};

struct MembershipOptions {
  std::size_t samples = 256;
  std::uint64_t seed = 11;
};

/// A_F: u in A_F x iff x in C and F(x,y) + <x - y, u> >= 0 for all y in C.
///
/// The resolvent is J_{gamma F}. Membership is checked on a sample of y that
/// starts with short probes around x and continues with points spread over C;
/// u is accepted when F(x,y) + <x - y, u> >= -tol |y - x| on every sample,
/// which makes tol a distance in u. An evaluation oracle is attached when C
/// is the whole space and F is operator induced or a function difference.
MonotoneOperator operator_from_bifunction(const Bifunction& F, ResolventOptions options = {},
                                          MembershipOptions membership = {});

/// N_C. Resolvent is the projection; evaluate gives {0} at interior points,
/// the empty set outside C and throws std::domain_error on the boundary
/// (the image is an unbounded cone there).
MonotoneOperator normal_cone(const ConvexSet& C);

/// x -> M x + c on R^d; M must be monotone (M + M^T positive semidefinite).
MonotoneOperator affine_operator(Matrix M, Vector c);

/// Subdifferential of a supported convex function on R^d.
MonotoneOperator subdifferential(const ConvexFunction& f);

/// B + N_C for B with an evaluation oracle. Membership: some v in Bx has
/// dist(u - v, N_C(x)) <= tol (exact for single-valued B). The resolvent is
/// J_{gamma F_B}.
MonotoneOperator plus_normal_cone(const MonotoneOperator& B, const ConvexSet& C);

/// F_A(x,y) = max over u in A x of <y - x, u>, on C.
/// Throws std::invalid_argument if A has no evaluation oracle. The returned
/// bifunction throws std::domain_error at points where A x is empty. Affine
/// operators give an operator-induced bifunction, others a generic one whose
/// subgradient oracle is the maximizing u.
Bifunction bifunction_from_operator(const MonotoneOperator& A, const ConvexSet& C);

/// Fraction of sampled points of C at which A has a nonempty, finite image.
/// A value below 1 means C is not inside the domain of A.
double sampled_domain_coverage(const MonotoneOperator& A, const ConvexSet& C,
                               std::size_t samples, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Brute-force scans for dimensions 1 and 2.

/// Regular grid lo + k * step, inclusive of hi up to rounding.
struct GridSpec {
  Vector lo;
  Vector hi;
  double step = 1e-2;
};

std::vector<Vector> grid_points(const GridSpec& grid);

struct ZeroScanOptions {
  double u_lo = -10.0;
  double u_hi = 10.0;
  double u_step = 1e-2;
  /// Membership tolerance is u_step * sqrt(d) / 2 + lipschitz_scale * step,
  /// covering the u-grid rounding plus the graph moving over half a cell.
  double lipschitz_scale = 0.5;
  unsigned threads = 0;  // 0: hardware concurrency
};

/// Grid points x for which some grid u has u in A x and -u in B x.
std::vector<Vector> zeros_bruteforce(const MonotoneOperator& A, const MonotoneOperator& B,
                                     const GridSpec& grid, const ZeroScanOptions& options = {});

enum class SlackRule {
  /// tol = factor * step.
  fixed,
  /// tol(x) = sum over axes of half the larger change of F(., y_min) between
  /// x and its grid neighbours, y_min the grid minimizer of F(x, .).
  local_lipschitz,
};

struct EquilibriumScanOptions {
  SlackRule rule = SlackRule::fixed;
  double factor = 10.0;
  unsigned threads = 0;
};

/// Grid points x in C with min over grid points y in C of F(x,y) >= -tol.
std::vector<Vector> equilibrium_bruteforce(const Bifunction& F, const GridSpec& grid,
                                           const EquilibriumScanOptions& options = {});

/// Hausdorff distance between finite point sets; 0 for two empty sets and
/// infinity when exactly one is empty.
double hausdorff_distance(const std::vector<Vector>& a, const std::vector<Vector>& b);

}  // namespace eqdr
