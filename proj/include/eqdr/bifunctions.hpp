#pragma once

#include "eqdr/hilbert.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace eqdr {

/// Convex functions with closed-form proximity operators on boxes.
class ConvexFunction {
 public:
  enum class Kind { quadratic, weighted_l1, affine };

  /// f(y) = 1/2 y^T Q y + q^T y, Q symmetric positive semidefinite.
  static ConvexFunction quadratic(Matrix Q, Vector q);
  /// f(y) = sum_i w_i |y_i|, w >= 0.
  static ConvexFunction weighted_l1(Vector weights);
  /// f(y) = <a, y> + b.
  static ConvexFunction affine(Vector a, double b = 0.0);

  Kind kind() const { return kind_; }
  Eigen::Index dimension() const { return dim_; }

  double operator()(const Vector& y) const;
  /// One subgradient; weighted-L1 uses sign(y) with 0 at 0.
  Vector subgradient(const Vector& y) const;
  /// Vertices of the (polytope) subdifferential at y.
  std::vector<Vector> subdifferential_vertices(const Vector& y) const;
  /// Euclidean distance from u to the subdifferential at y.
  double subdifferential_distance(const Vector& y, const Vector& u) const;

  /// Quadratic with diagonal Q, weighted-L1 and affine are separable.
  bool is_separable() const;

  /// argmin_y gamma f(y) + 1/2 |y - x|^2 over R^d.
  Vector prox(const Vector& x, double gamma) const;
  /// Same minimization restricted to [lo, hi]; requires is_separable().
  Vector prox_box(const Vector& x, double gamma, const Vector& lo,
                  const Vector& hi) const;

  const Matrix& quadratic_matrix() const { return Q_; }
  const Vector& linear_term() const { return q_; }
  const Vector& weights() const { return w_; }
  double constant_term() const { return b_; }

  std::string describe() const;

 private:
  ConvexFunction() = default;

  Kind kind_ = Kind::affine;
  Eigen::Index dim_ = 0;
  Matrix Q_;
  Vector q_;
  Vector w_;
  double b_ = 0.0;
};

enum class BifunctionFamily { generic, operator_induced, function_difference, sum_of_two };

const char* to_string(BifunctionFamily family);

/// A bifunction H : C x C -> R.
///
/// The family tag is declared by the constructor and is what the resolvent
/// module dispatches on. Oracles must be pure and defined on a neighbourhood
/// of C (finite differences step slightly outside).
class Bifunction {
 public:
  using Eval = std::function<double(const Vector& x, const Vector& y)>;
  /// Returns an element of the subdifferential of H(x, .) at y.
  using Subgradient = std::function<Vector(const Vector& x, const Vector& y)>;

  static Bifunction generic(ConvexSet set, Eval eval, Subgradient subgradient = {},
                            std::string label = "generic");
  static Bifunction zero(ConvexSet set);
  /// H(x, y) = <M x + c, y - x>.
  static Bifunction operator_induced(ConvexSet set, Matrix M, Vector c);
  /// H(x, y) = f(y) - f(x).
  static Bifunction function_difference(ConvexSet set, ConvexFunction f);

  double operator()(const Vector& x, const Vector& y) const;

  /// Element of the subdifferential of H(x, .) at y. Central differences with
  /// the given step when the bifunction carries no subgradient oracle.
  Vector subgradient(const Vector& x, const Vector& y, double fd_step = 1e-6) const;
  bool has_subgradient_oracle() const;

  BifunctionFamily family() const;
  const ConvexSet& set() const;
  Eigen::Index dimension() const;
  bool is_zero() const;
  const std::string& label() const;

  /// Operator-induced data (M, c); null for other families.
  const Matrix* operator_matrix() const;
  const Vector* operator_offset() const;
  /// The convex function of a function-difference bifunction, else null.
  const ConvexFunction* convex_function() const;
  /// Both summands of a sum-of-two bifunction, else empty.
  std::vector<Bifunction> summands() const;

  struct Impl;

 private:
  explicit Bifunction(std::shared_ptr<const Impl> impl);
  std::shared_ptr<const Impl> impl_;

  friend Bifunction sum(const Bifunction& F, const Bifunction& G);
};

/// Pointwise sum; both bifunctions must live on the same set.
Bifunction sum(const Bifunction& F, const Bifunction& G);

struct Assumption1Report {
  bool passed = false;
  // Worst observed violation of each condition.
  double diagonal = 0.0;        // |H(x,x)|
  double monotonicity = 0.0;    // H(x,y) + H(y,x)
  double convexity = 0.0;       // midpoint convexity of H(x, .)
  double hemicontinuity = 0.0;  // limsup proxy along (1-e)x + e z
  std::size_t samples = 0;
};

inline constexpr double kAssumptionTol = 1e-10;
inline constexpr double kHemicontinuityTol = 1e-6;

/// Sampled diagnostic of the four standing conditions on a bifunction.
/// Deterministic given seed. Throws std::domain_error naming the offending
/// pair when the oracle returns a non-finite value.
Assumption1Report check_assumption1(const Bifunction& F, std::size_t samples,
                                    std::uint64_t seed);

}  // namespace eqdr
