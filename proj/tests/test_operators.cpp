#include "doctest.h"

#include "eqdr/operators.hpp"
#include "eqdr/problems.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace eqdr;
using testutil::vec;

namespace {

Bifunction square_gap(const ConvexSet& C) {
  return Bifunction::function_difference(
      C, ConvexFunction::quadratic(Matrix::Constant(1, 1, 2.0), vec({0.0})));
}

GridSpec line(double lo, double hi, double step) { return {vec({lo}), vec({hi}), step}; }

// Every point of `got` is within `radius` of `center` and got is nonempty.
bool near_point(const std::vector<Vector>& got, const Vector& center, double radius) {
  if (got.empty()) return false;
  for (const auto& x : got) {
    if ((x - center).norm() > radius) return false;
  }
  return true;
}

}  // namespace

TEST_SUITE("operators") {

TEST_CASE("operator_from_bifunction membership examples") {
  const ConvexSet R = ConvexSet::whole_space(1);
  const MonotoneOperator AG = operator_from_bifunction(square_gap(R));
  CHECK(AG.contains(vec({1}), vec({2})));
  CHECK_FALSE(AG.contains(vec({1}), vec({1.9})));

  const ConvexSet I = ConvexSet::box(vec({-1}), vec({1}));
  const MonotoneOperator N = operator_from_bifunction(Bifunction::zero(I));
  CHECK(N.contains(vec({1}), vec({5})));
  CHECK_FALSE(N.contains(vec({1}), vec({-0.1})));
  CHECK_FALSE(N.contains(vec({0}), vec({0.1})));
  CHECK(N.contains(vec({0}), vec({0})));
  // Outside C the image is empty.
  CHECK_FALSE(N.contains(vec({1.5}), vec({0})));
}

TEST_CASE("A_F evaluation is attached only on the whole space") {
  const ConvexSet R = ConvexSet::whole_space(1);
  const MonotoneOperator AG = operator_from_bifunction(square_gap(R));
  REQUIRE(AG.has_evaluate());
  const auto image = AG.evaluate(vec({0.75}));
  REQUIRE(image.size() == 1);
  CHECK(image.front()[0] == doctest::Approx(1.5));
  const MonotoneOperator boxed =
      operator_from_bifunction(square_gap(ConvexSet::box(vec({-1}), vec({1}))));
  CHECK_FALSE(boxed.has_evaluate());
  CHECK_THROWS_AS(boxed.evaluate(vec({0})), std::logic_error);
}

TEST_CASE("resolvent of A_F is J_F") {
  for (const auto& p : corpus()) {
    CAPTURE(p.name);
    for (const Bifunction* H : {&p.F, &p.G}) {
      const MonotoneOperator A = operator_from_bifunction(*H);
      for (double gamma : {0.1, 1.0, 10.0}) {
        const ResolventOracle J(*H, gamma);
        for (const auto& x : testutil::gaussian_points(H->dimension(), 10, 3)) {
          CHECK((A.resolvent(gamma, x) - J.resolve(x)).norm() <= 1e-10);
        }
      }
    }
  }
}

TEST_CASE("bifunction_from_operator examples") {
  const ConvexSet R = ConvexSet::whole_space(1);
  const Bifunction FA = bifunction_from_operator(affine_operator(Matrix::Constant(1, 1, 2), vec({0})), R);
  CHECK(FA.family() == BifunctionFamily::operator_induced);
  for (const auto& x : testutil::gaussian_points(1, 20, 4)) {
    const Vector y = x + vec({0.37});
    CHECK(FA(x, y) == doctest::Approx(2 * x[0] * y[0] - 2 * x[0] * x[0]));
    CHECK(FA(vec({0}), y) == 0.0);
  }

  const ConvexSet I = ConvexSet::box(vec({-1}), vec({1}));
  const Bifunction FN = bifunction_from_operator(normal_cone(I), I);
  for (double x : {-0.9, -0.2, 0.0, 0.5, 0.99}) {
    for (double y : {-0.99, 0.1, 0.7}) CHECK(FN(vec({x}), vec({y})) == 0.0);
  }
  CHECK_THROWS_AS(FN(vec({1.0}), vec({0.0})), std::domain_error);

  const MonotoneOperator no_eval =
      operator_from_bifunction(Bifunction::zero(ConvexSet::box(vec({-1}), vec({1}))));
  CHECK_THROWS_AS(bifunction_from_operator(no_eval, I), std::invalid_argument);
}

TEST_CASE("F_A from a non-affine operator uses the maximizing element") {
  const ConvexSet R2 = ConvexSet::whole_space(2);
  const auto f = ConvexFunction::weighted_l1(vec({1, 2}));
  const Bifunction Ff = bifunction_from_operator(subdifferential(f), R2);
  CHECK(Ff.family() == BifunctionFamily::generic);
  // At x = 0 the subdifferential is [-1,1] x [-2,2]: max <y, u> = |y1| + 2|y2|.
  CHECK(Ff(vec({0, 0}), vec({0.5, -1})) == doctest::Approx(2.5));
  CHECK(check_assumption1(Ff, 100, 2).passed);
}

TEST_CASE("A_{F_B} equals B + N_C") {
  const ConvexSet C = ConvexSet::box(vec({-1, -1}), vec({1, 1}));
  const Matrix M = testutil::mat2(2, 1, -1, 1);
  const Vector c = vec({0.5, -0.25});
  const MonotoneOperator B = affine_operator(M, c);
  const MonotoneOperator left = operator_from_bifunction(bifunction_from_operator(B, C));
  const MonotoneOperator right = plus_normal_cone(B, C);
  const auto xs = sample_points(C, 100, 8);
  const auto noise = testutil::gaussian_points(2, 100, 9, 1.0);
  int inside = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Vector& x = xs[i];
    // A member: B x plus an outward normal on active coordinates.
    Vector n = Vector::Zero(2);
    for (int k = 0; k < 2; ++k) {
      if (x[k] >= 1.0) n[k] = std::abs(noise[i][k]);
      if (x[k] <= -1.0) n[k] = -std::abs(noise[i][k]);
    }
    const Vector member = M * x + c + n;
    const Vector other = member + noise[i];
    CHECK(left.contains(x, member, 1e-8));
    CHECK(right.contains(x, member, 1e-8));
    CHECK(left.contains(x, other, 1e-8) == right.contains(x, other, 1e-8));
    inside += right.contains(x, other, 1e-8) ? 1 : 0;
  }
  // The random perturbations must also produce non-members.
  CHECK(inside < 100);
}

TEST_CASE("F_{A_G} <= G with a strict gap") {
  const ConvexSet R = ConvexSet::whole_space(1);
  const Bifunction G = square_gap(R);
  const Bifunction FAG = bifunction_from_operator(operator_from_bifunction(G), R);
  const auto xs = testutil::gaussian_points(1, 1000, 10);
  const auto ys = testutil::gaussian_points(1, 1000, 11);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    CHECK(FAG(xs[i], ys[i]) <= G(xs[i], ys[i]) + 1e-10);
    CHECK(FAG(xs[i], ys[i]) ==
          doctest::Approx(2 * xs[i][0] * ys[i][0] - 2 * xs[i][0] * xs[i][0]));
  }
  for (double y : {-1.0, -0.5, 0.5, 1.0}) {
    CHECK(FAG(vec({0}), vec({y})) == 0.0);
    CHECK(G(vec({0}), vec({y})) == doctest::Approx(y * y));
  }
}

TEST_CASE("sampled monotonicity of operator graphs") {
  const MonotoneOperator ops[] = {
      affine_operator(testutil::mat2(1, 3, -3, 0.5), vec({1, 2})),
      subdifferential(ConvexFunction::weighted_l1(vec({0.5, 2}))),
      subdifferential(ConvexFunction::quadratic(testutil::mat2(2, 1, 1, 1), vec({0, 1}))),
  };
  const auto xs = testutil::gaussian_points(2, 200, 12, 1.0);
  const auto ys = testutil::gaussian_points(2, 200, 13, 1.0);
  for (const auto& A : ops) {
    CAPTURE(A.label());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (const auto& u : A.evaluate(xs[i])) {
        for (const auto& v : A.evaluate(ys[i])) {
          CHECK((xs[i] - ys[i]).dot(u - v) >= -1e-10);
        }
      }
      const Vector a = A.resolvent(0.7, xs[i] * 3.0);
      const Vector b = A.resolvent(0.7, ys[i] * 3.0);
      CHECK(oracle::firm_slack(xs[i] * 3.0, ys[i] * 3.0, a, b) <= 1e-8);
    }
  }
  CHECK_THROWS_AS(affine_operator(-Matrix::Identity(2, 2), vec({0, 0})), std::invalid_argument);
}

TEST_CASE("normal cone operator") {
  const ConvexSet I = ConvexSet::box(vec({-1}), vec({1}));
  const MonotoneOperator N = normal_cone(I);
  CHECK(N.resolvent(3.0, vec({4}))[0] == 1.0);
  CHECK(N.evaluate(vec({0.3})).size() == 1);
  CHECK(N.evaluate(vec({2})).empty());
  CHECK_THROWS_AS(N.evaluate(vec({1})), std::domain_error);
  CHECK(N.contains(vec({-1}), vec({-7})));
  CHECK_FALSE(N.contains(vec({-1}), vec({7})));
  CHECK(sampled_domain_coverage(affine_operator(Matrix::Identity(1, 1), vec({0})), I, 50, 1) == 1.0);
  CHECK(sampled_domain_coverage(operator_from_bifunction(Bifunction::zero(I)), I, 50, 1) == 0.0);
}

TEST_CASE("grid points and Hausdorff distance") {
  CHECK(grid_points(line(0, 1, 0.25)).size() == 5);
  CHECK(grid_points(GridSpec{vec({0, 0}), vec({1, 1}), 0.5}).size() == 9);
  CHECK(grid_points(line(-2, 2, 1e-3)).size() == 4001);
  CHECK_THROWS_AS(grid_points(line(1, 0, 0.1)), std::invalid_argument);
  CHECK_THROWS_AS(grid_points(line(0, 1, 0.0)), std::invalid_argument);
  CHECK_THROWS_AS(grid_points(GridSpec{vec({0, 0, 0}), vec({1, 1, 1}), 0.5}), std::invalid_argument);
  const std::vector<Vector> a{vec({0}), vec({1})};
  const std::vector<Vector> b{vec({0.25})};
  CHECK(hausdorff_distance(a, b) == doctest::Approx(0.75));
  CHECK(hausdorff_distance({}, {}) == 0.0);
  CHECK(std::isinf(hausdorff_distance(a, {})));
}

TEST_CASE("zeros_bruteforce examples") {
  ZeroScanOptions opts;
  opts.u_lo = -5.0;
  opts.u_hi = 5.0;
  opts.u_step = 1e-3;
  const double h = 1e-3;
  const auto square = subdifferential(ConvexFunction::quadratic(Matrix::Constant(1, 1, 2), vec({0})));
  const auto zero = affine_operator(Matrix::Zero(1, 1), vec({0}));
  CHECK(near_point(zeros_bruteforce(square, zero, line(-2, 2, h), opts), vec({0}), h * 1.0001));

  const ConvexSet I = ConvexSet::box(vec({-1}), vec({1}));
  const auto shift = affine_operator(Matrix::Identity(1, 1), vec({-2}));
  CHECK(near_point(zeros_bruteforce(normal_cone(I), shift, line(-2, 2, h), opts), vec({1}),
                   h * 1.0001));

  const ConvexSet J = ConvexSet::box(vec({1}), vec({3}));
  const auto twice = affine_operator(Matrix::Constant(1, 1, 2), vec({0}));
  CHECK(near_point(zeros_bruteforce(twice, normal_cone(J), line(-2, 4, h), opts), vec({1}),
                   h * 1.0001));

  CHECK_THROWS_AS(zeros_bruteforce(twice, zero, line(0, -1, h), opts), std::invalid_argument);
}

TEST_CASE("zeros_bruteforce is deterministic across thread counts") {
  ZeroScanOptions one;
  one.threads = 1;
  ZeroScanOptions many = one;
  many.threads = 4;
  const auto p = *find_problem("quadratic-1d");
  const auto A = operator_from_bifunction(p.F);
  const auto B = operator_from_bifunction(p.G);
  const GridSpec grid = line(-2, 2, 1e-2);
  CHECK(zeros_bruteforce(A, B, grid, one) == zeros_bruteforce(A, B, grid, many));
}

TEST_CASE("equilibrium_bruteforce examples") {
  EquilibriumScanOptions local;
  local.rule = SlackRule::local_lipschitz;
  const double h = 1e-2;
  const ConvexSet I = ConvexSet::box(vec({-1}), vec({1}));
  CHECK(near_point(equilibrium_bruteforce(square_gap(I), line(-1, 1, h), local), vec({0}), h * 1.0001));

  const auto all = equilibrium_bruteforce(Bifunction::zero(I), line(-1, 1, h));
  CHECK(all.size() == grid_points(line(-1, 1, h)).size());

  const ConvexSet J = ConvexSet::box(vec({1}), vec({3}));
  const Bifunction vi = Bifunction::operator_induced(J, Matrix::Constant(1, 1, 2), vec({0}));
  CHECK(near_point(equilibrium_bruteforce(vi, line(1, 3, h), local), vec({1}), h * 1.0001));
  CHECK(near_point(equilibrium_bruteforce(vi, line(1, 3, h)), vec({1}), 10 * h));

  // The fixed slack admits the band |x| <= sqrt(10 h) for y^2 - x^2.
  const auto loose = equilibrium_bruteforce(square_gap(I), line(-1, 1, h));
  CHECK(near_point(loose, vec({0}), std::sqrt(10 * h) + h));
  CHECK(loose.size() > 3);

  CHECK_THROWS_AS(equilibrium_bruteforce(vi, line(-1, 0, h)), std::invalid_argument);
}

TEST_CASE("zero sets match equilibrium sets on coarse grids") {
  ZeroScanOptions zopt;
  zopt.u_step = 1e-2;
  EquilibriumScanOptions eopt;
  eopt.rule = SlackRule::local_lipschitz;
  for (const char* name : {"quadratic-1d", "mixed-equilibrium", "operator-bridge"}) {
    CAPTURE(name);
    const auto p = *find_problem(name);
    GridSpec grid = p.grid;
    grid.step = 1e-2;
    const auto zeros = zeros_bruteforce(operator_from_bifunction(p.F), operator_from_bifunction(p.G),
                                        grid, zopt);
    const auto equilibria = equilibrium_bruteforce(sum(p.F, p.G), grid, eopt);
    CHECK_FALSE(zeros.empty());
    CHECK(hausdorff_distance(zeros, equilibria) <= 2 * grid.step + 1e-12);
  }
  // zer(A + N_C) = S_{F_A} for A x = x - 2 on [-1, 1].
  const ConvexSet I = ConvexSet::box(vec({-1}), vec({1}));
  const auto A = affine_operator(Matrix::Identity(1, 1), vec({-2}));
  const GridSpec grid = line(-1, 1, 1e-2);
  const auto zeros = zeros_bruteforce(A, normal_cone(I), grid, zopt);
  const auto equilibria = equilibrium_bruteforce(bifunction_from_operator(A, I), grid, eopt);
  CHECK(hausdorff_distance(zeros, equilibria) <= 2e-2 + 1e-12);
  CHECK(near_point(zeros, vec({1}), 2e-2));
}

}
