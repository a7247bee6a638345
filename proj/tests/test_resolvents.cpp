#include "doctest.h"

#include "eqdr/problems.hpp"
#include "eqdr/resolvents.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <cmath>

using namespace eqdr;
using testutil::vec;

namespace {

Bifunction remark(const ConvexSet& C) {
  return Bifunction::function_difference(
      C, ConvexFunction::quadratic(Matrix::Constant(1, 1, 2.0), vec({0.0})));
}

ResolventOptions forced(ResolveMethod m) {
  ResolventOptions o;
  o.method = m;
  return o;
}

}  // namespace

TEST_SUITE("resolvents") {

TEST_CASE("resolve examples") {
  const ConvexSet I = ConvexSet::box(vec({-1}), vec({1}));
  const ConvexSet R = ConvexSet::whole_space(1);

  const ResolventOracle zero(Bifunction::zero(I), 1.0);
  CHECK(zero.method() == ResolveMethod::closed_form_projection);
  CHECK(zero.resolve(vec({3}))[0] == 1.0);
  CHECK(zero.reflect(vec({3}))[0] == -1.0);

  // argmin gamma y^2 + 1/2 (y - x)^2 by an independent scalar oracle.
  const double gamma = 1.0;
  const double expected = oracle::minimize_by_right_derivative(
      [&](double t) { return 2.0 * gamma * t + (t - 1.0); }, -10.0, 10.0);
  CHECK(expected == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  const ResolventOracle quad(remark(R), gamma);
  CHECK(quad.method() == ResolveMethod::prox_composition);
  CHECK(std::abs(quad.resolve(vec({1}))[0] - expected) <= 1e-14);
  CHECK(std::abs(quad.reflect(vec({1}))[0] + 1.0 / 3.0) <= 1e-14);

  const ResolventOracle lin(Bifunction::operator_induced(R, Matrix::Constant(1, 1, 2.0), vec({0})),
                            gamma);
  CHECK(lin.method() == ResolveMethod::closed_form_linear_solve);
  CHECK(std::abs(lin.resolve(vec({1}))[0] - 1.0 / 3.0) <= 1e-15);

  const ResolventOracle id(Bifunction::zero(ConvexSet::whole_space(2)), 1.0);
  for (const auto& x : testutil::gaussian_points(2, 10, 1)) CHECK(id.reflect(x) == x);
}

TEST_CASE("inner_solve examples") {
  const ConvexSet I = ConvexSet::box(vec({-1}), vec({1}));
  ResolventOptions opts;
  const auto sample = sample_points(I, 64, 7);
  const auto zero = inner_solve_report(Bifunction::zero(I), 1.0, vec({3}), opts, sample);
  CHECK(zero.z[0] == 1.0);
  CHECK(zero.iterations <= 2);

  const ConvexSet R = ConvexSet::whole_space(1);
  const double tol = 1e-9;
  CHECK(std::abs(inner_solve(remark(R), 1.0, vec({1}), tol, 50000)[0] - 1.0 / 3.0) <= 10 * tol);

  const ConvexSet R2 = ConvexSet::whole_space(2);
  const Matrix S = testutil::mat2(0, 1, -1, 0);
  const Vector z = inner_solve(Bifunction::operator_induced(R2, S, vec({0, 0})), 1.0, vec({1, 0}),
                               tol, 50000);
  const Vector expected = (Matrix::Identity(2, 2) + S).fullPivLu().solve(vec({1, 0}));
  CHECK((expected - vec({0.5, 0.5})).norm() <= 1e-15);
  CHECK((z - expected).norm() <= 1e-6);
}

TEST_CASE("inner solver handles generic bifunctions without a subgradient oracle") {
  // H(x,y) = g(y) - g(x) with g(y) = |y|^1.5 on [-2, 2]; J z minimizes
  // gamma g(y) + 1/2 (y - x)^2.
  const ConvexSet C = ConvexSet::box(vec({-2}), vec({2}));
  auto g = [](double t) { return std::pow(std::abs(t), 1.5); };
  const Bifunction H = Bifunction::generic(
      C, [&](const Vector& x, const Vector& y) { return g(y[0]) - g(x[0]); });
  const double gamma = 0.8;
  const ResolventOracle J(H, gamma);
  CHECK(J.method() == ResolveMethod::inner_iterative);
  for (double x : {-3.0, -0.4, 0.05, 0.7, 2.5}) {
    CAPTURE(x);
    const double expected = oracle::minimize_by_right_derivative(
        [&](double t) {
          const double slope = 1.5 * std::sqrt(std::abs(t)) * (t >= 0.0 ? 1.0 : -1.0);
          return gamma * slope + (t - x);
        },
        -2.0, 2.0);
    CHECK(std::abs(J.resolve(vec({x}))[0] - expected) <= 1e-6);
  }
}

TEST_CASE("inner solver on a simplex follows the projected fixed point") {
  const ConvexSet simplex = ConvexSet::simplex(2);
  const Matrix M = testutil::mat2(1, 2, -2, 1);
  const Vector c = vec({0.3, -0.1});
  const double gamma = 0.5;
  const ResolventOracle J(Bifunction::operator_induced(simplex, M, c), gamma);
  for (const auto& x : testutil::gaussian_points(2, 5, 8)) {
    // z = P(z - a((I + gamma M) z + gamma c - x)) for a small a.
    const Matrix A = Matrix::Identity(2, 2) + gamma * M;
    Vector z = vec({0.5, 0.5});
    const double a = 0.2 / (A.operatorNorm() * A.operatorNorm());
    for (int k = 0; k < 200000; ++k) z = project_simplex(z - a * (A * z + gamma * c - x));
    CHECK((J.resolve(x) - z).norm() <= 1e-6);
  }
}

TEST_CASE("firm nonexpansiveness on corpus bifunctions") {
  for (const auto& p : corpus()) {
    CAPTURE(p.name);
    for (const Bifunction* H : {&p.F, &p.G}) {
      const ResolventOracle J(*H, 1.0);
      const auto d = H->dimension();
      const auto xs = testutil::gaussian_points(d, 200, 31);
      const auto ys = testutil::gaussian_points(d, 200, 32);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(oracle::firm_slack(xs[i], ys[i], J.resolve(xs[i]), J.resolve(ys[i])) <= 1e-8);
      }
    }
  }
}

TEST_CASE("residual certificate and membership of every output") {
  for (const auto& p : corpus()) {
    CAPTURE(p.name);
    for (const Bifunction* H : {&p.F, &p.G}) {
      for (double gamma : {0.1, 1.0, 10.0}) {
        const ResolventOracle J(*H, gamma);
        for (const auto& x : testutil::gaussian_points(H->dimension(), 30, 5)) {
          const Vector z = J.resolve(x);
          CHECK(H->set().contains(z, 1e-10));
          CHECK(J.residual(x, z) <= 10 * J.options().inner_tol);
        }
      }
    }
  }
}

TEST_CASE("linear solve and inner iteration agree when the free solution is in C") {
  const ConvexSet big = ConvexSet::box(vec({-100, -100}), vec({100, 100}));
  const Matrix M = testutil::mat2(2, 1, 1, 2);
  const Vector c = vec({-1, 0.5});
  for (double gamma : {0.1, 1.0, 10.0}) {
    const ResolventOracle inner(Bifunction::operator_induced(big, M, c), gamma);
    CHECK(inner.method() == ResolveMethod::inner_iterative);
    const ResolventOracle free(Bifunction::operator_induced(ConvexSet::whole_space(2), M, c),
                               gamma);
    for (const auto& x : testutil::gaussian_points(2, 20, 12)) {
      const Vector zf = free.resolve(x);
      REQUIRE(big.contains(zf));
      CHECK((inner.resolve(x) - zf).norm() <= 1e-6);
    }
  }
}

TEST_CASE("box VI resolvent matches the projected fixed-point oracle") {
  const ConvexSet box = ConvexSet::box(vec({0, 0}), vec({1, 1}));
  const Matrix M = testutil::mat2(2, 1, 1, 2);
  const Vector c = vec({-1, 0.5});
  for (double gamma : {0.1, 1.0, 10.0}) {
    const ResolventOracle J(Bifunction::operator_induced(box, M, c), gamma);
    for (const auto& x : testutil::gaussian_points(2, 10, 13)) {
      const Matrix A = Matrix::Identity(2, 2) + gamma * M;
      const Vector expected = oracle::box_vi_projected(A, gamma * c - x, vec({0, 0}), vec({1, 1}));
      CHECK((J.resolve(x) - expected).norm() <= 1e-6);
    }
  }
}

TEST_CASE("diagonal operator on a box uses the closed form") {
  const ConvexSet box = ConvexSet::box(vec({-1, 0}), vec({1, 2}));
  const Matrix M = testutil::mat2(2, 0, 0, 0.5);
  const Vector c = vec({0.3, -1});
  const ResolventOracle closed(Bifunction::operator_induced(box, M, c), 1.5);
  CHECK(closed.method() == ResolveMethod::closed_form_linear_solve);
  const ResolventOracle inner(Bifunction::operator_induced(box, M, c), 1.5,
                              forced(ResolveMethod::inner_iterative));
  for (const auto& x : testutil::gaussian_points(2, 20, 14)) {
    CHECK((closed.resolve(x) - inner.resolve(x)).norm() <= 1e-6);
  }
}

TEST_CASE("prox identity for function-difference bifunctions") {
  const ConvexSet box = ConvexSet::box(vec({-1, -0.5}), vec({1, 2}));
  const Vector w = vec({0.4, 1.3});
  const Bifunction G = Bifunction::function_difference(box, ConvexFunction::weighted_l1(w));
  for (double gamma : {0.1, 1.0, 10.0}) {
    const ResolventOracle J(G, gamma);
    CHECK(J.method() == ResolveMethod::prox_composition);
    for (const auto& x : testutil::gaussian_points(2, 20, 15)) {
      const Vector expected = oracle::minimize_box_by_derivative(
          [&](const Vector& y, Eigen::Index i) {
            return gamma * w[i] * (y[i] >= 0.0 ? 1.0 : -1.0) + (y[i] - x[i]);
          },
          vec({-1, -0.5}), vec({1, 2}));
      CHECK((J.resolve(x) - expected).norm() <= 1e-8);
    }
  }
  // Non-separable quadratic on a ball goes through the inner solver.
  const ConvexSet ball = ConvexSet::ball(vec({0, 0}), 1.0);
  const Bifunction Q = Bifunction::function_difference(
      ball, ConvexFunction::quadratic(testutil::mat2(2, 1, 1, 2), vec({0, 0})));
  const ResolventOracle JQ(Q, 1.0);
  CHECK(JQ.method() == ResolveMethod::inner_iterative);
  const Vector x = vec({2, 0});
  // Interior optimum check: (I + Q) z = x has |z| < 1 here.
  const Vector free = (Matrix::Identity(2, 2) + testutil::mat2(2, 1, 1, 2)).ldlt().solve(x);
  REQUIRE(free.norm() < 1.0);
  CHECK((JQ.resolve(x) - free).norm() <= 1e-6);
}

TEST_CASE("affine function difference is a shifted projection") {
  const ConvexSet box = ConvexSet::box(vec({-1}), vec({1}));
  const ResolventOracle J(Bifunction::function_difference(box, ConvexFunction::affine(vec({2}))), 0.5);
  CHECK(J.method() == ResolveMethod::prox_composition);
  CHECK(J.resolve(vec({0.5}))[0] == doctest::Approx(-0.5));
  CHECK(J.resolve(vec({-0.5}))[0] == doctest::Approx(-1.0));
}

TEST_CASE("configuration errors") {
  const ConvexSet R = ConvexSet::whole_space(1);
  CHECK_THROWS_AS(ResolventOracle(remark(R), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(ResolventOracle(remark(R), -1.0), std::invalid_argument);
  CHECK_THROWS_AS(ResolventOracle(remark(R), 1.0, forced(ResolveMethod::closed_form_projection)),
                  std::invalid_argument);
  CHECK_THROWS_AS(ResolventOracle(Bifunction::zero(R), 1.0,
                                  forced(ResolveMethod::prox_composition)),
                  std::invalid_argument);
  const ResolventOracle J(remark(R), 1.0);
  CHECK_THROWS_AS(J.resolve(vec({1, 2})), std::invalid_argument);
  CHECK_THROWS_AS(J.resolve(vec({std::nan("")})), std::invalid_argument);
}

TEST_CASE("inner solver failure carries the last iterate") {
  const ConvexSet box = ConvexSet::box(vec({0, 0}), vec({1, 1}));
  ResolventOptions opts;
  opts.inner_max_iter = 2;
  const ResolventOracle J(
      Bifunction::operator_induced(box, testutil::mat2(2, 1, 1, 2), vec({-1, 0.5})), 10.0, opts);
  try {
    J.resolve(vec({3, -2}));
    FAIL("expected InnerSolveError");
  } catch (const InnerSolveError& e) {
    CHECK(e.last_iterate.size() == 2);
    CHECK(box.contains(e.last_iterate));
    CHECK(e.residual > 0.0);
    CHECK(e.iterations == 2);
  }
}

TEST_CASE("resolve is deterministic") {
  const auto p = *find_problem("vi-over-box");
  const ResolventOracle J(p.F, 1.0);
  const Vector x = vec({0.7, -0.4});
  CHECK(J.resolve(x) == J.resolve(x));
}

}
