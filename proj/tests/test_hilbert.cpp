#include "doctest.h"

#include "eqdr/hilbert.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace eqdr;
using testutil::vec;

TEST_SUITE("hilbert") {

TEST_CASE("inner product examples") {
  CHECK(inner(vec({1, 0}), vec({0, 1})) == 0.0);
  CHECK(inner(vec({2, 3}), vec({2, 3})) == 13.0);
  CHECK(inner(vec({1, 2, 3}), vec({4, 5, 6})) == 32.0);
  CHECK_THROWS_AS(inner(vec({1, 2}), vec({1, 2, 3})), std::invalid_argument);
}

TEST_CASE("project_box examples") {
  CHECK(project_box(vec({3}), vec({-1}), vec({1})) == vec({1}));
  CHECK(project_box(vec({0.5}), vec({-1}), vec({1})) == vec({0.5}));
  CHECK(project_box(vec({-2, 0.3}), vec({-1, -1}), vec({1, 1})) == vec({-1, 0.3}));
  CHECK_THROWS_AS(ConvexSet::box(vec({1, 0}), vec({0, 1})), std::invalid_argument);
}

TEST_CASE("project_simplex examples") {
  CHECK(project_simplex(vec({1, 0, 0})) == vec({1, 0, 0}));
  CHECK((project_simplex(vec({0.5, 0.5})) - vec({0.5, 0.5})).norm() < 1e-15);
  const Vector p = project_simplex(vec({2, 0}));
  CHECK((p - vec({1, 0})).norm() < 1e-15);
  // Independent grid oracle on a few more points.
  for (const auto& x : {vec({2, 0}), vec({0.3, -0.4}), vec({-1, 3}), vec({0.9, 0.6})}) {
    CHECK((project_simplex(x) - oracle::simplex_grid_projection(x)).norm() <= 1e-3);
  }
  for (const auto& x : testutil::gaussian_points(5, 200, 3)) {
    const Vector q = project_simplex(x);
    CHECK(std::abs(q.sum() - 1.0) <= 1e-12);
    CHECK(q.minCoeff() >= 0.0);
  }
}

TEST_CASE("format_vector and finiteness checks") {
  CHECK(format_vector(vec({0.5, -1})) == "[0.5, -1]");
  Vector bad = vec({1, std::numeric_limits<double>::quiet_NaN()});
  CHECK_THROWS_AS(require_finite(bad, "x"), std::invalid_argument);
  CHECK_THROWS_AS(require_dimension(vec({1}), 2, "x"), std::invalid_argument);
}

TEST_CASE("projection invariants on every set kind") {
  for (const auto& C : testutil::sample_sets()) {
    const std::string kind = to_string(C.kind());
    CAPTURE(kind);
    const auto d = C.dimension();
    const auto xs = testutil::gaussian_points(d, 1000, 17);
    const auto ys = testutil::gaussian_points(d, 1000, 18);
    const auto witnesses = sample_points(C, 100, 5);
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const Vector px = C.project(xs[i]);
      const Vector py = C.project(ys[i]);
      CHECK(C.contains(px, 1e-10));
      CHECK((C.project(px) - px).norm() <= 1e-12 * (1.0 + px.norm()) +
                                                 (C.is_approximate() ? 1e-9 : 0.0));
      CHECK(oracle::firm_slack(xs[i], ys[i], px, py) <= 1e-9);
    }
    for (std::size_t i = 0; i < 50; ++i) {
      const Vector px = C.project(xs[i]);
      const double dist = (xs[i] - px).norm();
      for (const auto& w : witnesses) CHECK(dist <= (xs[i] - w).norm() + 1e-9);
    }
  }
}

TEST_CASE("projection optimality condition <x - Px, y - Px> <= 0") {
  for (const auto& C : testutil::sample_sets()) {
    const std::string kind = to_string(C.kind());
    CAPTURE(kind);
    const auto witnesses = sample_points(C, 64, 9);
    for (const auto& x : testutil::gaussian_points(C.dimension(), 100, 21)) {
      const Vector px = C.project(x);
      const double tol = C.is_approximate() ? 1e-7 : 1e-9;
      for (const auto& y : witnesses) CHECK((x - px).dot(y - px) <= tol * (1.0 + x.norm()));
    }
  }
}

TEST_CASE("sample_points are deterministic and inside the set") {
  for (const auto& C : testutil::sample_sets()) {
    const auto a = sample_points(C, 32, 4);
    const auto b = sample_points(C, 32, 4);
    REQUIRE(a.size() == 32);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i] == b[i]);
      CHECK(C.contains(a[i], 1e-9));
    }
  }
}

TEST_CASE("tangent projection and normal cone distance") {
  const ConvexSet box = ConvexSet::box(vec({-1, -1}), vec({1, 1}));
  // At the corner (1,1) the normal cone is the nonnegative quadrant.
  CHECK(box.tangent_projection(vec({1, 1}), vec({2, -3})) == vec({0, -3}));
  CHECK(box.normal_cone_distance(vec({1, 1}), vec({2, 3})) == 0.0);
  CHECK(box.normal_cone_distance(vec({0, 0}), vec({3, 4})) == doctest::Approx(5.0));
  const ConvexSet ball = ConvexSet::ball(vec({0, 0}), 1.0);
  CHECK(ball.normal_cone_distance(vec({1, 0}), vec({2, 0})) == doctest::Approx(0.0));
  CHECK(ball.normal_cone_distance(vec({1, 0}), vec({-2, 1})) == doctest::Approx(std::sqrt(5.0)));
  const ConvexSet simplex = ConvexSet::simplex(2);
  // Normal cone of the simplex at (1,0): {t(1,1) + s(0,-1)... } contains (1,0).
  CHECK(simplex.normal_cone_distance(vec({1, 0}), vec({1, 0})) <= 1e-12);
  // Moreau: u = P_T u + P_N u with orthogonal parts, checked on random data.
  for (const auto& C : testutil::sample_sets()) {
    if (C.is_approximate()) continue;
    const auto points = sample_points(C, 20, 2);
    const auto us = testutil::gaussian_points(C.dimension(), 20, 3);
    for (std::size_t i = 0; i < points.size(); ++i) {
      const Vector t = C.tangent_projection(points[i], us[i]);
      const Vector n = us[i] - t;
      CHECK(std::abs(t.dot(n)) <= 1e-8 * (1.0 + us[i].squaredNorm()));
    }
  }
}

TEST_CASE("intersection is flagged approximate") {
  const auto sets = testutil::sample_sets();
  CHECK(sets.back().is_approximate());
  CHECK_FALSE(sets[1].is_approximate());
}

}
