#pragma once

#include "eqdr/hilbert.hpp"

#include <initializer_list>
#include <random>
#include <vector>

namespace testutil {

inline eqdr::Vector vec(std::initializer_list<double> values) {
  eqdr::Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

inline eqdr::Matrix mat2(double a, double b, double c, double d) {
  eqdr::Matrix M(2, 2);
  M << a, b, c, d;
  return M;
}

/// Seeded gaussian points of R^d with the given spread.
inline std::vector<eqdr::Vector> gaussian_points(Eigen::Index d, std::size_t n,
                                                 std::uint64_t seed, double scale = 3.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<eqdr::Vector> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    eqdr::Vector x(d);
    for (Eigen::Index j = 0; j < d; ++j) x[j] = normal(rng);
    out.push_back(std::move(x));
  }
  return out;
}

/// One set of every kind, in dimension 2 (3 for the affine subspace).
inline std::vector<eqdr::ConvexSet> sample_sets() {
  using eqdr::ConvexSet;
  eqdr::Matrix A(1, 3);
  A << 1.0, 1.0, 1.0;
  return {
      ConvexSet::whole_space(2),
      ConvexSet::box(vec({-1.0, 0.0}), vec({1.0, 2.0})),
      ConvexSet::ball(vec({0.5, -0.5}), 1.5),
      ConvexSet::halfspace(vec({1.0, 2.0}), 1.0),
      ConvexSet::simplex(2),
      ConvexSet::affine_subspace(A, vec({1.0})),
      ConvexSet::intersection({ConvexSet::ball(vec({0.0, 0.0}), 1.0),
                               ConvexSet::halfspace(vec({1.0, 1.0}), 0.5)}),
  };
}

}  // namespace testutil
