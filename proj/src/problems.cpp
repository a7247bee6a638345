#include "eqdr/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace eqdr {

const char* to_string(Provenance provenance) {
  switch (provenance) {
    case Provenance::analytic: return "analytic";
    case Provenance::brute_force: return "brute-force";
  }
  return "unknown";
}

double ProblemInstance::distance_to_solutions(const Vector& x) const {
  if (solution_set_is_C) return (x - C.project(x)).norm();
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : known_solutions) best = std::min(best, (x - s).norm());
  return best;
}

ProblemInstance instance_from_spec(std::string name, ProblemSpec spec) {
  ConvexSet C = build_set(spec.set, spec.dimension);
  Bifunction F = build_bifunction(spec.F, C);
  Bifunction G = build_bifunction(spec.G, C);
  const auto d = spec.dimension;
  GridSpec grid{Vector::Constant(d, -2.0), Vector::Constant(d, 2.0), d == 1 ? 1e-3 : 1e-2};
  if (auto bounds = C.box_bounds()) {
    grid.lo = bounds->first;
    grid.hi = bounds->second;
  }
  return ProblemInstance{std::move(name), std::move(spec), std::move(C), std::move(F),
                         std::move(G), {}, false, Provenance::analytic, "", std::move(grid)};
}

Vector box_vi_by_enumeration(const Matrix& M, const Vector& q, const Vector& lo,
                             const Vector& hi) {
  const auto d = q.size();
  if (d < 1 || d > 3) throw std::invalid_argument("box_vi_by_enumeration: 1 <= d <= 3");
  int cases = 1;
  for (Eigen::Index i = 0; i < d; ++i) cases *= 3;
  constexpr double kTol = 1e-12;
  for (int code = 0; code < cases; ++code) {
    // state 0: free, 1: at lo, 2: at hi.
    std::vector<int> state(static_cast<std::size_t>(d));
    std::vector<Eigen::Index> free;
    Vector x = Vector::Zero(d);
    int c = code;
    for (Eigen::Index i = 0; i < d; ++i) {
      state[static_cast<std::size_t>(i)] = c % 3;
      c /= 3;
      switch (state[static_cast<std::size_t>(i)]) {
        case 0: free.push_back(i); break;
        case 1: x[i] = lo[i]; break;
        case 2: x[i] = hi[i]; break;
      }
    }
    if (!free.empty()) {
      const auto k = static_cast<Eigen::Index>(free.size());
      Matrix Mff(k, k);
      Vector rhs(k);
      for (Eigen::Index a = 0; a < k; ++a) {
        rhs[a] = -q[free[a]];
        for (Eigen::Index j = 0; j < d; ++j) {
          if (state[static_cast<std::size_t>(j)] != 0) rhs[a] -= M(free[a], j) * x[j];
        }
        for (Eigen::Index b = 0; b < k; ++b) Mff(a, b) = M(free[a], free[b]);
      }
      Eigen::FullPivLU<Matrix> lu(Mff);
      if (!lu.isInvertible()) continue;
      const Vector sol = lu.solve(rhs);
      for (Eigen::Index a = 0; a < k; ++a) x[free[a]] = sol[a];
    }
    const Vector g = M * x + q;
    bool ok = true;
    for (Eigen::Index i = 0; i < d && ok; ++i) {
      switch (state[static_cast<std::size_t>(i)]) {
        case 0: ok = x[i] >= lo[i] - kTol && x[i] <= hi[i] + kTol; break;
        case 1: ok = g[i] >= -kTol; break;
        case 2: ok = g[i] <= kTol; break;
      }
    }
    if (ok) return x;
  }
  throw std::runtime_error("box_vi_by_enumeration: no consistent active set");
}

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v[i++] = x;
  return v;
}

Matrix mat1(double a) { return Matrix::Constant(1, 1, a); }

SetSpec box_spec(Vector lo, Vector hi) {
  SetSpec s;
  s.kind = SetSpec::Kind::box;
  s.lo = std::move(lo);
  s.hi = std::move(hi);
  return s;
}

BifunctionSpec affine_spec(BifunctionSpec::Family family, Matrix M, Vector c) {
  BifunctionSpec b;
  b.family = family;
  b.matrix = std::move(M);
  b.offset = std::move(c);
  return b;
}

BifunctionSpec quadratic_difference(Matrix Q, Vector q) {
  BifunctionSpec b;
  b.family = BifunctionSpec::Family::function_difference;
  b.function.kind = ConvexFunction::Kind::quadratic;
  b.function.matrix = std::move(Q);
  b.function.linear = std::move(q);
  return b;
}

ProblemSpec base_spec(Eigen::Index d, Vector x0) {
  ProblemSpec spec;
  spec.dimension = d;
  spec.x0 = std::move(x0);
  return spec;
}

ProblemInstance pure_feasibility() {
  ProblemSpec spec = base_spec(2, vec({3.0, -2.0}));
  spec.set = box_spec(vec({-1.0, -1.0}), vec({1.0, 1.0}));
  ProblemInstance p = instance_from_spec("pure-feasibility", std::move(spec));
  p.solution_set_is_C = true;
  p.known_solutions = {vec({-1.0, -1.0}), vec({1.0, -1.0}), vec({-1.0, 1.0}), vec({1.0, 1.0}),
                       vec({0.0, 0.0})};
  p.oracle_spec = "F = G = 0, so every point of C = [-1,1]^2 is a solution";
  return p;
}

ProblemInstance quadratic_1d() {
  constexpr double b = 1.0;
  ProblemSpec spec = base_spec(1, vec({2.0}));
  spec.F = quadratic_difference(mat1(2.0), vec({0.0}));  // y^2 - x^2
  spec.G = affine_spec(BifunctionSpec::Family::affine_operator, mat1(0.0), vec({b}));
  ProblemInstance p = instance_from_spec("quadratic-1d", std::move(spec));
  p.known_solutions = {vec({-b / 2.0})};
  p.oracle_spec =
      "F = y^2 - x^2, G = b (y - x) with b = 1 on R: 2x + b = 0 gives -b/2; "
      "equilibrium_bruteforce on [-2,2] step 1e-3";
  return p;
}

ProblemInstance vi_over_box() {
  Matrix M(2, 2);
  M << 2.0, 1.0, 1.0, 2.0;
  const Vector q = vec({-1.0, 0.5});
  ProblemSpec spec = base_spec(2, vec({1.0, 1.0}));
  spec.set = box_spec(vec({0.0, 0.0}), vec({1.0, 1.0}));
  spec.F = affine_spec(BifunctionSpec::Family::affine_operator, M, q);
  ProblemInstance p = instance_from_spec("vi-over-box", std::move(spec));
  p.known_solutions = {box_vi_by_enumeration(M, q, vec({0.0, 0.0}), vec({1.0, 1.0}))};
  p.oracle_spec =
      "<M x + q, y - x> >= 0 on [0,1]^2 with M = [[2,1],[1,2]], q = (-1, 0.5): "
      "enumerate the 9 active-set cases of the box KKT system";
  return p;
}

ProblemInstance mixed_equilibrium() {
  constexpr double target = 2.0;
  constexpr double w = 1.0;
  ProblemSpec spec = base_spec(1, vec({-0.5}));
  spec.set = box_spec(vec({-1.0}), vec({1.0}));
  spec.F = affine_spec(BifunctionSpec::Family::affine_operator, mat1(1.0), vec({-target}));
  spec.G.family = BifunctionSpec::Family::function_difference;
  spec.G.function.kind = ConvexFunction::Kind::weighted_l1;
  spec.G.function.weights = vec({w});
  ProblemInstance p = instance_from_spec("mixed-equilibrium", std::move(spec));
  const double shrunk = std::copysign(std::max(std::abs(target) - w, 0.0), target);
  p.known_solutions = {vec({std::clamp(shrunk, -1.0, 1.0)})};
  p.oracle_spec =
      "<x - d, y - x> + w (|y| - |x|) >= 0 on [-1,1] with d = 2, w = 1: "
      "soft-threshold d by w, then clamp to [-1,1] (1-D KKT cases)";
  return p;
}

ProblemInstance skew_saddle() {
  Matrix S(2, 2);
  S << 0.0, 1.0, -1.0, 0.0;
  ProblemSpec spec = base_spec(2, vec({1.0, -1.0}));
  spec.F = affine_spec(BifunctionSpec::Family::affine_operator, S, vec({0.0, 0.0}));
  spec.G = quadratic_difference(Matrix::Identity(2, 2), vec({0.0, 0.0}));
  ProblemInstance p = instance_from_spec("skew-saddle", std::move(spec));
  p.known_solutions = {vec({0.0, 0.0})};
  p.oracle_spec = "0 in (S + Id) x with S skew forces x = 0";
  return p;
}

ProblemInstance operator_bridge() {
  ProblemSpec spec = base_spec(1, vec({2.0}));
  spec.F = affine_spec(BifunctionSpec::Family::operator_bridge, mat1(1.0), vec({-1.0}));
  spec.G = quadratic_difference(mat1(2.0), vec({0.0}));
  ProblemInstance p = instance_from_spec("operator-bridge", std::move(spec));
  p.known_solutions = {vec({1.0 / 3.0})};
  p.oracle_spec =
      "F = F_B for B x = x - 1, G = y^2 - x^2 on R: root of x - 1 + 2x = 0 is 1/3";
  return p;
}

}  // namespace

std::vector<ProblemInstance> corpus() {
  std::vector<ProblemInstance> out;
  out.push_back(pure_feasibility());
  out.push_back(quadratic_1d());
  out.push_back(vi_over_box());
  out.push_back(mixed_equilibrium());
  out.push_back(skew_saddle());
  out.push_back(operator_bridge());
  return out;
}

std::optional<ProblemInstance> find_problem(const std::string& name) {
  for (auto& p : corpus()) {
    if (p.name == name) return p;
  }
  return std::nullopt;
}

}  // namespace eqdr
