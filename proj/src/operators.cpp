#include "eqdr/operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace eqdr {

MonotoneOperator::MonotoneOperator(ConvexSet domain, Resolvent resolvent, Membership membership,
                                   Evaluate evaluate, std::string label)
    : domain_(std::move(domain)),
      resolvent_(std::move(resolvent)),
      membership_(std::move(membership)),
      evaluate_(std::move(evaluate)),
      label_(std::move(label)) {
  if (!resolvent_ || !membership_) {
    throw std::invalid_argument("MonotoneOperator: resolvent and membership are required");
  }
}

Vector MonotoneOperator::resolvent(double gamma, const Vector& x) const {
  if (!(gamma > 0.0)) throw std::invalid_argument("resolvent: gamma must be positive");
  require_dimension(x, dimension(), "MonotoneOperator::resolvent");
  return resolvent_(gamma, x);
}

bool MonotoneOperator::contains(const Vector& x, const Vector& u, double tol) const {
  return membership_at(x)(u, tol);
}

MonotoneOperator::MembershipAt MonotoneOperator::membership_at(const Vector& x) const {
  require_dimension(x, dimension(), "MonotoneOperator::membership_at");
  return membership_(x);
}

std::vector<Vector> MonotoneOperator::evaluate(const Vector& x) const {
  if (!evaluate_) throw std::logic_error("operator '" + label_ + "' has no evaluation oracle");
  require_dimension(x, dimension(), "MonotoneOperator::evaluate");
  return evaluate_(x);
}

MonotoneOperator MonotoneOperator::with_affine_form(Matrix M, Vector c) const {
  MonotoneOperator copy = *this;
  copy.affine_ = Affine{std::move(M), std::move(c)};
  return copy;
}

namespace {

MonotoneOperator::MembershipAt never() {
  return [](const Vector&, double) { return false; };
}

// Resolvent oracles of one bifunction, built lazily per gamma.
class ResolventCache {
 public:
  ResolventCache(Bifunction F, ResolventOptions options)
      : F_(std::move(F)), options_(std::move(options)) {}

  std::shared_ptr<const ResolventOracle> get(double gamma) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(gamma);
    if (it == cache_.end()) {
      it = cache_.emplace(gamma, std::make_shared<const ResolventOracle>(F_, gamma, options_))
               .first;
    }
    return it->second;
  }

 private:
  Bifunction F_;
  ResolventOptions options_;
  std::mutex mutex_;
  std::map<double, std::shared_ptr<const ResolventOracle>> cache_;
};

constexpr std::array<double, 6> kProbeRadii{1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1};

}  // namespace

MonotoneOperator operator_from_bifunction(const Bifunction& F, ResolventOptions options,
                                          MembershipOptions membership) {
  const ConvexSet C = F.set();
  const auto d = F.dimension();
  auto cache = std::make_shared<ResolventCache>(F, options);
  MonotoneOperator::Resolvent resolvent = [cache](double gamma, const Vector& x) {
    return cache->get(gamma)->resolve(x);
  };

  const std::size_t probe_count = static_cast<std::size_t>(2 * d + 8);
  const auto directions = probe_directions(d, probe_count, membership.seed);
  const std::size_t local = std::min(membership.samples, kProbeRadii.size() * probe_count);
  const auto spread = sample_points(C, membership.samples - local, membership.seed + 1);

  MonotoneOperator::Membership test = [F, C, directions, local,
                                       spread](const Vector& x) -> MonotoneOperator::MembershipAt {
    if (!x.allFinite() || !C.contains(x)) return never();
    // For each sample y keep F(x,y), x - y and |y - x|; a query is then a
    // pass over dot products.
    struct Row {
      double value;
      Vector offset;
      double length;
    };
    std::vector<Row> rows;
    rows.reserve(local + spread.size());
    auto add = [&](const Vector& y) {
      const double length = (y - x).norm();
      if (length == 0.0) return;
      rows.push_back({F(x, y), x - y, length});
    };
    const double scale = std::max(1.0, x.norm());
    for (double r : kProbeRadii) {
      for (const auto& v : directions) {
        if (rows.size() >= local) break;
        add(C.project(x + (r * scale) * v));
      }
    }
    for (const auto& y : spread) add(y);
    auto shared = std::make_shared<const std::vector<Row>>(std::move(rows));
    return [shared](const Vector& u, double tol) {
      for (const auto& row : *shared) {
        if (row.value + row.offset.dot(u) < -tol * row.length) return false;
      }
      return true;
    };
  };

  MonotoneOperator::Evaluate evaluate;
  std::optional<MonotoneOperator::Affine> affine;
  if (C.kind() == SetKind::whole_space) {
    if (F.family() == BifunctionFamily::operator_induced) {
      const Matrix M = *F.operator_matrix();
      const Vector c = *F.operator_offset();
      evaluate = [M, c](const Vector& x) { return std::vector<Vector>{M * x + c}; };
      affine = MonotoneOperator::Affine{M, c};
    } else if (F.family() == BifunctionFamily::function_difference) {
      const ConvexFunction f = *F.convex_function();
      evaluate = [f](const Vector& x) { return f.subdifferential_vertices(x); };
      if (f.kind() == ConvexFunction::Kind::quadratic) {
        affine = MonotoneOperator::Affine{f.quadratic_matrix(), f.linear_term()};
      } else if (f.kind() == ConvexFunction::Kind::affine) {
        affine = MonotoneOperator::Affine{Matrix::Zero(d, d), f.linear_term()};
      }
    }
  }
  MonotoneOperator A(C, std::move(resolvent), std::move(test), std::move(evaluate),
                     "A[" + F.label() + "]");
  if (affine) return A.with_affine_form(affine->M, affine->c);
  return A;
}

namespace {

bool is_interior(const ConvexSet& C, const Vector& x) {
  const auto d = C.dimension();
  for (Eigen::Index i = 0; i < d; ++i) {
    for (double s : {-1.0, 1.0}) {
      const Vector v = s * Vector::Unit(d, i);
      if ((C.tangent_projection(x, v) - v).norm() > 1e-12) return false;
    }
  }
  return true;
}

}  // namespace

MonotoneOperator normal_cone(const ConvexSet& C) {
  MonotoneOperator::Resolvent resolvent = [C](double, const Vector& x) { return C.project(x); };
  MonotoneOperator::Membership test = [C](const Vector& x) -> MonotoneOperator::MembershipAt {
    if (!C.contains(x)) return never();
    return [C, x](const Vector& u, double tol) { return C.normal_cone_distance(x, u) <= tol; };
  };
  MonotoneOperator::Evaluate evaluate = [C](const Vector& x) -> std::vector<Vector> {
    if (!C.contains(x)) return {};
    if (!is_interior(C, x)) {
      throw std::domain_error("normal cone is unbounded at boundary point " + format_vector(x));
    }
    return {Vector::Zero(x.size())};
  };
  return MonotoneOperator(C, std::move(resolvent), std::move(test), std::move(evaluate),
                          std::string("N[") + to_string(C.kind()) + "]");
}

MonotoneOperator affine_operator(Matrix M, Vector c) {
  const auto d = c.size();
  if (M.rows() != d || M.cols() != d || d < 1) {
    throw std::invalid_argument("affine_operator: M must be square and match c");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10) {
    throw std::invalid_argument("affine_operator: M is not monotone");
  }
  MonotoneOperator::Resolvent resolvent = [M, c](double gamma, const Vector& x) -> Vector {
    const Matrix system = Matrix::Identity(M.rows(), M.cols()) + gamma * M;
    return system.partialPivLu().solve(x - gamma * c);
  };
  MonotoneOperator::Membership test = [M, c](const Vector& x) -> MonotoneOperator::MembershipAt {
    Vector image = M * x + c;
    return [image](const Vector& u, double tol) { return (u - image).norm() <= tol; };
  };
  MonotoneOperator::Evaluate evaluate = [M, c](const Vector& x) {
    return std::vector<Vector>{M * x + c};
  };
  return MonotoneOperator(ConvexSet::whole_space(d), std::move(resolvent), std::move(test),
                          std::move(evaluate), "affine")
      .with_affine_form(M, c);
}

MonotoneOperator subdifferential(const ConvexFunction& f) {
  const auto d = f.dimension();
  MonotoneOperator::Resolvent resolvent = [f](double gamma, const Vector& x) {
    return f.prox(x, gamma);
  };
  MonotoneOperator::Membership test = [f](const Vector& x) -> MonotoneOperator::MembershipAt {
    return [f, x](const Vector& u, double tol) {
      return f.subdifferential_distance(x, u) <= tol;
    };
  };
  MonotoneOperator::Evaluate evaluate = [f](const Vector& x) {
    return f.subdifferential_vertices(x);
  };
  MonotoneOperator A(ConvexSet::whole_space(d), std::move(resolvent), std::move(test),
                     std::move(evaluate), "subdifferential:" + f.describe());
  if (f.kind() == ConvexFunction::Kind::quadratic) {
    return A.with_affine_form(f.quadratic_matrix(), f.linear_term());
  }
  if (f.kind() == ConvexFunction::Kind::affine) {
    return A.with_affine_form(Matrix::Zero(d, d), f.linear_term());
  }
  return A;
}

MonotoneOperator plus_normal_cone(const MonotoneOperator& B, const ConvexSet& C) {
  if (!B.has_evaluate()) {
    throw std::invalid_argument("plus_normal_cone: operator has no evaluation oracle");
  }
  auto cache = std::make_shared<ResolventCache>(bifunction_from_operator(B, C),
                                                ResolventOptions{});
  MonotoneOperator::Resolvent resolvent = [cache](double gamma, const Vector& x) {
    return cache->get(gamma)->resolve(x);
  };
  MonotoneOperator::Membership test = [B, C](const Vector& x) -> MonotoneOperator::MembershipAt {
    if (!C.contains(x)) return never();
    auto images = std::make_shared<const std::vector<Vector>>(B.evaluate(x));
    return [images, C, x](const Vector& u, double tol) {
      return std::any_of(images->begin(), images->end(), [&](const Vector& v) {
        return C.normal_cone_distance(x, u - v) <= tol;
      });
    };
  };
  return MonotoneOperator(C, std::move(resolvent), std::move(test), {},
                          B.label() + " + N[" + to_string(C.kind()) + "]");
}

Bifunction bifunction_from_operator(const MonotoneOperator& A, const ConvexSet& C) {
  if (!A.has_evaluate()) {
    throw std::invalid_argument("bifunction_from_operator: operator '" + A.label() +
                                "' has no evaluation oracle");
  }
  if (C.dimension() != A.dimension()) {
    throw std::invalid_argument("bifunction_from_operator: dimension mismatch");
  }
  if (const auto& affine = A.affine_form()) {
    return Bifunction::operator_induced(C, affine->M, affine->c);
  }
  auto argmax = [A](const Vector& x, const Vector& y) -> Vector {
    const auto images = A.evaluate(x);
    if (images.empty()) {
      throw std::domain_error("F_A: empty image at x=" + format_vector(x));
    }
    const Vector dir = y - x;
    std::size_t best = 0;
    for (std::size_t i = 1; i < images.size(); ++i) {
      if (dir.dot(images[i]) > dir.dot(images[best])) best = i;
    }
    return images[best];
  };
  Bifunction::Eval eval = [argmax](const Vector& x, const Vector& y) {
    return (y - x).dot(argmax(x, y));
  };
  return Bifunction::generic(C, std::move(eval), argmax, "from-operator:" + A.label());
}

double sampled_domain_coverage(const MonotoneOperator& A, const ConvexSet& C,
                               std::size_t samples, std::uint64_t seed) {
  if (!A.has_evaluate() || samples == 0) return 0.0;
  std::size_t covered = 0;
  for (const auto& x : sample_points(C, samples, seed)) {
    try {
      if (!A.evaluate(x).empty()) ++covered;
    } catch (const std::domain_error&) {
    }
  }
  return static_cast<double>(covered) / static_cast<double>(samples);
}

// ---------------------------------------------------------------------------
// Brute force

std::vector<Vector> grid_points(const GridSpec& grid) {
  const auto d = grid.lo.size();
  if (d < 1 || d > 2 || grid.hi.size() != d) {
    throw std::invalid_argument("grid: dimension must be 1 or 2");
  }
  if (!(grid.step > 0.0) || !grid.lo.allFinite() || !grid.hi.allFinite()) {
    throw std::invalid_argument("grid: step must be positive and bounds finite");
  }
  std::array<long, 2> counts{1, 1};
  for (Eigen::Index i = 0; i < d; ++i) {
    const double span = grid.hi[i] - grid.lo[i];
    if (span < 0.0) throw std::invalid_argument("grid: empty (hi < lo)");
    counts[i] = static_cast<long>(std::floor(span / grid.step + 1e-9)) + 1;
  }
  std::vector<Vector> points;
  points.reserve(static_cast<std::size_t>(counts[0] * counts[1]));
  for (long a = 0; a < counts[0]; ++a) {
    for (long b = 0; b < counts[1]; ++b) {
      Vector x(d);
      x[0] = grid.lo[0] + static_cast<double>(a) * grid.step;
      if (d == 2) x[1] = grid.lo[1] + static_cast<double>(b) * grid.step;
      points.push_back(std::move(x));
    }
  }
  return points;
}

namespace {

// Evaluates keep(i) for i in [0, n) on worker threads and returns the kept
// indices in increasing order.
template <typename Keep>
std::vector<std::size_t> parallel_filter(std::size_t n, unsigned threads, Keep keep) {
  unsigned workers = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(n, 1)));
  std::vector<std::vector<std::size_t>> kept(workers);
  std::vector<std::exception_ptr> errors(workers);
  auto run = [&](unsigned w) {
    try {
      const std::size_t begin = n * w / workers;
      const std::size_t end = n * (w + 1) / workers;
      for (std::size_t i = begin; i < end; ++i) {
        if (keep(i)) kept[w].push_back(i);
      }
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  std::vector<std::size_t> merged;
  for (const auto& part : kept) merged.insert(merged.end(), part.begin(), part.end());
  return merged;
}

}  // namespace

std::vector<Vector> zeros_bruteforce(const MonotoneOperator& A, const MonotoneOperator& B,
                                     const GridSpec& grid, const ZeroScanOptions& options) {
  if (A.dimension() != B.dimension() || A.dimension() != grid.lo.size()) {
    throw std::invalid_argument("zeros_bruteforce: dimension mismatch");
  }
  if (!(options.u_step > 0.0) || options.u_hi < options.u_lo) {
    throw std::invalid_argument("zeros_bruteforce: invalid u grid");
  }
  const auto xs = grid_points(grid);
  const auto d = grid.lo.size();
  GridSpec u_grid{Vector::Constant(d, options.u_lo), Vector::Constant(d, options.u_hi),
                  options.u_step};
  const auto us = grid_points(u_grid);
  const double tol = 0.5 * options.u_step * std::sqrt(static_cast<double>(d)) +
                     options.lipschitz_scale * grid.step;
  // Slack against rounding on grids whose points sit exactly at the tolerance.
  const double test_tol = tol * (1.0 + 1e-9);

  const auto kept = parallel_filter(xs.size(), options.threads, [&](std::size_t i) {
    const auto in_a = A.membership_at(xs[i]);
    const auto in_b = B.membership_at(xs[i]);
    for (const auto& u : us) {
      if (in_a(u, test_tol) && in_b(-u, test_tol)) return true;
    }
    return false;
  });
  std::vector<Vector> zeros;
  for (auto i : kept) zeros.push_back(xs[i]);
  return zeros;
}

std::vector<Vector> equilibrium_bruteforce(const Bifunction& F, const GridSpec& grid,
                                           const EquilibriumScanOptions& options) {
  if (F.dimension() != grid.lo.size()) {
    throw std::invalid_argument("equilibrium_bruteforce: dimension mismatch");
  }
  const ConvexSet& C = F.set();
  std::vector<Vector> feasible;
  for (auto& x : grid_points(grid)) {
    if (C.contains(x)) feasible.push_back(std::move(x));
  }
  if (feasible.empty()) throw std::invalid_argument("equilibrium_bruteforce: grid misses C");
  const auto d = grid.lo.size();
  const double h = grid.step;

  const auto kept = parallel_filter(feasible.size(), options.threads, [&](std::size_t i) {
    const Vector& x = feasible[i];
    double lowest = std::numeric_limits<double>::infinity();
    std::size_t argmin = 0;
    for (std::size_t j = 0; j < feasible.size(); ++j) {
      const double v = F(x, feasible[j]);
      if (!std::isfinite(v)) {
        throw std::domain_error("equilibrium_bruteforce: non-finite value at x=" +
                                format_vector(x) + ", y=" + format_vector(feasible[j]));
      }
      if (v < lowest) {
        lowest = v;
        argmin = j;
      }
    }
    double tol = options.factor * h;
    if (options.rule == SlackRule::local_lipschitz) {
      const Vector& y = feasible[argmin];
      const double base = F(x, y);
      tol = 1e-12 * (1.0 + std::abs(base));
      for (Eigen::Index axis = 0; axis < d; ++axis) {
        double change = 0.0;
        for (double s : {-1.0, 1.0}) {
          const Vector neighbour = x + s * h * Vector::Unit(d, axis);
          if (!C.contains(neighbour)) continue;
          change = std::max(change, std::abs(F(neighbour, y) - base));
        }
        tol += 0.5 * change;
      }
    }
    return lowest >= -tol;
  });
  std::vector<Vector> solutions;
  for (auto i : kept) solutions.push_back(feasible[i]);
  return solutions;
}

double hausdorff_distance(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  if (a.empty() && b.empty()) return 0.0;
  if (a.empty() || b.empty()) return std::numeric_limits<double>::infinity();
  auto directed = [](const std::vector<Vector>& from, const std::vector<Vector>& to) {
    double worst = 0.0;
    for (const auto& p : from) {
      double nearest = std::numeric_limits<double>::infinity();
      for (const auto& q : to) nearest = std::min(nearest, (p - q).norm());
      worst = std::max(worst, nearest);
    }
    return worst;
  };
  return std::max(directed(a, b), directed(b, a));
}

}  // namespace eqdr
