#include "eqdr/bifunctions.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace eqdr {

// ---------------------------------------------------------------------------
// ConvexFunction

ConvexFunction ConvexFunction::quadratic(Matrix Q, Vector q) {
  if (Q.rows() != Q.cols() || Q.rows() != q.size() || q.size() == 0) {
    throw std::invalid_argument("quadratic: Q must be square and match q");
  }
  if (!Q.allFinite() || !q.allFinite()) {
    throw std::invalid_argument("quadratic: non-finite parameter");
  }
  if ((Q - Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + Q.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("quadratic: Q must be symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(Q, Eigen::EigenvaluesOnly);
  if (eig.eigenvalues().minCoeff() < -1e-10) {
    throw std::invalid_argument("quadratic: Q must be positive semidefinite");
  }
  ConvexFunction f;
  f.kind_ = Kind::quadratic;
  f.dim_ = q.size();
  f.Q_ = std::move(Q);
  f.q_ = std::move(q);
  return f;
}

ConvexFunction ConvexFunction::weighted_l1(Vector weights) {
  if (weights.size() == 0 || !weights.allFinite() || (weights.array() < 0.0).any()) {
    throw std::invalid_argument("weighted_l1: weights must be finite and nonnegative");
  }
  ConvexFunction f;
  f.kind_ = Kind::weighted_l1;
  f.dim_ = weights.size();
  f.w_ = std::move(weights);
  return f;
}

ConvexFunction ConvexFunction::affine(Vector a, double b) {
  if (a.size() == 0 || !a.allFinite() || !std::isfinite(b)) {
    throw std::invalid_argument("affine: non-finite parameter");
  }
  ConvexFunction f;
  f.kind_ = Kind::affine;
  f.dim_ = a.size();
  f.q_ = std::move(a);
  f.b_ = b;
  return f;
}

double ConvexFunction::operator()(const Vector& y) const {
  require_dimension(y, dim_, "ConvexFunction");
  switch (kind_) {
    case Kind::quadratic: return 0.5 * y.dot(Q_ * y) + q_.dot(y);
    case Kind::weighted_l1: return w_.dot(y.cwiseAbs());
    case Kind::affine: return q_.dot(y) + b_;
  }
  return 0.0;
}

namespace {

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

Vector ConvexFunction::subgradient(const Vector& y) const {
  require_dimension(y, dim_, "ConvexFunction::subgradient");
  switch (kind_) {
    case Kind::quadratic: return Q_ * y + q_;
    case Kind::weighted_l1: {
      Vector g(dim_);
      for (Eigen::Index i = 0; i < dim_; ++i) g[i] = w_[i] * sign(y[i]);
      return g;
    }
    case Kind::affine: return q_;
  }
  return Vector::Zero(dim_);
}

std::vector<Vector> ConvexFunction::subdifferential_vertices(const Vector& y) const {
  if (kind_ != Kind::weighted_l1) return {subgradient(y)};
  std::vector<Vector> vertices{subgradient(y)};
  for (Eigen::Index i = 0; i < dim_; ++i) {
    if (y[i] != 0.0 || w_[i] == 0.0) continue;
    std::vector<Vector> next;
    next.reserve(2 * vertices.size());
    for (const auto& v : vertices) {
      for (double s : {-1.0, 1.0}) {
        Vector u = v;
        u[i] = s * w_[i];
        next.push_back(std::move(u));
      }
    }
    vertices = std::move(next);
  }
  return vertices;
}

double ConvexFunction::subdifferential_distance(const Vector& y, const Vector& u) const {
  require_dimension(u, dim_, "ConvexFunction::subdifferential_distance");
  if (kind_ != Kind::weighted_l1) return (u - subgradient(y)).norm();
  double sq = 0.0;
  for (Eigen::Index i = 0; i < dim_; ++i) {
    const double gap = y[i] != 0.0 ? std::abs(u[i] - w_[i] * sign(y[i]))
                                   : std::max(std::abs(u[i]) - w_[i], 0.0);
    sq += gap * gap;
  }
  return std::sqrt(sq);
}

bool ConvexFunction::is_separable() const {
  if (kind_ != Kind::quadratic) return true;
  Matrix off = Q_;
  off.diagonal().setZero();
  return off.isZero(0.0);
}

Vector ConvexFunction::prox(const Vector& x, double gamma) const {
  require_dimension(x, dim_, "ConvexFunction::prox");
  if (!(gamma > 0.0)) throw std::invalid_argument("prox: gamma must be positive");
  switch (kind_) {
    case Kind::quadratic: {
      const Matrix system = Matrix::Identity(dim_, dim_) + gamma * Q_;
      return system.llt().solve(x - gamma * q_);
    }
    case Kind::weighted_l1: {
      Vector z(dim_);
      for (Eigen::Index i = 0; i < dim_; ++i) z[i] = soft_threshold(x[i], gamma * w_[i]);
      return z;
    }
    case Kind::affine: return x - gamma * q_;
  }
  return x;
}

Vector ConvexFunction::prox_box(const Vector& x, double gamma, const Vector& lo,
                                const Vector& hi) const {
  if (!is_separable()) throw std::logic_error("prox_box: function is not separable");
  require_dimension(x, dim_, "ConvexFunction::prox_box");
  if (!(gamma > 0.0)) throw std::invalid_argument("prox_box: gamma must be positive");
  // Separable and one-dimensional per coordinate: the constrained minimizer
  // is the clamp of the unconstrained one.
  Vector z(dim_);
  for (Eigen::Index i = 0; i < dim_; ++i) {
    double free = x[i];
    switch (kind_) {
      case Kind::quadratic: free = (x[i] - gamma * q_[i]) / (1.0 + gamma * Q_(i, i)); break;
      case Kind::weighted_l1: free = soft_threshold(x[i], gamma * w_[i]); break;
      case Kind::affine: free = x[i] - gamma * q_[i]; break;
    }
    z[i] = std::clamp(free, lo[i], hi[i]);
  }
  return z;
}

std::string ConvexFunction::describe() const {
  std::ostringstream out;
  switch (kind_) {
    case Kind::quadratic: out << "quadratic(dim=" << dim_ << ")"; break;
    case Kind::weighted_l1: out << "weighted-l1" << format_vector(w_, 6); break;
    case Kind::affine: out << "affine" << format_vector(q_, 6); break;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Bifunction

const char* to_string(BifunctionFamily family) {
  switch (family) {
    case BifunctionFamily::generic: return "generic";
    case BifunctionFamily::operator_induced: return "operator-induced";
    case BifunctionFamily::function_difference: return "function-difference";
    case BifunctionFamily::sum_of_two: return "sum-of-two";
  }
  return "unknown";
}

struct Bifunction::Impl {
  using SubgradientFn = std::function<Vector(const Vector&, const Vector&, double)>;

  explicit Impl(ConvexSet s) : set(std::move(s)) {}

  BifunctionFamily family = BifunctionFamily::generic;
  ConvexSet set;
  Eval eval;
  SubgradientFn subgradient;  // takes the finite-difference step
  bool exact_subgradient = false;
  bool zero = false;
  std::string label;
  std::optional<Matrix> M;
  std::optional<Vector> c;
  std::optional<ConvexFunction> f;
  std::vector<Bifunction> parts;
};

namespace {

Vector central_difference(const Bifunction::Eval& eval, const Vector& x, const Vector& y,
                          double h) {
  Vector g(y.size());
  Vector probe = y;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    probe[i] = y[i] + h;
    const double up = eval(x, probe);
    probe[i] = y[i] - h;
    const double down = eval(x, probe);
    probe[i] = y[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

}  // namespace

Bifunction::Bifunction(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}

Bifunction Bifunction::generic(ConvexSet set, Eval eval, Subgradient subgradient,
                               std::string label) {
  if (!eval) throw std::invalid_argument("Bifunction::generic: missing evaluation oracle");
  auto impl = std::make_shared<Impl>(std::move(set));
  impl->family = BifunctionFamily::generic;
  impl->eval = std::move(eval);
  impl->label = std::move(label);
  if (subgradient) {
    impl->exact_subgradient = true;
    impl->subgradient = [sg = std::move(subgradient)](const Vector& x, const Vector& y,
                                                      double) { return sg(x, y); };
  } else {
    impl->subgradient = [ev = impl->eval](const Vector& x, const Vector& y, double h) {
      return central_difference(ev, x, y, h);
    };
  }
  return Bifunction(std::move(impl));
}

Bifunction Bifunction::operator_induced(ConvexSet set, Matrix M, Vector c) {
  const auto d = set.dimension();
  if (M.rows() != d || M.cols() != d || c.size() != d) {
    throw std::invalid_argument("operator_induced: M and c must match the set dimension");
  }
  if (!M.allFinite() || !c.allFinite()) {
    throw std::invalid_argument("operator_induced: non-finite parameter");
  }
  auto impl = std::make_shared<Impl>(std::move(set));
  impl->family = BifunctionFamily::operator_induced;
  impl->eval = [M, c](const Vector& x, const Vector& y) { return (M * x + c).dot(y - x); };
  impl->subgradient = [M, c](const Vector& x, const Vector&, double) -> Vector {
    return M * x + c;
  };
  impl->exact_subgradient = true;
  impl->label = "operator-induced";
  impl->zero = M.isZero(0.0) && c.isZero(0.0);
  impl->M = std::move(M);
  impl->c = std::move(c);
  return Bifunction(std::move(impl));
}

Bifunction Bifunction::zero(ConvexSet set) {
  const auto d = set.dimension();
  auto impl = std::make_shared<Impl>(std::move(set));
  impl->family = BifunctionFamily::operator_induced;
  impl->eval = [](const Vector&, const Vector&) { return 0.0; };
  impl->subgradient = [d](const Vector&, const Vector&, double) -> Vector {
    return Vector::Zero(d);
  };
  impl->exact_subgradient = true;
  impl->zero = true;
  impl->label = "zero";
  impl->M = Matrix::Zero(d, d);
  impl->c = Vector::Zero(d);
  return Bifunction(std::move(impl));
}

Bifunction Bifunction::function_difference(ConvexSet set, ConvexFunction f) {
  if (f.dimension() != set.dimension()) {
    throw std::invalid_argument("function_difference: function and set dimensions differ");
  }
  auto impl = std::make_shared<Impl>(std::move(set));
  impl->family = BifunctionFamily::function_difference;
  impl->eval = [f](const Vector& x, const Vector& y) { return f(y) - f(x); };
  impl->subgradient = [f](const Vector&, const Vector& y, double) { return f.subgradient(y); };
  impl->exact_subgradient = true;
  impl->label = "function-difference:" + f.describe();
  impl->f = std::move(f);
  return Bifunction(std::move(impl));
}

double Bifunction::operator()(const Vector& x, const Vector& y) const {
  return impl_->eval(x, y);
}

Vector Bifunction::subgradient(const Vector& x, const Vector& y, double fd_step) const {
  return impl_->subgradient(x, y, fd_step);
}

bool Bifunction::has_subgradient_oracle() const { return impl_->exact_subgradient; }
BifunctionFamily Bifunction::family() const { return impl_->family; }
const ConvexSet& Bifunction::set() const { return impl_->set; }
Eigen::Index Bifunction::dimension() const { return impl_->set.dimension(); }
bool Bifunction::is_zero() const { return impl_->zero; }
const std::string& Bifunction::label() const { return impl_->label; }

const Matrix* Bifunction::operator_matrix() const {
  return impl_->M ? &*impl_->M : nullptr;
}
const Vector* Bifunction::operator_offset() const {
  return impl_->c ? &*impl_->c : nullptr;
}
const ConvexFunction* Bifunction::convex_function() const {
  return impl_->f ? &*impl_->f : nullptr;
}
std::vector<Bifunction> Bifunction::summands() const { return impl_->parts; }

Bifunction sum(const Bifunction& F, const Bifunction& G) {
  if (!(F.set() == G.set())) {
    throw std::invalid_argument("sum: bifunctions are defined on different sets");
  }
  auto impl = std::make_shared<Bifunction::Impl>(F.set());
  impl->family = BifunctionFamily::sum_of_two;
  impl->eval = [F, G](const Vector& x, const Vector& y) { return F(x, y) + G(x, y); };
  impl->subgradient = [F, G](const Vector& x, const Vector& y, double h) -> Vector {
    return F.subgradient(x, y, h) + G.subgradient(x, y, h);
  };
  impl->exact_subgradient = F.has_subgradient_oracle() && G.has_subgradient_oracle();
  impl->zero = F.is_zero() && G.is_zero();
  impl->label = "(" + F.label() + ") + (" + G.label() + ")";
  impl->parts = {F, G};
  return Bifunction(std::move(impl));
}

// ---------------------------------------------------------------------------
// Standing-assumption diagnostic

namespace {

double checked(const Bifunction& F, const Vector& x, const Vector& y) {
  const double v = F(x, y);
  if (!std::isfinite(v)) {
    throw std::domain_error("bifunction returned a non-finite value at x=" +
                            format_vector(x) + ", y=" + format_vector(y));
  }
  return v;
}

}  // namespace

Assumption1Report check_assumption1(const Bifunction& F, std::size_t samples,
                                    std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("check_assumption1: samples must be >= 1");
  const auto& C = F.set();
  const auto xs = sample_points(C, samples, seed);
  const auto ys = sample_points(C, samples, seed + 1);
  const auto zs = sample_points(C, samples, seed + 2);
  constexpr std::array<double, 6> ladder{1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6};

  Assumption1Report report;
  report.samples = samples;
  for (std::size_t i = 0; i < samples; ++i) {
    const Vector& x = xs[i];
    const Vector& y = ys[i];
    const Vector& z = zs[i];
    report.diagonal = std::max(report.diagonal, std::abs(checked(F, x, x)));

    const double hxy = checked(F, x, y);
    report.monotonicity = std::max(report.monotonicity, hxy + checked(F, y, x));

    const Vector mid = 0.5 * (y + z);
    const double gap = checked(F, x, mid) - 0.5 * (hxy + checked(F, x, z));
    report.convexity = std::max(report.convexity, gap);

    std::array<double, ladder.size()> along{};
    for (std::size_t k = 0; k < ladder.size(); ++k) {
      along[k] = checked(F, (1.0 - ladder[k]) * x + ladder[k] * z, y);
    }
    // Limit proxy: linear extrapolation to eps = 0 from the two smallest steps.
    const std::size_t last = ladder.size() - 1;
    const double proxy = along[last] - (along[last - 1] - along[last]) * ladder[last] /
                                           (ladder[last - 1] - ladder[last]);
    report.hemicontinuity = std::max(report.hemicontinuity, proxy - hxy);
  }
  report.monotonicity = std::max(report.monotonicity, 0.0);
  report.convexity = std::max(report.convexity, 0.0);
  report.hemicontinuity = std::max(report.hemicontinuity, 0.0);
  report.passed = report.diagonal <= kAssumptionTol && report.monotonicity <= kAssumptionTol &&
                  report.convexity <= kAssumptionTol &&
                  report.hemicontinuity <= kHemicontinuityTol;
  return report;
}

}  // namespace eqdr
