#include "eqdr/spec_file.hpp"

#include "eqdr/operators.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace eqdr {

SpecError::SpecError(const std::string& source, int line, const std::string& message)
    : std::runtime_error(line > 0 ? source + ":" + std::to_string(line) + ": " + message
                                  : source + ": " + message),
      line_(line) {}

const char* to_string(ErrorPreset preset) {
  switch (preset) {
    case ErrorPreset::none: return "none";
    case ErrorPreset::geometric: return "geometric";
    case ErrorPreset::inverse_square: return "inverse-square";
  }
  return "none";
}

ErrorPreset parse_error_preset(const std::string& text) {
  if (text == "none") return ErrorPreset::none;
  if (text == "geometric") return ErrorPreset::geometric;
  if (text == "inverse-square") return ErrorPreset::inverse_square;
  throw std::invalid_argument("unknown error preset '" + text +
                              "' (expected none, geometric or inverse-square)");
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_real(const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) throw std::invalid_argument("expected a number");
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v)) {
    throw std::invalid_argument("'" + t + "' is not a finite number");
  }
  return v;
}

long long parse_integer(const std::string& text) {
  const std::string t = trim(text);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(t.c_str(), &end, 10);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    throw std::invalid_argument("'" + t + "' is not an integer");
  }
  return v;
}

Vector parse_vector(const std::string& text) {
  std::string cleaned = text;
  for (char& ch : cleaned) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream in(cleaned);
  std::vector<double> values;
  std::string token;
  while (in >> token) values.push_back(parse_real(token));
  if (values.empty()) throw std::invalid_argument("expected at least one number");
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Matrix parse_matrix(const std::string& text) {
  std::vector<Vector> rows;
  std::istringstream in(text);
  std::string row;
  while (std::getline(in, row, ';')) rows.push_back(parse_vector(row));
  const auto cols = rows.front().size();
  Matrix M(static_cast<Eigen::Index>(rows.size()), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != cols) throw std::invalid_argument("matrix rows have different lengths");
    M.row(static_cast<Eigen::Index>(i)) = rows[i].transpose();
  }
  return M;
}

std::string vector_text(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ' ';
    out += fmt(v[i]);
  }
  return out;
}

std::string matrix_text(const Matrix& M) {
  std::string out;
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    if (i > 0) out += "; ";
    out += vector_text(M.row(i).transpose());
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

struct Section {
  int line = 0;
  std::map<std::string, Entry> entries;
};

class Reader {
 public:
  Reader(const std::string& text, std::string source) : source_(std::move(source)) {
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    Section* current = nullptr;
    while (std::getline(in, raw)) {
      ++line;
      const auto hash = raw.find('#');
      const std::string content = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
      if (content.empty()) continue;
      if (content.front() == '[') {
        if (content.back() != ']') fail(line, "malformed section header '" + content + "'");
        const std::string name = trim(content.substr(1, content.size() - 2));
        static const char* known[] = {"space", "set", "F", "G", "solver", "init"};
        bool ok = false;
        for (const char* k : known) ok = ok || name == k;
        if (!ok) fail(line, "unknown section [" + name + "]");
        if (sections_.count(name)) fail(line, "duplicate section [" + name + "]");
        current = &sections_[name];
        current->line = line;
        continue;
      }
      if (current == nullptr) fail(line, "key outside of any section");
      const auto eq = content.find('=');
      if (eq == std::string::npos) fail(line, "expected 'key = value'");
      const std::string key = trim(content.substr(0, eq));
      const std::string value = trim(content.substr(eq + 1));
      if (key.empty()) fail(line, "empty key");
      if (current->entries.count(key)) fail(line, "duplicate key '" + key + "'");
      current->entries[key] = {value, line, false};
    }
    for (const char* name : {"space", "set", "F", "G", "solver", "init"}) {
      if (!sections_.count(name)) fail(0, std::string("missing section [") + name + "]");
    }
  }

  [[noreturn]] void fail(int line, const std::string& message) const {
    throw SpecError(source_, line, message);
  }

  Section& section(const std::string& name) { return sections_.at(name); }

  Entry* find(const std::string& sec, const std::string& key) {
    auto& entries = sections_.at(sec).entries;
    auto it = entries.find(key);
    if (it == entries.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  Entry& require(const std::string& sec, const std::string& key) {
    Entry* e = find(sec, key);
    if (e == nullptr) fail(sections_.at(sec).line, "[" + sec + "] needs key '" + key + "'");
    return *e;
  }

  template <class Fn>
  auto convert(const Entry& e, const std::string& key, Fn fn) -> decltype(fn(e.value)) {
    try {
      return fn(e.value);
    } catch (const std::invalid_argument& ex) {
      fail(e.line, key + ": " + ex.what());
    }
  }

  Vector vector_of(const std::string& sec, const std::string& key, Eigen::Index dim) {
    const Entry& e = require(sec, key);
    Vector v = convert(e, key, parse_vector);
    if (v.size() != dim) {
      fail(e.line, key + ": expected " + std::to_string(dim) + " entries, got " +
                       std::to_string(v.size()));
    }
    return v;
  }

  Matrix matrix_of(const std::string& sec, const std::string& key, Eigen::Index dim) {
    const Entry& e = require(sec, key);
    Matrix M = convert(e, key, parse_matrix);
    if (M.rows() != dim || M.cols() != dim) {
      fail(e.line, key + ": expected a " + std::to_string(dim) + "x" + std::to_string(dim) +
                       " matrix");
    }
    return M;
  }

  double real_of(const std::string& sec, const std::string& key) {
    const Entry& e = require(sec, key);
    return convert(e, key, parse_real);
  }

  void reject_unused() const {
    for (const auto& [name, section] : sections_) {
      for (const auto& [key, entry] : section.entries) {
        if (!entry.used) fail(entry.line, "unknown key '" + key + "' in [" + name + "]");
      }
    }
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
  std::map<std::string, Section> sections_;
};

SetSpec read_set(Reader& r, Eigen::Index dim) {
  SetSpec s;
  const Entry& kind = r.require("set", "kind");
  if (kind.value == "whole-space") {
    s.kind = SetSpec::Kind::whole_space;
  } else if (kind.value == "box") {
    s.kind = SetSpec::Kind::box;
    s.lo = r.vector_of("set", "lo", dim);
    s.hi = r.vector_of("set", "hi", dim);
  } else if (kind.value == "ball") {
    s.kind = SetSpec::Kind::ball;
    s.center = r.vector_of("set", "center", dim);
    s.radius = r.real_of("set", "radius");
  } else if (kind.value == "halfspace") {
    s.kind = SetSpec::Kind::halfspace;
    s.normal = r.vector_of("set", "normal", dim);
    s.offset = r.real_of("set", "offset");
  } else if (kind.value == "simplex") {
    s.kind = SetSpec::Kind::simplex;
  } else {
    r.fail(kind.line, "unknown set kind '" + kind.value +
                          "' (expected whole-space, box, ball, halfspace or simplex)");
  }
  return s;
}

BifunctionSpec read_bifunction(Reader& r, const std::string& sec, Eigen::Index dim) {
  BifunctionSpec b;
  const Entry& family = r.require(sec, "family");
  if (family.value == "zero") {
    b.family = BifunctionSpec::Family::zero;
  } else if (family.value == "affine-operator" || family.value == "operator-bridge") {
    b.family = family.value == "affine-operator" ? BifunctionSpec::Family::affine_operator
                                                 : BifunctionSpec::Family::operator_bridge;
    b.matrix = r.matrix_of(sec, "matrix", dim);
    b.offset = r.vector_of(sec, "offset", dim);
  } else if (family.value == "function-difference") {
    b.family = BifunctionSpec::Family::function_difference;
    const Entry& fn = r.require(sec, "function");
    FunctionSpec& f = b.function;
    if (fn.value == "quadratic") {
      f.kind = ConvexFunction::Kind::quadratic;
      f.matrix = r.matrix_of(sec, "matrix", dim);
      f.linear = r.vector_of(sec, "linear", dim);
    } else if (fn.value == "weighted-l1") {
      f.kind = ConvexFunction::Kind::weighted_l1;
      f.weights = r.vector_of(sec, "weights", dim);
    } else if (fn.value == "affine") {
      f.kind = ConvexFunction::Kind::affine;
      f.linear = r.vector_of(sec, "linear", dim);
      if (r.find(sec, "constant") != nullptr) f.constant = r.real_of(sec, "constant");
    } else {
      r.fail(fn.line, "unknown function '" + fn.value +
                          "' (expected quadratic, weighted-l1 or affine)");
    }
  } else {
    r.fail(family.line, "unknown family '" + family.value +
                            "' (expected zero, affine-operator, function-difference or "
                            "operator-bridge)");
  }
  return b;
}

}  // namespace

RelaxationSchedule parse_lambda(const std::string& text) {
  std::istringstream in(text);
  std::string head;
  in >> head;
  if (head == "ramp") {
    std::string from, to, steps, extra;
    if (!(in >> from >> to >> steps) || (in >> extra)) {
      throw std::invalid_argument("ramp schedule is 'ramp <from> <to> <steps>'");
    }
    return RelaxationSchedule::ramp(parse_real(from), parse_real(to),
                                    static_cast<int>(parse_integer(steps)));
  }
  return RelaxationSchedule::constant(parse_real(text));
}

ProblemSpec parse_spec(const std::string& text, const std::string& source) {
  Reader r(text, source);
  ProblemSpec spec;

  const Entry& dim_entry = r.require("space", "dimension");
  const long long dim = r.convert(dim_entry, "dimension", parse_integer);
  if (dim < 1 || dim > 1000) r.fail(dim_entry.line, "dimension must be between 1 and 1000");
  spec.dimension = static_cast<Eigen::Index>(dim);

  spec.set = read_set(r, spec.dimension);
  spec.F = read_bifunction(r, "F", spec.dimension);
  spec.G = read_bifunction(r, "G", spec.dimension);

  SolverSpec& s = spec.solver;
  if (Entry* e = r.find("solver", "gamma")) {
    s.gamma = r.convert(*e, "gamma", parse_real);
    if (!(s.gamma > 0.0)) r.fail(e->line, "gamma must be positive");
  }
  if (Entry* e = r.find("solver", "lambda")) {
    r.convert(*e, "lambda", parse_lambda);
    s.lambda = e->value;
  }
  if (Entry* e = r.find("solver", "tol")) {
    s.tol = r.convert(*e, "tol", parse_real);
    if (!(s.tol > 0.0)) r.fail(e->line, "tol must be positive");
  }
  if (Entry* e = r.find("solver", "max_iter")) {
    const long long v = r.convert(*e, "max_iter", parse_integer);
    if (v < 0 || v > 100000000) r.fail(e->line, "max_iter must be between 0 and 1e8");
    s.max_iter = static_cast<int>(v);
  }
  if (Entry* e = r.find("solver", "error_preset")) {
    s.error_preset = r.convert(*e, "error_preset", parse_error_preset);
  }
  if (Entry* e = r.find("solver", "seed")) {
    const long long v = r.convert(*e, "seed", parse_integer);
    if (v < 0) r.fail(e->line, "seed must be nonnegative");
    s.seed = static_cast<std::uint64_t>(v);
  }
  if (Entry* e = r.find("solver", "trace_every")) {
    const long long v = r.convert(*e, "trace_every", parse_integer);
    if (v < 1 || v > 100000000) r.fail(e->line, "trace_every must be at least 1");
    s.trace_every = static_cast<int>(v);
  }
  spec.x0 = r.vector_of("init", "x0", spec.dimension);
  r.reject_unused();

  // Structural checks (box order, monotonicity, convexity) by building.
  ConvexSet C = ConvexSet::whole_space(spec.dimension);
  try {
    C = build_set(spec.set, spec.dimension);
  } catch (const std::invalid_argument& e) {
    r.fail(r.section("set").line, std::string("[set]: ") + e.what());
  }
  for (const char* name : {"F", "G"}) {
    try {
      build_bifunction(name[0] == 'F' ? spec.F : spec.G, C);
    } catch (const std::invalid_argument& e) {
      r.fail(r.section(name).line, std::string("[") + name + "]: " + e.what());
    }
  }
  return spec;
}

ProblemSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SpecError(path, 0, "cannot read file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str(), path);
}

std::string write_spec(const ProblemSpec& spec) {
  std::ostringstream out;
  out << "[space]\ndimension = " << spec.dimension << "\n\n[set]\n";
  const SetSpec& s = spec.set;
  switch (s.kind) {
    case SetSpec::Kind::whole_space: out << "kind = whole-space\n"; break;
    case SetSpec::Kind::box:
      out << "kind = box\nlo = " << vector_text(s.lo) << "\nhi = " << vector_text(s.hi) << "\n";
      break;
    case SetSpec::Kind::ball:
      out << "kind = ball\ncenter = " << vector_text(s.center) << "\nradius = " << fmt(s.radius)
          << "\n";
      break;
    case SetSpec::Kind::halfspace:
      out << "kind = halfspace\nnormal = " << vector_text(s.normal)
          << "\noffset = " << fmt(s.offset) << "\n";
      break;
    case SetSpec::Kind::simplex: out << "kind = simplex\n"; break;
  }
  for (const auto* b : {&spec.F, &spec.G}) {
    out << "\n[" << (b == &spec.F ? "F" : "G") << "]\n";
    switch (b->family) {
      case BifunctionSpec::Family::zero: out << "family = zero\n"; break;
      case BifunctionSpec::Family::affine_operator:
      case BifunctionSpec::Family::operator_bridge:
        out << "family = "
            << (b->family == BifunctionSpec::Family::affine_operator ? "affine-operator"
                                                                     : "operator-bridge")
            << "\nmatrix = " << matrix_text(b->matrix) << "\noffset = " << vector_text(b->offset)
            << "\n";
        break;
      case BifunctionSpec::Family::function_difference: {
        const FunctionSpec& f = b->function;
        out << "family = function-difference\n";
        switch (f.kind) {
          case ConvexFunction::Kind::quadratic:
            out << "function = quadratic\nmatrix = " << matrix_text(f.matrix)
                << "\nlinear = " << vector_text(f.linear) << "\n";
            break;
          case ConvexFunction::Kind::weighted_l1:
            out << "function = weighted-l1\nweights = " << vector_text(f.weights) << "\n";
            break;
          case ConvexFunction::Kind::affine:
            out << "function = affine\nlinear = " << vector_text(f.linear)
                << "\nconstant = " << fmt(f.constant) << "\n";
            break;
        }
        break;
      }
    }
  }
  const SolverSpec& v = spec.solver;
  out << "\n[solver]\ngamma = " << fmt(v.gamma) << "\nlambda = " << v.lambda
      << "\ntol = " << fmt(v.tol) << "\nmax_iter = " << v.max_iter
      << "\nerror_preset = " << to_string(v.error_preset) << "\nseed = " << v.seed
      << "\ntrace_every = " << v.trace_every << "\n\n[init]\nx0 = " << vector_text(spec.x0)
      << "\n";
  return out.str();
}

ConvexSet build_set(const SetSpec& spec, Eigen::Index dimension) {
  switch (spec.kind) {
    case SetSpec::Kind::whole_space: return ConvexSet::whole_space(dimension);
    case SetSpec::Kind::box: return ConvexSet::box(spec.lo, spec.hi);
    case SetSpec::Kind::ball: return ConvexSet::ball(spec.center, spec.radius);
    case SetSpec::Kind::halfspace: return ConvexSet::halfspace(spec.normal, spec.offset);
    case SetSpec::Kind::simplex: return ConvexSet::simplex(dimension);
  }
  throw std::invalid_argument("build_set: unknown kind");
}

ConvexFunction build_function(const FunctionSpec& spec) {
  switch (spec.kind) {
    case ConvexFunction::Kind::quadratic: return ConvexFunction::quadratic(spec.matrix, spec.linear);
    case ConvexFunction::Kind::weighted_l1: return ConvexFunction::weighted_l1(spec.weights);
    case ConvexFunction::Kind::affine: return ConvexFunction::affine(spec.linear, spec.constant);
  }
  throw std::invalid_argument("build_function: unknown kind");
}

Bifunction build_bifunction(const BifunctionSpec& spec, const ConvexSet& C) {
  switch (spec.family) {
    case BifunctionSpec::Family::zero: return Bifunction::zero(C);
    case BifunctionSpec::Family::affine_operator:
      affine_operator(spec.matrix, spec.offset);  // rejects non-monotone M
      return Bifunction::operator_induced(C, spec.matrix, spec.offset);
    case BifunctionSpec::Family::function_difference:
      return Bifunction::function_difference(C, build_function(spec.function));
    case BifunctionSpec::Family::operator_bridge:
      return bifunction_from_operator(affine_operator(spec.matrix, spec.offset), C);
  }
  throw std::invalid_argument("build_bifunction: unknown family");
}

SolverConfig build_config(const SolverSpec& spec) {
  SolverConfig cfg;
  cfg.gamma = spec.gamma;
  cfg.lambda = parse_lambda(spec.lambda);
  cfg.residual_tol = spec.tol;
  cfg.max_iter = spec.max_iter;
  cfg.seed = spec.seed;
  cfg.trace_every = spec.trace_every;
  switch (spec.error_preset) {
    case ErrorPreset::none: break;
    case ErrorPreset::geometric:
      cfg.error_a = cfg.error_b = ErrorSchedule::geometric(1.0, 0.5);
      break;
    case ErrorPreset::inverse_square:
      cfg.error_a = cfg.error_b = ErrorSchedule::inverse_square(1.0);
      break;
  }
  return cfg;
}

}  // namespace eqdr
