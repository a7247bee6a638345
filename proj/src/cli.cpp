#include "eqdr/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace eqdr::cli {

int exit_code(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return kExitConverged;
    case SolveStatus::max_iter: return kExitMaxIter;
    case SolveStatus::inner_failure: return kExitInnerFailure;
  }
  return kExitSpecError;
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string plain_vector(const Vector& v) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += ' ';
    out += fmt(v[i]);
  }
  return out;
}

struct Overrides {
  std::optional<double> gamma;
  std::optional<std::string> lambda;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<int> trace_every;
  std::optional<std::string> error_preset;
  std::optional<std::uint64_t> seed;
};

// Applies flag overrides; throws std::invalid_argument on invalid values.
void apply(const Overrides& o, SolverSpec& s) {
  if (o.gamma) {
    if (!(*o.gamma > 0.0)) throw std::invalid_argument("--gamma must be positive");
    s.gamma = *o.gamma;
  }
  if (o.lambda) {
    parse_lambda(*o.lambda);
    s.lambda = *o.lambda;
  }
  if (o.tol) {
    if (!(*o.tol > 0.0)) throw std::invalid_argument("--tol must be positive");
    s.tol = *o.tol;
  }
  if (o.max_iter) {
    if (*o.max_iter < 0) throw std::invalid_argument("--max-iter must be >= 0");
    s.max_iter = *o.max_iter;
  }
  if (o.trace_every) {
    if (*o.trace_every < 1) throw std::invalid_argument("--trace-every must be >= 1");
    s.trace_every = *o.trace_every;
  }
  if (o.error_preset) s.error_preset = parse_error_preset(*o.error_preset);
  if (o.seed) s.seed = *o.seed;
}

void print_summary(std::ostream& out, const ProblemInstance& p, const SolveResult& r) {
  out << "problem: " << p.name << "\n"
      << "status: " << to_string(r.status) << "\n"
      << "iterations: " << r.iterations << "\n"
      << "residual_dr: " << fmt(r.residual_dr) << "\n"
      << "certificate: " << fmt(r.certificate) << "\n"
      << "y_star: " << format_vector(r.y_star) << "\n";
  if (!r.message.empty()) out << "message: " << r.message << "\n";
  for (const auto& w : r.warnings) out << "warning: " << w << "\n";
}

struct Outcome {
  int code = kExitSpecError;
  std::string summary;
  std::string error;
};

Outcome run_one(const ProblemInstance& problem, const std::string& trace_path) {
  Outcome o;
  try {
    SolverConfig cfg;
    const SolveResult result = run_instance(problem, cfg);
    std::ostringstream summary;
    print_summary(summary, problem, result);
    o.summary = summary.str();
    if (!trace_path.empty()) {
      std::ofstream trace(trace_path);
      if (!trace) {
        o.error = "cannot write trace file " + trace_path;
        return o;
      }
      write_trace(trace, problem, result, cfg);
    }
    o.code = exit_code(result.status);
  } catch (const std::exception& e) {
    o.error = problem.name + ": " + e.what();
  }
  return o;
}

}  // namespace

void write_trace(std::ostream& out, const ProblemInstance& problem, const SolveResult& result,
                 const SolverConfig& cfg) {
  out << "n,residual_dr,step,certificate\n";
  for (const auto& rec : result.trace) {
    const double cert =
        equilibrium_certificate(problem.F, problem.G, rec.y, cfg.certificate_samples, cfg.seed);
    out << rec.n << ',' << fmt(rec.residual_dr) << ',' << fmt(rec.step) << ',' << fmt(cert)
        << '\n';
  }
  out << "\nstatus," << to_string(result.status) << "\niterations," << result.iterations
      << "\nresidual_dr," << fmt(result.residual_dr) << "\ncertificate,"
      << fmt(result.certificate) << "\ny_star," << plain_vector(result.y_star) << "\nx_star,"
      << plain_vector(result.x_star) << "\n";
}

SolveResult run_instance(const ProblemInstance& problem, SolverConfig& cfg_out) {
  cfg_out = build_config(problem.spec.solver);
  return solve(problem.F, problem.G, problem.spec.x0, cfg_out);
}

int run_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Douglas-Rachford splitting for monotone equilibrium problems", "eqdr"};
  std::string spec_path;
  std::string trace_path;
  std::string problem_name;
  std::string write_spec_path;
  bool list = false;
  Overrides o;
  app.add_option("spec", spec_path, "Problem spec file");
  app.add_option("--trace", trace_path,
                 "Trace output file (a directory with --problem all)");
  app.add_option("--gamma", o.gamma, "Resolvent parameter gamma > 0");
  app.add_option("--lambda", o.lambda, "Relaxation: constant in (0,2) or 'ramp a b n'");
  app.add_option("--tol", o.tol, "Stop when residual_dr <= tol");
  app.add_option("--max-iter", o.max_iter, "Iteration limit");
  app.add_option("--trace-every", o.trace_every, "Record every k-th iteration");
  app.add_option("--error-preset", o.error_preset, "none, geometric or inverse-square");
  app.add_option("--seed", o.seed, "Seed for sampled certificates");
  app.add_flag("--list-problems", list, "Print the corpus instance names");
  app.add_option("--problem", problem_name, "Run a corpus instance by name, or 'all'");
  app.add_option("--write-spec", write_spec_path,
                 "Write the spec of --problem (with overrides) to a file and exit");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitConverged;
  } catch (const CLI::ParseError& e) {
    err << "eqdr: " << e.what() << "\n";
    return kExitSpecError;
  }

  if (list) {
    for (const auto& p : corpus()) out << p.name << "\n";
    return kExitConverged;
  }
  if (spec_path.empty() == problem_name.empty()) {
    err << "eqdr: give exactly one of a spec file or --problem\n";
    return kExitSpecError;
  }

  std::vector<ProblemInstance> problems;
  try {
    if (!spec_path.empty()) {
      problems.push_back(instance_from_spec(spec_path, load_spec(spec_path)));
    } else if (problem_name == "all") {
      problems = corpus();
    } else if (auto p = find_problem(problem_name)) {
      problems.push_back(std::move(*p));
    } else {
      err << "eqdr: unknown problem '" << problem_name << "' (see --list-problems)\n";
      return kExitSpecError;
    }
    for (auto& p : problems) {
      apply(o, p.spec.solver);
      build_config(p.spec.solver);
    }
  } catch (const SpecError& e) {
    err << "eqdr: " << e.what() << "\n";
    return kExitSpecError;
  } catch (const std::invalid_argument& e) {
    err << "eqdr: " << e.what() << "\n";
    return kExitSpecError;
  }

  if (!write_spec_path.empty()) {
    if (problems.size() != 1) {
      err << "eqdr: --write-spec needs a single problem\n";
      return kExitSpecError;
    }
    std::ofstream file(write_spec_path);
    if (!(file << write_spec(problems.front().spec))) {
      err << "eqdr: cannot write " << write_spec_path << "\n";
      return kExitSpecError;
    }
    return kExitConverged;
  }

  if (problems.size() == 1 && problem_name != "all") {
    const Outcome r = run_one(problems.front(), trace_path);
    out << r.summary;
    if (!r.error.empty()) err << "eqdr: " << r.error << "\n";
    return r.code;
  }

  // Batch: one thread per instance, one trace file each.
  if (!trace_path.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(trace_path, ec);
    if (ec) {
      err << "eqdr: cannot create trace directory " << trace_path << "\n";
      return kExitSpecError;
    }
  }
  std::vector<Outcome> outcomes(problems.size());
  {
    std::vector<std::jthread> workers;
    for (std::size_t i = 0; i < problems.size(); ++i) {
      workers.emplace_back([&, i] {
        const std::string path =
            trace_path.empty()
                ? std::string()
                : (std::filesystem::path(trace_path) / (problems[i].name + ".csv")).string();
        outcomes[i] = run_one(problems[i], path);
      });
    }
  }
  int code = kExitConverged;
  for (const auto& r : outcomes) {
    out << r.summary;
    if (!r.error.empty()) err << "eqdr: " << r.error << "\n";
    code = std::max(code, r.error.empty() ? r.code : kExitSpecError);
  }
  return code;
}

}  // namespace eqdr::cli
