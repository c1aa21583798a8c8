// gensec command-line interface: solve problem files, run the benchmark
// registry, replay certificate checks, or call the feasible inexact
// projection directly.
//
// Exit codes: 0 success/converged, 1 input error, 2 iteration budget
// exhausted, 3 subproblem or projection failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gensec/gensec.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitMaxIterations = 2;
constexpr int kExitFailure = 3;

gensec::Vector parse_point(const std::string& text, const std::string& flag) {
  std::vector<double> entries;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      entries.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw gensec::InvalidProblem(flag + ": '" + item + "' is not a number");
    }
  }
  if (entries.empty()) throw gensec::InvalidProblem(flag + ": empty point");
  return gensec::Vector(entries);
}

struct SolveFlags {
  std::string problem_path;
  std::string x0_text;
  std::string xm1_text;
  double theta = 0.25;
  std::string b0 = "fd";
  double tol = 1e-10;
  std::size_t max_iter = 200;
  std::string trace_path;
  int seed = 0;  // accepted for interface stability; the solver is deterministic
};

void add_solve_flags(CLI::App* cmd, SolveFlags& flags) {
  cmd->add_option("problem", flags.problem_path, "problem file (JSON)")->required();
  cmd->add_option("--x0", flags.x0_text, "starting point, comma-separated reals")->required();
  cmd->add_option("--x-1", flags.xm1_text, "auxiliary starting point x_{-1}")->required();
  cmd->add_option("--theta", flags.theta, "inexact projection forcing term in [0, 0.5)");
  cmd->add_option("--b0", flags.b0, "initial operator: identity|fd|analytic")
      ->check(CLI::IsMember({"identity", "fd", "analytic"}));
  cmd->add_option("--tol", flags.tol, "residual tolerance");
  cmd->add_option("--max-iter", flags.max_iter, "outer iteration budget");
  cmd->add_option("--seed", flags.seed, "random seed (env GENSEC_SEED as fallback)")
      ->envname("GENSEC_SEED");
}

gensec::SolverConfig make_config(const SolveFlags& flags) {
  gensec::SolverConfig config;
  config.theta = flags.theta;
  config.tol_residual = flags.tol;
  config.max_outer = flags.max_iter;
  if (flags.b0 == "identity")
    config.b0_mode = gensec::B0Mode::Identity;
  else if (flags.b0 == "analytic")
    config.b0_mode = gensec::B0Mode::Analytic;
  else
    config.b0_mode = gensec::B0Mode::FiniteDifference;
  return config;
}

int status_exit_code(gensec::SolveStatus status) {
  switch (status) {
    case gensec::SolveStatus::Converged:
      return kExitOk;
    case gensec::SolveStatus::MaxIterations:
      return kExitMaxIterations;
    default:
      return kExitFailure;
  }
}

int run_solve(const SolveFlags& flags) {
  const gensec::ProblemSpec problem = gensec::parse_problem_file(flags.problem_path);
  const gensec::Vector x0 = parse_point(flags.x0_text, "--x0");
  const gensec::Vector xm1 = parse_point(flags.xm1_text, "--x-1");
  const gensec::SolveOutcome outcome = gensec::solve(problem, make_config(flags), xm1, x0);

  if (!flags.trace_path.empty()) {
    std::ofstream out(flags.trace_path, std::ios::binary);
    if (!out) {
      std::cerr << "error: cannot write trace file '" << flags.trace_path << "'\n";
      return kExitInput;
    }
    gensec::write_trace_csv(out, outcome, problem.known_solution);
  }

  const double final_residual =
      gensec::residual(problem.term, outcome.final_point,
                       problem.f(outcome.final_point) + problem.g(outcome.final_point));
  std::cout << "status=" << gensec::to_string(outcome.status)
            << " k=" << (outcome.trace.empty() ? 0 : outcome.trace.back().k)
            << " residual=" << gensec::format_double(final_residual) << "\n";
  if (!outcome.failure_detail.empty()) std::cout << "detail: " << outcome.failure_detail << "\n";
  return status_exit_code(outcome.status);
}

struct BenchFlags {
  std::string out_path = "bench_report.csv";
  std::string format = "csv";
  unsigned seed = gensec::kDefaultBenchSeed;
};

int run_bench_cmd(const BenchFlags& flags) {
  const auto cases = gensec::registry(flags.seed);
  const gensec::BenchReport report = gensec::run_bench(cases, gensec::SolverConfig{});

  std::ofstream out(flags.out_path, std::ios::binary);
  if (!out) {
    std::cerr << "error: cannot write report file '" << flags.out_path << "'\n";
    return kExitInput;
  }
  if (flags.format == "json")
    gensec::write_bench_json(out, report);
  else
    gensec::write_bench_csv(out, report);

  for (const auto& row : report.rows) {
    std::cout << row.case_name << "[" << row.start_index << "] status=" << to_string(row.status)
              << " iters=" << row.iterations
              << " residual=" << gensec::format_double(row.final_residual)
              << (row.matched_expected ? "" : "  <-- unexpected") << "\n";
  }
  std::cout << (report.all_matched ? "all benchmark cases matched expectations"
                                   : "some benchmark cases missed expectations")
            << "\n";
  return report.all_matched ? kExitOk : kExitFailure;
}

struct CheckFlags {
  SolveFlags solve;
  bool require_deterioration = false;
};

int run_check(const CheckFlags& flags) {
  const gensec::ProblemSpec problem = gensec::parse_problem_file(flags.solve.problem_path);
  if (!problem.known_solution) {
    std::cerr << "error: certificate checks need 'known_solution' in the problem file\n";
    return kExitInput;
  }
  const bool can_deteriorate =
      problem.jacobian_f.has_value() && problem.lipschitz_L.has_value();
  if (flags.require_deterioration && !can_deteriorate) {
    std::cerr << "error: deterioration check needs an analytic Jacobian and 'lipschitz_L'\n";
    return kExitInput;
  }

  const gensec::Vector x0 = parse_point(flags.solve.x0_text, "--x0");
  const gensec::Vector xm1 = parse_point(flags.solve.xm1_text, "--x-1");
  const gensec::SolveOutcome outcome =
      gensec::solve(problem, make_config(flags.solve), xm1, x0);
  std::cout << "status=" << gensec::to_string(outcome.status) << "\n";

  std::vector<gensec::DeteriorationRow> det_rows;
  if (can_deteriorate) det_rows = gensec::bounded_deterioration_check(outcome.trace, problem);

  bool all_pass = outcome.status == gensec::SolveStatus::Converged;
  for (std::size_t i = 0; i < outcome.trace.size(); ++i) {
    const auto& rec = outcome.trace[i];
    if (rec.terminal) continue;
    std::cout << "k=" << rec.k;

    if (rec.update_applied) {
      const bool ok = rec.secant_gap <= 1e-12 * (1.0 + rec.z_norm);
      all_pass = all_pass && ok;
      std::cout << " secant=" << (ok ? "pass" : "FAIL");
    } else {
      std::cout << " secant=skip";
    }

    if (rec.took_projection) {
      const gensec::Vector& next_x =
          i + 1 < outcome.trace.size() ? outcome.trace[i + 1].x : outcome.final_point;
      const auto cert = gensec::verify_inexact_projection(problem.set, next_x, rec.y, rec.x,
                                                          rec.theta_used);
      all_pass = all_pass && cert.valid;
      std::cout << " projection=" << (cert.valid ? "pass" : "FAIL");
    } else {
      std::cout << " projection=skip";
    }

    if (can_deteriorate) {
      bool found = false;
      for (const auto& row : det_rows)
        if (row.k == rec.k) {
          all_pass = all_pass && row.holds;
          std::cout << " deterioration=" << (row.holds ? "pass" : "FAIL");
          found = true;
          break;
        }
      if (!found) std::cout << " deterioration=skip";
    }
    std::cout << "\n";
  }

  std::cout << "tail_ratios=";
  try {
    const auto ratios = gensec::q_linear_rate(outcome.trace, *problem.known_solution);
    for (std::size_t i = 0; i < ratios.size(); ++i)
      std::cout << (i ? "," : "") << gensec::format_double(ratios[i]);
  } catch (const gensec::InsufficientTrace&) {
    std::cout << "(insufficient trace)";
  }
  std::cout << "\n" << (all_pass ? "all checks passed" : "some checks FAILED") << "\n";
  return all_pass ? kExitOk : kExitFailure;
}

struct ProjectFlags {
  std::string set_text;
  std::string v_text, u_text, w0_text;
  double theta = 0.25;
};

int run_project(const ProjectFlags& flags) {
  const gensec::Vector v = parse_point(flags.v_text, "--v");
  const gensec::Vector u = parse_point(flags.u_text, "--u");
  const gensec::Vector w0 = parse_point(flags.w0_text, "--w0");

  nlohmann::json jset;
  try {
    if (!flags.set_text.empty() && flags.set_text.front() == '{') {
      jset = nlohmann::json::parse(flags.set_text);
    } else {
      std::ifstream in(flags.set_text);
      if (!in) throw gensec::InvalidProblem("--set: cannot open '" + flags.set_text + "'");
      in >> jset;
    }
  } catch (const nlohmann::json::exception& e) {
    throw gensec::InvalidProblem(std::string("--set: invalid JSON: ") + e.what());
  }
  const gensec::FeasibleSet set = gensec::parse_set_json(jset, v.size());

  const auto cert = gensec::condg_project(set, v, u, w0, flags.theta);
  std::cout << "w_plus=";
  for (std::size_t i = 0; i < cert.point.size(); ++i)
    std::cout << (i ? "," : "") << gensec::format_double(cert.point[i]);
  std::cout << "\nsup_inner=" << gensec::format_double(cert.sup_inner)
            << "\nthreshold=" << gensec::format_double(cert.threshold)
            << "\ninner_iterations=" << cert.inner_iterations << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Broyden secant-type solver for constrained mixed generalized equations"};
  app.require_subcommand(1);

  SolveFlags solve_flags;
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve a problem file");
  add_solve_flags(solve_cmd, solve_flags);
  solve_cmd->add_option("--trace", solve_flags.trace_path, "write the iteration trace (CSV)");

  BenchFlags bench_flags;
  CLI::App* bench_cmd = app.add_subcommand("bench", "run the built-in benchmark registry");
  bench_cmd->add_option("--out", bench_flags.out_path, "report file path");
  bench_cmd->add_option("--format", bench_flags.format, "report format")
      ->check(CLI::IsMember({"csv", "json"}));
  bench_cmd->add_option("--seed", bench_flags.seed, "seed for the random VIP family")
      ->envname("GENSEC_SEED");

  CheckFlags check_flags;
  CLI::App* check_cmd = app.add_subcommand("check", "solve and verify per-iteration certificates");
  add_solve_flags(check_cmd, check_flags.solve);
  check_cmd->add_flag("--require-deterioration", check_flags.require_deterioration,
                      "fail unless the deterioration check can run");

  ProjectFlags project_flags;
  CLI::App* project_cmd = app.add_subcommand("project", "run the feasible inexact projection");
  project_cmd->add_option("--set", project_flags.set_text, "set description (inline JSON or file)")
      ->required();
  project_cmd->add_option("--v", project_flags.v_text, "point to project")->required();
  project_cmd->add_option("--u", project_flags.u_text, "reference point for the threshold")
      ->required();
  project_cmd->add_option("--w0", project_flags.w0_text, "feasible starting point")->required();
  project_cmd->add_option("--theta", project_flags.theta, "forcing term");

  CLI11_PARSE(app, argc, argv);

  try {
    if (solve_cmd->parsed()) return run_solve(solve_flags);
    if (bench_cmd->parsed()) return run_bench_cmd(bench_flags);
    if (check_cmd->parsed()) return run_check(check_flags);
    if (project_cmd->parsed()) return run_project(project_flags);
  } catch (const gensec::InvalidProblem& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const gensec::InfeasibleStart& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const gensec::DimensionMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const gensec::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitInput;
}
