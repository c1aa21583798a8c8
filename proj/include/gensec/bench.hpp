#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "gensec/errors.hpp"
#include "gensec/numerics.hpp"
#include "gensec/solver.hpp"

namespace gensec {

struct BenchmarkCase {
  std::string name;
  ProblemSpec problem;
  /// (x_{-1}, x_0) pairs, all feasible.
  std::vector<std::pair<Vector, Vector>> starts;
  SolveStatus expected_status = SolveStatus::Converged;
  double tolerance_to_solution = 1e-8;
};

struct BenchRow {
  std::string case_name;
  std::size_t start_index = 0;
  SolveStatus status = SolveStatus::MaxIterations;
  bool matched_expected = false;
  std::size_t iterations = 0;
  double final_residual = std::numeric_limits<double>::quiet_NaN();
  double dist_to_solution = std::numeric_limits<double>::quiet_NaN();
  double median_tail_ratio = std::numeric_limits<double>::quiet_NaN();
  std::size_t secant_pass = 0, secant_total = 0;
  std::size_t projection_pass = 0, projection_total = 0;
  std::size_t deterioration_pass = 0, deterioration_total = 0;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  bool all_matched = true;
};

inline constexpr std::uint32_t kDefaultBenchSeed = 20240715u;

namespace detail {

inline VectorFn affine_map(const Matrix& M, const Vector& c) {
  return [M, c](const Vector& x) { return M * x + c; };
}

inline JacobianFn constant_jacobian(const Matrix& M) {
  return [M](const Vector&) { return M; };
}

inline VectorFn scaled_abs_map(double scale) {
  return [scale](const Vector& x) {
    Vector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = scale * std::abs(x[i]);
    return out;
  };
}

inline double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace detail

/// Smooth system with line and circle components. Root (0, 3) checked by
/// substitution: 0 + 3 - 3 = 0 and 0 + 9 - 9 = 0. The Jacobian rows are
/// (1, 1) and (2 x1, 2 x2), so f' is Lipschitz with constant 2.
inline ProblemSpec circle_line_problem(FeasibleSet set) {
  ProblemSpec p;
  p.dimension = 2;
  p.f = [](const Vector& x) {
    return Vector{x[0] + x[1] - 3.0, x[0] * x[0] + x[1] * x[1] - 9.0};
  };
  p.g = zero_map();
  p.term = SetValuedTerm::zero();
  p.set = std::move(set);
  p.jacobian_f = [](const Vector& x) {
    Matrix J(2, 2);
    J(0, 0) = 1.0;
    J(0, 1) = 1.0;
    J(1, 0) = 2.0 * x[0];
    J(1, 1) = 2.0 * x[1];
    return J;
  };
  p.known_solution = Vector{0.0, 3.0};
  p.lipschitz_L = 2.0;
  return p;
}

/// One-dimensional mixed problem x - 2 + |x|/2 = 0. On x > 0 the equation
/// reads (3/2) x = 2, so the root is 4/3.
inline ProblemSpec abs_line_problem(FeasibleSet set) {
  ProblemSpec p;
  p.dimension = 1;
  Matrix M(1, 1);
  M(0, 0) = 1.0;
  p.f = detail::affine_map(M, Vector{-2.0});
  p.g = detail::scaled_abs_map(0.5);
  p.term = SetValuedTerm::zero();
  p.set = std::move(set);
  p.jacobian_f = detail::constant_jacobian(M);
  p.known_solution = Vector{4.0 / 3.0};
  p.lipschitz_L = 0.0;
  return p;
}

/// LCP with M = [[2,1],[1,2]], q = (-1,-1) written as an inclusion with the
/// nonnegative-orthant normal cone. The interior stationary point solves
/// M y = (1,1), i.e. y = (1/3, 1/3), and enumeration confirms it is the only
/// solution.
inline ProblemSpec lcp_problem() {
  ProblemSpec p;
  p.dimension = 2;
  Matrix M(2, 2);
  M(0, 0) = 2.0;
  M(0, 1) = 1.0;
  M(1, 0) = 1.0;
  M(1, 1) = 2.0;
  p.f = detail::affine_map(M, Vector{-1.0, -1.0});
  p.g = zero_map();
  const double inf = std::numeric_limits<double>::infinity();
  p.term = SetValuedTerm::normal_cone_box(Vector{0.0, 0.0}, Vector{inf, inf});
  p.set = FeasibleSet::box(Vector{0.0, 0.0}, Vector{1.0, 1.0});
  p.jacobian_f = detail::constant_jacobian(M);
  p.known_solution = Vector{1.0 / 3.0, 1.0 / 3.0};
  p.lipschitz_L = 0.0;
  return p;
}

/// Mixed equality/inequality system with F = R_- x {0}^2. With
/// A = [[2,0,1],[0,2,0],[1,0,2]] and b = -A (1,-1,0), the fully active
/// pattern gives the point (1, -1, 0); the inactive pattern projects onto
/// the infeasible side of the solution ray and is rejected, so (1, -1, 0) is
/// the least-change solution from every start used below (confirmed by the
/// enumeration oracle in the test suite).
inline ProblemSpec product_cone_problem() {
  ProblemSpec p;
  p.dimension = 3;
  Matrix A(3, 3);
  A(0, 0) = 2.0; A(0, 1) = 0.0; A(0, 2) = 1.0;
  A(1, 0) = 0.0; A(1, 1) = 2.0; A(1, 2) = 0.0;
  A(2, 0) = 1.0; A(2, 1) = 0.0; A(2, 2) = 2.0;
  p.f = detail::affine_map(A, Vector{-2.0, 2.0, -1.0});
  p.g = zero_map();
  p.term = SetValuedTerm::product_cone(1);
  p.set = FeasibleSet::box(Vector{-2.0, -2.0, -2.0}, Vector{2.0, 2.0, 2.0});
  p.jacobian_f = detail::constant_jacobian(A);
  p.known_solution = Vector{1.0, -1.0, 0.0};
  p.lipschitz_L = 0.0;
  return p;
}

/// Root of x^2 - 4 on C = [0, 2]: the solution 2 sits on the boundary and
/// every secant step from the left overshoots it, so the run exercises the
/// feasibility restoration on a converging trajectory.
inline ProblemSpec parabola_boundary_problem() {
  ProblemSpec p;
  p.dimension = 1;
  p.f = [](const Vector& x) { return Vector{x[0] * x[0] - 4.0}; };
  p.g = zero_map();
  p.term = SetValuedTerm::zero();
  p.set = FeasibleSet::box(Vector{0.0}, Vector{2.0});
  p.jacobian_f = [](const Vector& x) {
    Matrix J(1, 1);
    J(0, 0) = 2.0 * x[0];
    return J;
  };
  p.known_solution = Vector{2.0};
  p.lipschitz_L = 2.0;
  return p;
}

/// Built-in benchmark registry. The random VIP family is generated from the
/// seed and its reference solutions come from the active-set enumeration
/// oracle, never from the solver under test.
inline std::vector<BenchmarkCase> registry(std::uint32_t seed = kDefaultBenchSeed) {
  std::vector<BenchmarkCase> cases;

  {
    BenchmarkCase c;
    c.name = "circle_line_free";
    c.problem = circle_line_problem(FeasibleSet::whole_space(2));
    c.starts = {{Vector{0.9, 2.0}, Vector{1.0, 2.1}},
                {Vector{0.05, 2.93}, Vector{-0.04, 3.06}}};
    cases.push_back(std::move(c));
  }
  {
    BenchmarkCase c;
    c.name = "circle_line_box";
    c.problem = circle_line_problem(FeasibleSet::box(Vector{-1.0, 2.0}, Vector{1.0, 4.0}));
    c.starts = {{Vector{0.9, 2.0}, Vector{1.0, 2.1}},
                {Vector{0.05, 2.93}, Vector{-0.04, 3.06}}};
    cases.push_back(std::move(c));
  }
  {
    BenchmarkCase c;
    c.name = "abs_line_free";
    c.problem = abs_line_problem(FeasibleSet::whole_space(1));
    c.starts = {{Vector{0.5}, Vector{1.0}}, {Vector{1.28}, Vector{1.38}}};
    cases.push_back(std::move(c));
  }
  {
    BenchmarkCase c;
    c.name = "abs_line_box";
    c.problem = abs_line_problem(FeasibleSet::box(Vector{0.0}, Vector{2.0}));
    c.starts = {{Vector{0.5}, Vector{1.0}}, {Vector{1.28}, Vector{1.38}}};
    cases.push_back(std::move(c));
  }
  {
    BenchmarkCase c;
    c.name = "lcp_orthant";
    c.problem = lcp_problem();
    c.starts = {{Vector{0.2, 0.2}, Vector{0.3, 0.3}},
                {Vector{0.30, 0.36}, Vector{0.36, 0.30}}};
    cases.push_back(std::move(c));
  }
  {
    BenchmarkCase c;
    c.name = "product_cone_3d";
    c.problem = product_cone_problem();
    c.starts = {{Vector{0.93, -0.97, 0.04}, Vector{0.95, -1.02, 0.08}}};
    cases.push_back(std::move(c));
  }
  {
    BenchmarkCase c;
    c.name = "parabola_boundary";
    c.problem = parabola_boundary_problem();
    c.starts = {{Vector{1.93}, Vector{1.91}}, {Vector{1.94}, Vector{1.95}}};
    cases.push_back(std::move(c));
  }

  // Random strongly monotone VIPs over [0,1]^5: f(x) = P x + c with
  // P = R^T R + I.
  std::mt19937 gen(seed);
  std::uniform_real_distribution<double> entry(-1.0, 1.0);
  std::uniform_real_distribution<double> shift(-2.0, 2.0);
  const std::size_t n = 5;
  for (int instance = 0; instance < 3; ++instance) {
    Matrix R(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) R(i, j) = entry(gen);
    Matrix P = R.transpose() * R + Matrix::identity(n);
    Vector cvec(n);
    for (std::size_t i = 0; i < n; ++i) cvec[i] = shift(gen);

    SetValuedTerm term = SetValuedTerm::normal_cone_box(Vector(n, 0.0), Vector(n, 1.0));
    const auto solutions = brute_force_inclusion(term, cvec, P, Vector(n, 0.0));
    if (solutions.size() != 1)
      throw Error("registry: strongly monotone VIP must have a unique solution");
    const Vector x_star = solutions.front().point;

    BenchmarkCase c;
    c.name = "vip5_seeded_" + std::to_string(instance);
    c.problem.dimension = n;
    c.problem.f = detail::affine_map(P, cvec);
    c.problem.g = zero_map();
    c.problem.term = std::move(term);
    c.problem.set = FeasibleSet::box(Vector(n, 0.0), Vector(n, 1.0));
    c.problem.jacobian_f = detail::constant_jacobian(P);
    c.problem.known_solution = x_star;
    c.problem.lipschitz_L = 0.0;

    const Vector off_a{0.03, -0.04, 0.05, -0.02, 0.04};
    const Vector off_b{-0.05, 0.03, -0.02, 0.04, -0.03};
    auto clamped = [&](const Vector& delta) {
      Vector s = x_star + delta;
      for (std::size_t i = 0; i < n; ++i) s[i] = std::clamp(s[i], 0.0, 1.0);
      return s;
    };
    c.starts = {{clamped(off_b), clamped(off_a)}};
    cases.push_back(std::move(c));
  }

  std::stable_sort(cases.begin(), cases.end(),
                   [](const BenchmarkCase& a, const BenchmarkCase& b) { return a.name < b.name; });
  return cases;
}

/// Runs every (case, start) pair and populates all certificate counters.
/// Failures become rows, never exceptions.
inline BenchReport run_bench(const std::vector<BenchmarkCase>& cases, const SolverConfig& config) {
  BenchReport report;
  for (const auto& bench : cases) {
    for (std::size_t si = 0; si < bench.starts.size(); ++si) {
      BenchRow row;
      row.case_name = bench.name;
      row.start_index = si;

      SolveOutcome outcome;
      try {
        outcome = solve(bench.problem, config, bench.starts[si].first, bench.starts[si].second);
      } catch (const Error&) {
        row.status = SolveStatus::SubproblemFailure;
        row.matched_expected = row.status == bench.expected_status;
        report.all_matched = report.all_matched && row.matched_expected;
        report.rows.push_back(std::move(row));
        continue;
      }

      row.status = outcome.status;
      row.matched_expected = outcome.status == bench.expected_status;
      for (const auto& rec : outcome.trace)
        if (!rec.terminal) ++row.iterations;
      row.final_residual =
          residual(bench.problem.term, outcome.final_point,
                   bench.problem.f(outcome.final_point) + bench.problem.g(outcome.final_point));
      if (bench.problem.known_solution) {
        row.dist_to_solution = norm(outcome.final_point - *bench.problem.known_solution);
        row.median_tail_ratio =
            detail::median(detail::tail_error_ratios(outcome.trace, *bench.problem.known_solution));
        if (row.matched_expected && outcome.status == SolveStatus::Converged &&
            !(row.dist_to_solution <= bench.tolerance_to_solution)) {
          row.matched_expected = false;
        }
      }

      for (std::size_t i = 0; i < outcome.trace.size(); ++i) {
        const auto& rec = outcome.trace[i];
        if (rec.update_applied) {
          ++row.secant_total;
          if (rec.secant_gap <= 1e-12 * (1.0 + rec.z_norm)) ++row.secant_pass;
        }
        if (rec.took_projection) {
          ++row.projection_total;
          const Vector& next_x =
              i + 1 < outcome.trace.size() ? outcome.trace[i + 1].x : outcome.final_point;
          const auto cert = verify_inexact_projection(bench.problem.set, next_x, rec.y, rec.x,
                                                      rec.theta_used);
          if (cert.valid) ++row.projection_pass;
        }
      }
      if (bench.problem.known_solution && bench.problem.jacobian_f && bench.problem.lipschitz_L) {
        for (const auto& det : bounded_deterioration_check(outcome.trace, bench.problem)) {
          ++row.deterioration_total;
          if (det.holds) ++row.deterioration_pass;
        }
      }

      report.all_matched = report.all_matched && row.matched_expected;
      report.rows.push_back(std::move(row));
    }
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const BenchRow& a, const BenchRow& b) {
                     if (a.case_name != b.case_name) return a.case_name < b.case_name;
                     return a.start_index < b.start_index;
                   });
  return report;
}

}  // namespace gensec
