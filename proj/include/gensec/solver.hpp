#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "gensec/divided_difference.hpp"
#include "gensec/errors.hpp"
#include "gensec/feasible_set.hpp"
#include "gensec/numerics.hpp"
#include "gensec/set_valued.hpp"

namespace gensec {

/// Problem data for 0 in f(x) + g(x) + F(x), x in C, plus optional ground
/// truth used only by the diagnostics layer.
struct ProblemSpec {
  std::size_t dimension = 0;
  VectorFn f;
  VectorFn g;
  SetValuedTerm term;
  FeasibleSet set;
  std::optional<JacobianFn> jacobian_f;
  std::optional<Vector> known_solution;
  std::optional<double> lipschitz_L;
  std::optional<double> dd_bound_M;
};

enum class B0Mode { Identity, FiniteDifference, Analytic, Explicit };

struct SolverConfig {
  /// Explicit forcing-term sequence; when empty, `theta` is used throughout.
  /// A shorter sequence than the run repeats its last entry.
  std::vector<double> theta_sequence;
  double theta = 0.25;
  B0Mode b0_mode = B0Mode::FiniteDifference;
  std::optional<Matrix> b0_explicit;
  double tol_residual = 1e-10;
  std::size_t max_outer = 200;
  std::size_t condg_max_iter = 0;  // 0 = per-theta default
  double broyden_skip_threshold = 1e-14;

  double theta_at(std::size_t k) const {
    if (theta_sequence.empty()) return theta;
    return k < theta_sequence.size() ? theta_sequence[k] : theta_sequence.back();
  }
};

/// Per-iteration proof obligations and bookkeeping.
struct IterationRecord {
  std::size_t k = 0;
  Vector x;  // iterate the step started from
  Vector y;  // subproblem solution (== x on the terminal record)
  double B_frobenius = 0.0;
  double dd_operator_norm = 0.0;
  double residual_before = 0.0;
  double theta_used = 0.0;
  std::size_t condg_iterations = 0;
  bool took_projection = false;
  double secant_gap = 0.0;
  double step_norm = 0.0;
  bool update_applied = false;
  bool terminal = false;
  double z_norm = 0.0;
  Matrix B_before;
  Matrix B_after;
};

enum class SolveStatus { Converged, MaxIterations, SubproblemFailure, ProjectionFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::MaxIterations: return "MaxIterations";
    case SolveStatus::SubproblemFailure: return "SubproblemFailure";
    case SolveStatus::ProjectionFailure: return "ProjectionFailure";
  }
  return "Unknown";
}

struct SolveOutcome {
  SolveStatus status = SolveStatus::MaxIterations;
  Vector final_point;
  std::vector<IterationRecord> trace;
  std::string failure_detail;
};

/// Rank-one secant update B' = B + (z - B s) s^T / ||s||^2. The update maps
/// s to z and leaves the orthogonal complement of s untouched.
inline Matrix broyden_update(const Matrix& B, const Vector& s, const Vector& z,
                             double skip_threshold = 1e-14) {
  const double sn2 = dot(s, s);
  if (std::sqrt(sn2) <= skip_threshold)
    throw ZeroStep("broyden_update: step too small, caller must skip the update");
  const Vector correction = z - B * s;
  return B + (1.0 / sn2) * outer(correction, s);
}

inline Matrix init_b0(B0Mode mode, const ProblemSpec& problem, const Vector& x0,
                      const std::optional<Matrix>& explicit_b0 = std::nullopt) {
  switch (mode) {
    case B0Mode::Identity:
      return Matrix::identity(problem.dimension);
    case B0Mode::FiniteDifference:
      return fd_jacobian(problem.f, x0);
    case B0Mode::Analytic:
      if (!problem.jacobian_f) throw MissingJacobian("init_b0: no analytic Jacobian supplied");
      return (*problem.jacobian_f)(x0);
    case B0Mode::Explicit:
      if (!explicit_b0) throw MissingJacobian("init_b0: no explicit operator supplied");
      if (explicit_b0->rows() != problem.dimension || explicit_b0->cols() != problem.dimension)
        throw DimensionMismatch("init_b0: explicit operator has wrong shape");
      return *explicit_b0;
  }
  throw Error("init_b0: unreachable");
}

struct SolverState {
  std::size_t k = 0;
  Vector x_prev;
  Vector x;
  Matrix B;
};

namespace detail {

inline void validate_problem(const ProblemSpec& p) {
  if (p.dimension == 0) throw InvalidProblem("problem: dimension must be positive");
  if (!p.f || !p.g) throw InvalidProblem("problem: f and g must be set");
  if (p.set.dim() != p.dimension) throw DimensionMismatch("problem: set dimension mismatch");
  if (p.term.kind() == SetValuedTerm::Kind::NormalConeBox &&
      p.term.lower().size() != p.dimension)
    throw DimensionMismatch("problem: term dimension mismatch");
  if (p.term.kind() == SetValuedTerm::Kind::ProductCone && p.term.cone_size() > p.dimension)
    throw InvalidProblem("problem: cone size exceeds the dimension");
  if (p.known_solution) {
    const Vector& xs = *p.known_solution;
    if (xs.size() != p.dimension)
      throw DimensionMismatch("problem: known_solution dimension mismatch");
    if (!contains(p.set, xs, 1e-10))
      throw InvalidProblem("problem: known_solution is infeasible");
    if (!(residual(p.term, xs, p.f(xs) + p.g(xs)) <= 1e-8))
      throw InvalidProblem("problem: known_solution does not solve the inclusion");
  }
}

inline void validate_config(const SolverConfig& c) {
  auto check = [](double t) {
    if (!(t >= 0.0) || !(t < 0.5))
      throw InvalidProblem("config: every theta must lie in [0, 0.5)");
  };
  check(c.theta);
  for (double t : c.theta_sequence) check(t);
  if (c.max_outer == 0) throw InvalidProblem("config: max_outer must be positive");
}

}  // namespace detail

struct StepResult {
  bool converged_at_entry = false;
  IterationRecord record;
};

/// One outer iteration: residual test, divided-difference assembly, subproblem
/// solve, Broyden update, and feasibility restoration when the subproblem
/// solution leaves C. The operator update always uses the unprojected y.
///
/// Subproblem errors propagate (SubproblemSingular/Infeasible/NoConvergence,
/// MaxInnerIterations); solve() converts them into outcome statuses.
inline StepResult step(const ProblemSpec& problem, const SolverConfig& config,
                       SolverState& state) {
  const double theta_k = config.theta_at(state.k);

  const Vector fx = problem.f(state.x);
  const Vector gx = problem.g(state.x);
  if (!all_finite(fx) || !all_finite(gx))
    throw NonFiniteEvaluation("step: f or g returned NaN/Inf at the current iterate");
  const Vector v = fx + gx;
  const double res = residual(problem.term, state.x, v);

  StepResult out;
  IterationRecord& rec = out.record;
  rec.k = state.k;
  rec.x = state.x;
  rec.residual_before = res;
  rec.theta_used = theta_k;
  rec.B_frobenius = state.B.frobenius_norm();
  rec.B_before = state.B;

  if (res <= config.tol_residual) {
    out.converged_at_entry = true;
    rec.y = state.x;
    rec.B_after = state.B;
    rec.terminal = true;
    return out;
  }

  const DividedDifference dd = first_order_dd(problem.g, state.x_prev, state.x);
  rec.dd_operator_norm = operator_norm(dd.op);
  const Matrix A = state.B + dd.op;

  const InclusionSolution sub = solve_linearized_inclusion(problem.term, v, A, state.x);
  const Vector& y = sub.point;
  rec.y = y;

  const Vector s = y - state.x;
  const Vector z = problem.f(y) - fx;
  rec.step_norm = norm(s);
  rec.z_norm = norm(z);

  Matrix B_next = state.B;
  if (rec.step_norm > config.broyden_skip_threshold) {
    B_next = broyden_update(state.B, s, z, config.broyden_skip_threshold);
    rec.update_applied = true;
    rec.secant_gap = norm(B_next * s - z);
  }
  rec.B_after = B_next;

  Vector x_next = y;
  if (!contains(problem.set, y, 1e-10)) {
    const ProjectionCertificate cert =
        condg_project(problem.set, y, state.x, state.x, theta_k, config.condg_max_iter);
    x_next = cert.point;
    rec.took_projection = true;
    rec.condg_iterations = cert.inner_iterations;
  }

  state.x_prev = state.x;
  state.x = std::move(x_next);
  state.B = std::move(B_next);
  ++state.k;
  return out;
}

/// Runs the outer iteration from the two starting points until convergence,
/// iteration exhaustion, or a subproblem/projection failure.
inline SolveOutcome solve(const ProblemSpec& problem, const SolverConfig& config,
                          const Vector& x_minus1, const Vector& x0) {
  detail::validate_problem(problem);
  detail::validate_config(config);
  if (x_minus1.size() != problem.dimension || x0.size() != problem.dimension)
    throw DimensionMismatch("solve: starting point dimension mismatch");
  if (!contains(problem.set, x_minus1, 1e-10) || !contains(problem.set, x0, 1e-10))
    throw InfeasibleStart("solve: starting points must lie in C");

  SolverState state;
  state.x_prev = x_minus1;
  state.x = x0;
  state.B = init_b0(config.b0_mode, problem, x0, config.b0_explicit);

  SolveOutcome outcome;
  while (state.k < config.max_outer) {
    StepResult sr;
    try {
      sr = step(problem, config, state);
    } catch (const MaxInnerIterations& e) {
      outcome.status = SolveStatus::ProjectionFailure;
      outcome.final_point = state.x;
      outcome.failure_detail = e.what();
      return outcome;
    } catch (const SubproblemSingular& e) {
      outcome.status = SolveStatus::SubproblemFailure;
      outcome.final_point = state.x;
      outcome.failure_detail = e.what();
      return outcome;
    } catch (const SubproblemInfeasible& e) {
      outcome.status = SolveStatus::SubproblemFailure;
      outcome.final_point = state.x;
      outcome.failure_detail = e.what();
      return outcome;
    } catch (const SubproblemNoConvergence& e) {
      outcome.status = SolveStatus::SubproblemFailure;
      outcome.final_point = state.x;
      outcome.failure_detail = e.what();
      return outcome;
    }
    outcome.trace.push_back(std::move(sr.record));
    if (sr.converged_at_entry) {
      outcome.status = SolveStatus::Converged;
      outcome.final_point = state.x;
      return outcome;
    }
  }
  outcome.status = SolveStatus::MaxIterations;
  outcome.final_point = state.x;
  return outcome;
}

namespace detail {

/// Error ratios ||x_{k+1} - x*|| / ||x_k - x*|| over consecutive trace
/// entries whose denominator exceeds 1e-13. No length guard.
inline std::vector<double> tail_error_ratios(const std::vector<IterationRecord>& trace,
                                             const Vector& x_star) {
  std::vector<double> ratios;
  for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
    const double e0 = norm(trace[i].x - x_star);
    const double e1 = norm(trace[i + 1].x - x_star);
    if (e0 > 1e-13) ratios.push_back(e1 / e0);
  }
  return ratios;
}

}  // namespace detail

/// Empirical q-linear rate diagnostics. Requires at least three iterates
/// farther than 1e-13 from the reference solution.
inline std::vector<double> q_linear_rate(const std::vector<IterationRecord>& trace,
                                         const Vector& x_star) {
  std::size_t qualifying = 0;
  for (const auto& rec : trace)
    if (norm(rec.x - x_star) > 1e-13) ++qualifying;
  if (qualifying < 3)
    throw InsufficientTrace("q_linear_rate: needs >= 3 iterates away from the solution");
  return detail::tail_error_ratios(trace, x_star);
}

struct DeteriorationRow {
  std::size_t k = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  bool holds = false;
};

/// Checks the bounded-deterioration inequality
/// ||B_{k+1} - f'(x*)|| <= ||B_k - f'(x*)|| + (L/2)(||y_k - x*|| + ||x_k - x*||)
/// at every non-terminal iteration (skipped updates hold trivially).
inline std::vector<DeteriorationRow> bounded_deterioration_check(
    const std::vector<IterationRecord>& trace, const ProblemSpec& problem) {
  if (!problem.known_solution || !problem.jacobian_f || !problem.lipschitz_L)
    throw MissingGroundTruth(
        "bounded_deterioration_check: needs known_solution, jacobian_f, and lipschitz_L");
  const Vector& xs = *problem.known_solution;
  const Matrix J_star = (*problem.jacobian_f)(xs);
  const double L = *problem.lipschitz_L;

  std::vector<DeteriorationRow> rows;
  for (const auto& rec : trace) {
    if (rec.terminal) continue;
    DeteriorationRow row;
    row.k = rec.k;
    row.lhs = operator_norm(rec.B_after - J_star);
    row.rhs = operator_norm(rec.B_before - J_star) +
              (L / 2.0) * (norm(rec.y - xs) + norm(rec.x - xs));
    row.holds = row.lhs <= row.rhs + 1e-10;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace gensec
