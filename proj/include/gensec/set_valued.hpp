#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "gensec/errors.hpp"
#include "gensec/numerics.hpp"

namespace gensec {

enum class CoordStatus { Free, AtLower, AtUpper, ConeActive, ConeInactive, Equality };

/// Solution of a partially linearized inclusion 0 in q + A(y - x) + F(y).
struct InclusionSolution {
  Vector point;
  double residual = 0.0;
  std::vector<CoordStatus> active_set;
};

/// The set-valued term F of the generalized equation.
///
/// Variants: the zero map, the normal cone of a box (bounds may be infinite),
/// and the constant cone R^s_- x {0}^{n-s}. A custom variant carries
/// user-supplied residual and subproblem callbacks.
class SetValuedTerm {
 public:
  enum class Kind { Zero, NormalConeBox, ProductCone, Custom };

  using CustomResidualFn = std::function<double(const Vector& x, const Vector& v)>;
  using CustomSolveFn =
      std::function<InclusionSolution(const Vector& q, const Matrix& A, const Vector& x)>;

  static SetValuedTerm zero() {
    SetValuedTerm t;
    t.kind_ = Kind::Zero;
    return t;
  }

  static SetValuedTerm normal_cone_box(Vector lower, Vector upper) {
    if (lower.size() != upper.size())
      throw DimensionMismatch("normal_cone_box: bound sizes differ");
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (!(lower[i] <= upper[i])) throw InvalidProblem("normal_cone_box: lower > upper");
    SetValuedTerm t;
    t.kind_ = Kind::NormalConeBox;
    t.lower_ = std::move(lower);
    t.upper_ = std::move(upper);
    return t;
  }

  static SetValuedTerm product_cone(std::size_t s) {
    SetValuedTerm t;
    t.kind_ = Kind::ProductCone;
    t.s_ = s;
    return t;
  }

  static SetValuedTerm custom(CustomResidualFn residual, CustomSolveFn solve) {
    if (!residual || !solve) throw InvalidProblem("custom term: callbacks must be set");
    SetValuedTerm t;
    t.kind_ = Kind::Custom;
    t.custom_residual_ = std::move(residual);
    t.custom_solve_ = std::move(solve);
    return t;
  }

  Kind kind() const { return kind_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  std::size_t cone_size() const { return s_; }
  const CustomResidualFn& custom_residual() const { return custom_residual_; }
  const CustomSolveFn& custom_solve() const { return custom_solve_; }

 private:
  Kind kind_ = Kind::Zero;
  Vector lower_, upper_;
  std::size_t s_ = 0;
  CustomResidualFn custom_residual_;
  CustomSolveFn custom_solve_;
};

namespace detail {

inline Vector clamp_box(const Vector& y, const Vector& lower, const Vector& upper) {
  Vector out = y;
  for (std::size_t j = 0; j < y.size(); ++j)
    out[j] = std::clamp(out[j], lower[j], upper[j]);
  return out;
}

}  // namespace detail

/// Distance d(0, v + F(x)), the unconstrained-optimality surrogate. Returns
/// +infinity when x lies outside dom F.
inline double residual(const SetValuedTerm& term, const Vector& x, const Vector& v) {
  if (x.size() != v.size()) throw DimensionMismatch("residual: sizes differ");
  switch (term.kind()) {
    case SetValuedTerm::Kind::Zero:
      return norm(v);
    case SetValuedTerm::Kind::NormalConeBox: {
      const Vector& l = term.lower();
      const Vector& u = term.upper();
      if (x.size() != l.size()) throw DimensionMismatch("residual: box dimensions differ");
      for (std::size_t j = 0; j < x.size(); ++j) {
        const double slack = 1e-12 * (1.0 + std::abs(x[j]));
        if (x[j] < l[j] - slack || x[j] > u[j] + slack)
          return std::numeric_limits<double>::infinity();
      }
      return norm(x - detail::clamp_box(x - v, l, u));
    }
    case SetValuedTerm::Kind::ProductCone: {
      const std::size_t s = term.cone_size();
      if (s > x.size()) throw DimensionMismatch("residual: cone larger than dimension");
      double acc = 0.0;
      for (std::size_t i = 0; i < x.size(); ++i) {
        const double gap = i < s ? std::max(0.0, -v[i]) : v[i];
        acc += gap * gap;
      }
      return std::sqrt(acc);
    }
    case SetValuedTerm::Kind::Custom:
      return term.custom_residual()(x, v);
  }
  throw Error("residual: unreachable");
}

namespace detail {

inline double inclusion_tol(const Vector& q) { return 1e-9 * (1.0 + norm(q)); }

inline bool less_change(const Vector& a, const Vector& b, const Vector& x) {
  const double na = norm(a - x);
  const double nb = norm(b - x);
  if (na != nb) return na < nb;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return a[i] < b[i];
  return false;
}

/// All box-pattern solutions of 0 in q + A(y-x) + N_[l,u](y), 3^n enumeration.
inline std::vector<InclusionSolution> enumerate_box(const SetValuedTerm& term, const Vector& q,
                                                    const Matrix& A, const Vector& x) {
  const std::size_t n = x.size();
  const Vector& l = term.lower();
  const Vector& u = term.upper();
  const double ctol = inclusion_tol(q);
  std::vector<InclusionSolution> found;

  std::vector<int> pat(n, 0);  // 0 free, 1 at lower, 2 at upper
  std::size_t total = 1;
  for (std::size_t j = 0; j < n; ++j) total *= 3;

  for (std::size_t code = 0; code < total; ++code) {
    std::size_t c = code;
    bool possible = true;
    for (std::size_t j = 0; j < n; ++j) {
      pat[j] = static_cast<int>(c % 3);
      c /= 3;
      if (pat[j] == 1 && !std::isfinite(l[j])) possible = false;
      if (pat[j] == 2 && !std::isfinite(u[j])) possible = false;
    }
    if (!possible) continue;

    std::vector<std::size_t> free_idx;
    Vector d(n);
    for (std::size_t j = 0; j < n; ++j) {
      if (pat[j] == 0)
        free_idx.push_back(j);
      else
        d[j] = (pat[j] == 1 ? l[j] : u[j]) - x[j];
    }

    if (!free_idx.empty()) {
      Matrix Aff(free_idx.size(), free_idx.size());
      Vector rhs(free_idx.size());
      for (std::size_t r = 0; r < free_idx.size(); ++r) {
        const std::size_t i = free_idx[r];
        double acc = -q[i];
        for (std::size_t j = 0; j < n; ++j)
          if (pat[j] != 0) acc -= A(i, j) * d[j];
        rhs[r] = acc;
        for (std::size_t cidx = 0; cidx < free_idx.size(); ++cidx)
          Aff(r, cidx) = A(i, free_idx[cidx]);
      }
      Vector df;
      try {
        df = solve_linear(Aff, rhs);
      } catch (const SingularOperator&) {
        continue;
      }
      for (std::size_t r = 0; r < free_idx.size(); ++r) d[free_idx[r]] = df[r];
    }

    const Vector y = x + d;
    const Vector v = q + A * d;
    bool ok = true;
    for (std::size_t j = 0; j < n && ok; ++j) {
      switch (pat[j]) {
        case 0:
          ok = y[j] >= l[j] - ctol && y[j] <= u[j] + ctol;
          break;
        case 1:
          ok = v[j] >= -ctol;
          break;
        case 2:
          ok = v[j] <= ctol;
          break;
      }
    }
    if (!ok) continue;
    const double res = residual(term, detail::clamp_box(y, l, u), q + A * (detail::clamp_box(y, l, u) - x));
    if (!(res <= ctol)) continue;

    InclusionSolution sol;
    sol.point = detail::clamp_box(y, l, u);  // free coords sit inside already
    sol.residual = res;
    sol.active_set.resize(n);
    for (std::size_t j = 0; j < n; ++j)
      sol.active_set[j] = pat[j] == 0   ? CoordStatus::Free
                          : pat[j] == 1 ? CoordStatus::AtLower
                                        : CoordStatus::AtUpper;
    bool duplicate = false;
    for (const auto& other : found)
      if (norm(other.point - sol.point) <= 1e-9) {
        duplicate = true;
        break;
      }
    if (!duplicate) found.push_back(std::move(sol));
  }

  std::stable_sort(found.begin(), found.end(),
                   [&](const InclusionSolution& a, const InclusionSolution& b) {
                     return less_change(a.point, b.point, x);
                   });
  return found;
}

/// Per-pattern minimum-norm representatives for the constant cone term:
/// actives and the trailing equalities pin rows of A(y-x) = -q, the step is
/// the least-norm solution of that underdetermined system.
inline std::vector<InclusionSolution> enumerate_cone(const SetValuedTerm& term, const Vector& q,
                                                     const Matrix& A, const Vector& x,
                                                     std::size_t* singular_count = nullptr) {
  const std::size_t n = x.size();
  const std::size_t s = term.cone_size();
  const double ctol = inclusion_tol(q);
  std::vector<InclusionSolution> found;
  if (singular_count) *singular_count = 0;

  for (std::size_t mask = 0; mask < (std::size_t{1} << s); ++mask) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < s; ++i)
      if (mask & (std::size_t{1} << i)) rows.push_back(i);
    for (std::size_t i = s; i < n; ++i) rows.push_back(i);

    Vector d(n);
    if (!rows.empty()) {
      const std::size_t k = rows.size();
      Matrix G(k, k);
      Vector rhs(k);
      for (std::size_t r = 0; r < k; ++r) {
        rhs[r] = -q[rows[r]];
        for (std::size_t c = 0; c < k; ++c) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += A(rows[r], j) * A(rows[c], j);
          G(r, c) = acc;
        }
      }
      Vector mu;
      try {
        mu = solve_linear(G, rhs);
      } catch (const SingularOperator&) {
        if (singular_count) ++*singular_count;
        continue;
      }
      for (std::size_t j = 0; j < n; ++j) {
        double acc = 0.0;
        for (std::size_t r = 0; r < k; ++r) acc += A(rows[r], j) * mu[r];
        d[j] = acc;
      }
    }

    const Vector y = x + d;
    const Vector v = q + A * d;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      if (i < s)
        ok = v[i] >= -ctol;
      else
        ok = std::abs(v[i]) <= ctol;
    }
    if (!ok) continue;
    const double res = residual(term, y, v);
    if (!(res <= ctol)) continue;

    InclusionSolution sol;
    sol.point = y;
    sol.residual = res;
    sol.active_set.resize(n);
    for (std::size_t i = 0; i < n; ++i)
      sol.active_set[i] = i >= s ? CoordStatus::Equality
                          : (mask & (std::size_t{1} << i)) ? CoordStatus::ConeActive
                                                           : CoordStatus::ConeInactive;
    bool duplicate = false;
    for (const auto& other : found)
      if (norm(other.point - sol.point) <= 1e-9) {
        duplicate = true;
        break;
      }
    if (!duplicate) found.push_back(std::move(sol));
  }

  std::stable_sort(found.begin(), found.end(),
                   [&](const InclusionSolution& a, const InclusionSolution& b) {
                     return less_change(a.point, b.point, x);
                   });
  return found;
}

}  // namespace detail

/// Exhaustive active-set enumeration, used as the test oracle for the
/// production subproblem solver. Solutions come back sorted by ||y - x||.
inline std::vector<InclusionSolution> brute_force_inclusion(const SetValuedTerm& term,
                                                            const Vector& q, const Matrix& A,
                                                            const Vector& x) {
  const std::size_t n = x.size();
  if (A.rows() != n || A.cols() != n || q.size() != n)
    throw DimensionMismatch("brute_force_inclusion: shape mismatch");
  if (n > 12) throw DimensionTooLarge("brute_force_inclusion: needs n <= 12");

  switch (term.kind()) {
    case SetValuedTerm::Kind::Zero: {
      InclusionSolution sol;
      sol.point = x + solve_linear(A, -q);
      sol.residual = norm(q + A * (sol.point - x));
      sol.active_set.assign(n, CoordStatus::Free);
      return {sol};
    }
    case SetValuedTerm::Kind::NormalConeBox:
      return detail::enumerate_box(term, q, A, x);
    case SetValuedTerm::Kind::ProductCone:
      return detail::enumerate_cone(term, q, A, x);
    case SetValuedTerm::Kind::Custom:
      throw InvalidProblem("brute_force_inclusion: custom terms have no enumeration");
  }
  throw Error("brute_force_inclusion: unreachable");
}

namespace detail {

/// Semismooth Newton on the natural residual r(y) = y - clamp(y - v(y)).
/// Generalized-derivative rows follow the active pattern: free rows take the
/// corresponding row of A, clamped rows the unit row.
inline InclusionSolution solve_box_inclusion(const SetValuedTerm& term, const Vector& q,
                                             const Matrix& A, const Vector& x) {
  const std::size_t n = x.size();
  const Vector& l = term.lower();
  const Vector& u = term.upper();
  const double tol = inclusion_tol(q);

  auto fallback = [&](const char* why) -> InclusionSolution {
    if (n <= 12) {
      auto all = enumerate_box(term, q, A, x);
      if (!all.empty()) return all.front();
      throw SubproblemInfeasible("solve_linearized_inclusion: enumeration found no solution");
    }
    throw SubproblemNoConvergence(why);
  };

  Vector y = clamp_box(x, l, u);
  std::set<std::string> seen;
  for (int it = 0; it < 200; ++it) {
    const Vector v = q + A * (y - x);
    const Vector w = y - v;
    Vector r(n);
    std::string signature(n, 'f');
    for (std::size_t j = 0; j < n; ++j) {
      if (w[j] < l[j]) {
        r[j] = y[j] - l[j];
        signature[j] = 'l';
      } else if (w[j] > u[j]) {
        r[j] = y[j] - u[j];
        signature[j] = 'u';
      } else {
        r[j] = v[j];
      }
    }
    if (norm(r) <= tol) {
      InclusionSolution sol;
      sol.point = clamp_box(y, l, u);
      sol.residual = residual(term, sol.point, q + A * (sol.point - x));
      if (!(sol.residual <= tol)) return fallback("solve_linearized_inclusion: residual stalled");
      sol.active_set.resize(n);
      for (std::size_t j = 0; j < n; ++j)
        sol.active_set[j] = signature[j] == 'f'   ? CoordStatus::Free
                            : signature[j] == 'l' ? CoordStatus::AtLower
                                                  : CoordStatus::AtUpper;
      return sol;
    }
    if (!seen.insert(signature).second)
      return fallback("solve_linearized_inclusion: active set cycled");

    Matrix J(n, n);
    for (std::size_t j = 0; j < n; ++j) {
      if (signature[j] == 'f')
        for (std::size_t c = 0; c < n; ++c) J(j, c) = A(j, c);
      else
        J(j, j) = 1.0;
    }
    Vector step;
    try {
      step = solve_linear(J, -r);
    } catch (const SingularOperator&) {
      if (n > 12)
        throw SubproblemSingular("solve_linearized_inclusion: Newton system singular");
      return fallback("solve_linearized_inclusion: Newton system singular");
    }
    y += step;
  }
  return fallback("solve_linearized_inclusion: semismooth Newton did not converge");
}

}  // namespace detail

/// Solves the partially linearized inclusion 0 in q + A(y - x) + F(y),
/// selecting the least-change solution where several exist.
inline InclusionSolution solve_linearized_inclusion(const SetValuedTerm& term, const Vector& q,
                                                    const Matrix& A, const Vector& x) {
  const std::size_t n = x.size();
  if (A.rows() != n || A.cols() != n || q.size() != n)
    throw DimensionMismatch("solve_linearized_inclusion: shape mismatch");

  switch (term.kind()) {
    case SetValuedTerm::Kind::Zero: {
      InclusionSolution sol;
      try {
        sol.point = x + solve_linear(A, -q);
      } catch (const SingularOperator& e) {
        throw SubproblemSingular(e.what());
      }
      sol.residual = norm(q + A * (sol.point - x));
      sol.active_set.assign(n, CoordStatus::Free);
      return sol;
    }
    case SetValuedTerm::Kind::NormalConeBox:
      return detail::solve_box_inclusion(term, q, A, x);
    case SetValuedTerm::Kind::ProductCone: {
      if (n > 20) throw DimensionTooLarge("solve_linearized_inclusion: cone path needs n <= 20");
      std::size_t singular = 0;
      auto all = detail::enumerate_cone(term, q, A, x, &singular);
      if (all.empty()) {
        const std::size_t patterns = std::size_t{1} << term.cone_size();
        if (singular == patterns)
          throw SubproblemSingular("solve_linearized_inclusion: every pattern system singular");
        throw SubproblemInfeasible("solve_linearized_inclusion: no feasible active pattern");
      }
      return all.front();
    }
    case SetValuedTerm::Kind::Custom:
      return term.custom_solve()(q, A, x);
  }
  throw Error("solve_linearized_inclusion: unreachable");
}

}  // namespace gensec
