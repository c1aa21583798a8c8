#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "gensec/errors.hpp"
#include "gensec/numerics.hpp"

namespace gensec {

/// First-order divided-difference operator of a vector-valued map g at a
/// pair of points: a matrix D with D (right - left) = g(right) - g(left).
struct DividedDifference {
  Matrix op;
  Vector left;
  Vector right;
  /// Marks coordinates where |right_j - left_j| fell below threshold and the
  /// column was replaced by a central finite-difference partial derivative.
  std::vector<bool> coincident;
};

namespace detail {

inline Vector eval_checked(const VectorFn& g, const Vector& p, const char* who) {
  Vector v = g(p);
  if (!all_finite(v)) throw NonFiniteEvaluation(who);
  return v;
}

}  // namespace detail

/// Coordinatewise mixed-point construction of [x, y; g].
///
/// Column j is the quotient of g evaluated at consecutive mixed points
/// (y_1..y_j, x_{j+1}..x_n) and (y_1..y_{j-1}, x_j..x_n); the telescoping sum
/// of columns reproduces g(y) - g(x) exactly. Columns with y_j ~= x_j fall
/// back to a central finite-difference partial derivative of g.
inline DividedDifference first_order_dd(const VectorFn& g, const Vector& x, const Vector& y) {
  if (x.size() != y.size()) throw DimensionMismatch("first_order_dd: point sizes differ");
  const std::size_t n = x.size();
  const char* who = "first_order_dd: g returned NaN/Inf";

  DividedDifference dd;
  dd.left = x;
  dd.right = y;
  dd.coincident.assign(n, false);

  Vector p = x;
  Vector prev = detail::eval_checked(g, p, who);
  const std::size_t m = prev.size();
  dd.op = Matrix(m, n);

  for (std::size_t j = 0; j < n; ++j) {
    const double gap = y[j] - x[j];
    if (std::abs(gap) < 1e-12 * (1.0 + std::abs(x[j]))) {
      dd.coincident[j] = true;
      const double h = 1e-6 * (1.0 + std::abs(x[j]));
      Vector pp = p, pm = p;
      pp[j] += h;
      pm[j] -= h;
      const Vector fp = detail::eval_checked(g, pp, who);
      const Vector fm = detail::eval_checked(g, pm, who);
      for (std::size_t i = 0; i < m; ++i) dd.op(i, j) = (fp[i] - fm[i]) / (2.0 * h);
      p[j] = y[j];
      prev = detail::eval_checked(g, p, who);
    } else {
      p[j] = y[j];
      const Vector cur = detail::eval_checked(g, p, who);
      for (std::size_t i = 0; i < m; ++i) dd.op(i, j) = (cur[i] - prev[i]) / gap;
      prev = cur;
    }
  }
  return dd;
}

/// || D (y - x) - (g(y) - g(x)) ||, the defect in the defining relation.
inline double secant_residual(const DividedDifference& dd, const VectorFn& g) {
  const Vector lhs = dd.op * (dd.right - dd.left);
  const Vector rhs = g(dd.right) - g(dd.left);
  return norm(lhs - rhs);
}

/// Empirical lower estimate of the second-order divided-difference magnitude,
/// || [y,z;g] - [x,y;g] || / ||z - x||.
inline double second_order_dd_bound(const VectorFn& g, const Vector& x, const Vector& y,
                                    const Vector& z) {
  const double span = norm(z - x);
  if (span <= 1e-12) throw DegeneratePoints("second_order_dd_bound: ||z - x|| too small");
  const Matrix diff = first_order_dd(g, y, z).op - first_order_dd(g, x, y).op;
  return operator_norm(diff) / span;
}

}  // namespace gensec
