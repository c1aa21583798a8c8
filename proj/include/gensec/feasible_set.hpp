#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gensec/errors.hpp"
#include "gensec/numerics.hpp"

namespace gensec {

/// Closed convex constraint set exposed through a linear-minimization oracle.
class FeasibleSet {
 public:
  enum class Kind { WholeSpace, Box, Ball, Simplex, Polytope };

  static FeasibleSet whole_space(std::size_t dim) {
    FeasibleSet s;
    s.kind_ = Kind::WholeSpace;
    s.dim_ = dim;
    return s;
  }

  static FeasibleSet box(Vector lower, Vector upper) {
    if (lower.size() != upper.size()) throw DimensionMismatch("box: bound sizes differ");
    for (std::size_t i = 0; i < lower.size(); ++i)
      if (!(lower[i] <= upper[i])) throw InvalidProblem("box: lower > upper");
    FeasibleSet s;
    s.kind_ = Kind::Box;
    s.dim_ = lower.size();
    s.lower_ = std::move(lower);
    s.upper_ = std::move(upper);
    return s;
  }

  static FeasibleSet ball(Vector center, double radius) {
    if (!(radius > 0.0)) throw InvalidProblem("ball: radius must be positive");
    FeasibleSet s;
    s.kind_ = Kind::Ball;
    s.dim_ = center.size();
    s.center_ = std::move(center);
    s.radius_ = radius;
    return s;
  }

  static FeasibleSet simplex(double scale, std::size_t dim) {
    if (!(scale > 0.0)) throw InvalidProblem("simplex: scale must be positive");
    if (dim == 0) throw InvalidProblem("simplex: dimension must be positive");
    FeasibleSet s;
    s.kind_ = Kind::Simplex;
    s.dim_ = dim;
    s.scale_ = scale;
    return s;
  }

  static FeasibleSet polytope(std::vector<Vector> vertices) {
    if (vertices.empty()) throw InvalidProblem("polytope: needs at least one vertex");
    const std::size_t dim = vertices.front().size();
    for (const Vector& v : vertices)
      if (v.size() != dim) throw DimensionMismatch("polytope: vertex dimensions differ");
    FeasibleSet s;
    s.kind_ = Kind::Polytope;
    s.dim_ = dim;
    s.vertices_ = std::move(vertices);
    return s;
  }

  Kind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const Vector& center() const { return center_; }
  double radius() const { return radius_; }
  double scale() const { return scale_; }
  const std::vector<Vector>& vertices() const { return vertices_; }

 private:
  Kind kind_ = Kind::WholeSpace;
  std::size_t dim_ = 0;
  Vector lower_, upper_, center_;
  double radius_ = 0.0;
  double scale_ = 0.0;
  std::vector<Vector> vertices_;
};

/// Certificate that a point satisfies the inexact-projection inequality
/// sup_{z in C} <v - w, z - w> <= theta ||v - u||^2 (up to 1e-12 slack).
struct ProjectionCertificate {
  Vector point;
  double sup_inner = 0.0;
  double threshold = 0.0;
  std::size_t inner_iterations = 0;
  bool valid = false;
};

/// Minimizer of <d, z> over the set. Ties break toward the smallest
/// index / lower bound so traces are reproducible.
inline Vector lmo(const FeasibleSet& set, const Vector& d) {
  if (d.size() != set.dim()) throw DimensionMismatch("lmo: direction size mismatch");
  switch (set.kind()) {
    case FeasibleSet::Kind::WholeSpace:
      throw UnboundedDomain("lmo: linear functional unbounded on the whole space");
    case FeasibleSet::Kind::Box: {
      Vector z(set.dim());
      for (std::size_t j = 0; j < set.dim(); ++j) {
        if (d[j] == 0.0) {
          // Any feasible value minimizes; prefer the lower bound, but keep
          // the pick finite on half-open boxes.
          z[j] = std::isfinite(set.lower()[j]) ? set.lower()[j]
                 : std::isfinite(set.upper()[j]) ? set.upper()[j]
                                                 : 0.0;
          continue;
        }
        z[j] = d[j] < 0.0 ? set.upper()[j] : set.lower()[j];
        if (!std::isfinite(z[j]))
          throw UnboundedDomain("lmo: box unbounded along the requested direction");
      }
      return z;
    }
    case FeasibleSet::Kind::Ball: {
      const double dn = norm(d);
      if (dn < 1e-14) return set.center();
      return set.center() - (set.radius() / dn) * d;
    }
    case FeasibleSet::Kind::Simplex: {
      std::size_t best = 0;
      for (std::size_t j = 1; j < set.dim(); ++j)
        if (d[j] < d[best]) best = j;
      Vector z(set.dim());
      z[best] = set.scale();
      return z;
    }
    case FeasibleSet::Kind::Polytope: {
      std::size_t best = 0;
      double best_val = dot(d, set.vertices()[0]);
      for (std::size_t k = 1; k < set.vertices().size(); ++k) {
        const double val = dot(d, set.vertices()[k]);
        if (val < best_val) {
          best = k;
          best_val = val;
        }
      }
      return set.vertices()[best];
    }
  }
  throw Error("lmo: unreachable");
}

namespace detail {

// Membership for a vertex-represented polytope: solve the least-squares over
// convex combinations, min ||sum_k lambda_k v_k - x||, lambda in the unit
// simplex, with the fully corrective conditional-gradient scheme (Wolfe's
// min-norm-point iteration). Each outer step adds the oracle vertex to an
// active set and minimizes exactly over its convex hull, so the residual
// reaches the floating-point floor in finitely many steps; accept when the
// final combination lands within tol of x.
inline bool polytope_contains(const FeasibleSet& set, const Vector& x, double tol) {
  const auto& verts = set.vertices();
  std::size_t start = 0;
  double best = norm(verts[0] - x);
  for (std::size_t k = 1; k < verts.size(); ++k) {
    const double cand = norm(verts[k] - x);
    if (cand < best) {
      best = cand;
      start = k;
    }
  }

  std::vector<std::size_t> active{start};
  std::vector<double> lambda{1.0};
  Vector w = verts[start];

  auto combination = [&]() {
    Vector c(x.size());
    for (std::size_t i = 0; i < active.size(); ++i) c += lambda[i] * verts[active[i]];
    return c;
  };

  for (int outer = 0; outer < 500; ++outer) {
    const Vector r = w - x;
    if (norm(r) <= tol) return true;

    std::size_t pick = 0;
    double pick_val = dot(r, verts[0]);
    for (std::size_t k = 1; k < verts.size(); ++k) {
      const double val = dot(r, verts[k]);
      if (val < pick_val) {
        pick = k;
        pick_val = val;
      }
    }
    const double gap = dot(r, w) - pick_val;
    if (gap <= 1e-14 * (1.0 + dot(r, r))) break;  // w already minimizes the distance

    bool present = false;
    for (const std::size_t idx : active)
      if (idx == pick) present = true;
    if (!present) {
      active.push_back(pick);
      lambda.push_back(0.0);
    }

    // Minor cycles: minimize over the affine hull of the active vertices and
    // clip back into the simplex, pruning vertices that drop out.
    for (int minor = 0; minor < 100; ++minor) {
      const std::size_t k = active.size();
      Matrix kkt(k + 1, k + 1);
      Vector rhs(k + 1);
      for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j < k; ++j) kkt(i, j) = dot(verts[active[i]], verts[active[j]]);
        kkt(i, k) = 1.0;
        kkt(k, i) = 1.0;
        rhs[i] = dot(verts[active[i]], x);
      }
      rhs[k] = 1.0;

      Vector mu;
      try {
        mu = solve_linear(kkt, rhs);
      } catch (const SingularOperator&) {
        // Affinely dependent active set: drop the lightest vertex and retry.
        if (k <= 1) break;
        std::size_t lightest = 0;
        for (std::size_t i = 1; i < k; ++i)
          if (lambda[i] < lambda[lightest]) lightest = i;
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(lightest));
        lambda.erase(lambda.begin() + static_cast<std::ptrdiff_t>(lightest));
        continue;
      }

      bool inside = true;
      for (std::size_t i = 0; i < k; ++i)
        if (mu[i] < -1e-12) inside = false;
      if (inside) {
        lambda.assign(mu.begin(), mu.begin() + static_cast<std::ptrdiff_t>(k));
        break;
      }

      double step_frac = 1.0;
      for (std::size_t i = 0; i < k; ++i)
        if (mu[i] < 1e-12 && lambda[i] - mu[i] > 0.0)
          step_frac = std::min(step_frac, lambda[i] / (lambda[i] - mu[i]));
      for (std::size_t i = 0; i < k; ++i) lambda[i] += step_frac * (mu[i] - lambda[i]);
      for (std::size_t i = active.size(); i-- > 0;) {
        if (lambda[i] <= 1e-14) {
          active.erase(active.begin() + static_cast<std::ptrdiff_t>(i));
          lambda.erase(lambda.begin() + static_cast<std::ptrdiff_t>(i));
        }
      }
      if (active.empty()) {
        active.push_back(pick);
        lambda.push_back(1.0);
        break;
      }
    }
    w = combination();
  }
  return norm(w - x) <= tol;
}

}  // namespace detail

/// Membership test with additive tolerance on each defining inequality.
inline bool contains(const FeasibleSet& set, const Vector& x, double tol) {
  if (x.size() != set.dim()) throw DimensionMismatch("contains: point size mismatch");
  if (tol < 0.0) throw InvalidProblem("contains: tolerance must be nonnegative");
  switch (set.kind()) {
    case FeasibleSet::Kind::WholeSpace:
      return true;
    case FeasibleSet::Kind::Box:
      for (std::size_t j = 0; j < set.dim(); ++j)
        if (x[j] < set.lower()[j] - tol || x[j] > set.upper()[j] + tol) return false;
      return true;
    case FeasibleSet::Kind::Ball:
      return norm(x - set.center()) <= set.radius() + tol;
    case FeasibleSet::Kind::Simplex: {
      double sum = 0.0;
      for (std::size_t j = 0; j < set.dim(); ++j) {
        if (x[j] < -tol) return false;
        sum += x[j];
      }
      return std::abs(sum - set.scale()) <= tol;
    }
    case FeasibleSet::Kind::Polytope:
      return detail::polytope_contains(set, x, tol);
  }
  throw Error("contains: unreachable");
}

/// Analytic Euclidean projection; only boxes and balls support it.
inline Vector exact_project(const FeasibleSet& set, const Vector& y) {
  if (y.size() != set.dim()) throw DimensionMismatch("exact_project: point size mismatch");
  switch (set.kind()) {
    case FeasibleSet::Kind::WholeSpace:
      return y;
    case FeasibleSet::Kind::Box: {
      Vector p = y;
      for (std::size_t j = 0; j < set.dim(); ++j)
        p[j] = std::clamp(p[j], set.lower()[j], set.upper()[j]);
      return p;
    }
    case FeasibleSet::Kind::Ball: {
      const Vector d = y - set.center();
      const double dn = norm(d);
      if (dn <= set.radius()) return y;
      return set.center() + (set.radius() / dn) * d;
    }
    case FeasibleSet::Kind::Simplex:
    case FeasibleSet::Kind::Polytope:
      throw NoAnalyticProjection("exact_project: set has no closed-form projection");
  }
  throw Error("exact_project: unreachable");
}

using CondGObserver = std::function<void(std::size_t, const Vector&)>;

/// Conditional-gradient computation of a feasible inexact projection of v,
/// stopping once sup_{z in C} <v - w, z - w> <= theta ||v - u||^2 (+1e-12).
///
/// w0 must be feasible. max_iter == 0 selects 10^4 steps for theta > 0 and
/// 10^5 for theta == 0. The observer, when set, sees every iterate.
inline ProjectionCertificate condg_project(const FeasibleSet& set, const Vector& v,
                                           const Vector& u, const Vector& w0, double theta,
                                           std::size_t max_iter = 0,
                                           const CondGObserver& observer = {}) {
  if (theta < 0.0) throw InvalidProblem("condg_project: theta must be nonnegative");
  if (!contains(set, w0, 1e-10)) throw InfeasibleStart("condg_project: w0 outside the set");
  if (max_iter == 0) max_iter = theta > 0.0 ? 10000 : 100000;

  ProjectionCertificate cert;
  cert.threshold = theta * dot(v - u, v - u);

  if (contains(set, v, 1e-12)) {
    cert.point = v;
    cert.sup_inner = 0.0;
    cert.inner_iterations = 0;
    cert.valid = true;
    return cert;
  }

  Vector w = w0;
  if (observer) observer(0, w);
  for (std::size_t ell = 0; ell < max_iter; ++ell) {
    const Vector z = lmo(set, w - v);
    const double s_star = dot(w - v, z - w);
    if (-s_star <= cert.threshold + 1e-12) {
      cert.point = w;
      cert.sup_inner = -s_star;
      cert.inner_iterations = ell;
      cert.valid = true;
      return cert;
    }
    const Vector dir = z - w;
    const double dn2 = dot(dir, dir);
    if (dn2 == 0.0) {
      // z == w forces s_star == 0, handled above; kept as a hard stop.
      cert.point = w;
      cert.sup_inner = -s_star;
      cert.inner_iterations = ell;
      cert.valid = -s_star <= cert.threshold + 1e-12;
      return cert;
    }
    const double alpha = std::min(1.0, -s_star / dn2);
    w += alpha * dir;
    if (observer) observer(ell + 1, w);
  }
  throw MaxInnerIterations("condg_project: stop test not reached within max_iter");
}

/// One-LMO check of the inexact-projection inequality for a candidate w.
inline ProjectionCertificate verify_inexact_projection(const FeasibleSet& set, const Vector& w,
                                                       const Vector& v, const Vector& u,
                                                       double theta) {
  ProjectionCertificate cert;
  cert.point = w;
  cert.threshold = theta * dot(v - u, v - u);
  const Vector g = v - w;
  if (set.kind() == FeasibleSet::Kind::WholeSpace) {
    if (norm(g) > 1e-14)
      throw UnboundedDomain("verify_inexact_projection: sup is infinite on the whole space");
    cert.sup_inner = 0.0;
    cert.valid = true;
    return cert;
  }
  const Vector z = lmo(set, -g);
  cert.sup_inner = dot(g, z - w);
  cert.valid = cert.sup_inner <= cert.threshold + 1e-12;
  return cert;
}

}  // namespace gensec
