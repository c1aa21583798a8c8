// Shared helpers for the test suites: deterministic random data, independent
// reference implementations used as oracles, and small numeric utilities.
#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "gensec/numerics.hpp"

namespace testutil {

using gensec::Matrix;
using gensec::Vector;

inline double urand(std::mt19937& gen, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(gen);
}

inline Vector random_vector(std::mt19937& gen, std::size_t n, double lo, double hi) {
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = urand(gen, lo, hi);
  return v;
}

inline Matrix random_matrix(std::mt19937& gen, std::size_t rows, std::size_t cols, double lo,
                            double hi) {
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = urand(gen, lo, hi);
  return m;
}

/// Random orthogonal matrix as a product of n(n-1)/2 Givens rotations.
inline Matrix random_rotation(std::mt19937& gen, std::size_t n) {
  Matrix Q = Matrix::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double a = urand(gen, 0.0, 2.0 * 3.14159265358979323846);
      const double c = std::cos(a), s = std::sin(a);
      for (std::size_t k = 0; k < n; ++k) {
        const double qi = Q(i, k), qj = Q(j, k);
        Q(i, k) = c * qi - s * qj;
        Q(j, k) = s * qi + c * qj;
      }
    }
  return Q;
}

/// Matrix with prescribed singular values, so conditioning is controlled
/// by construction.
inline Matrix matrix_with_spectrum(std::mt19937& gen, const std::vector<double>& sigma) {
  const std::size_t n = sigma.size();
  Matrix D(n, n);
  for (std::size_t i = 0; i < n; ++i) D(i, i) = sigma[i];
  return random_rotation(gen, n) * D * random_rotation(gen, n);
}

/// Strongly monotone matrix M^T M + I.
inline Matrix random_strongly_monotone(std::mt19937& gen, std::size_t n) {
  const Matrix M = random_matrix(gen, n, n, -1.0, 1.0);
  return M.transpose() * M + Matrix::identity(n);
}

/// Plain Gaussian elimination with partial pivoting, written independently of
/// the library path so it can serve as a reference.
inline Vector reference_solve(Matrix A, Vector b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(A(r, c)) > std::abs(A(p, c))) p = r;
    if (p != c) {
      for (std::size_t j = 0; j < n; ++j) std::swap(A(p, j), A(c, j));
      std::swap(b[p], b[c]);
    }
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = A(r, c) / A(c, c);
      for (std::size_t j = c; j < n; ++j) A(r, j) -= f * A(c, j);
      b[r] -= f * b[c];
    }
  }
  Vector x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= A(i, j) * x[j];
    x[i] = s / A(i, i);
  }
  return x;
}

/// Largest singular value and the norm of the rank-one-deflated remainder;
/// used to certify numerical rank-one structure.
struct RankOneProbe {
  double sigma1 = 0.0;
  double sigma2 = 0.0;
};

inline RankOneProbe rank_one_probe(const Matrix& M) {
  RankOneProbe probe;
  probe.sigma1 = gensec::operator_norm(M);
  if (probe.sigma1 == 0.0) return probe;

  // Power-iterate M^T M for the top right-singular vector.
  const std::size_t n = M.cols();
  std::mt19937 gen(7u);
  Vector v = random_vector(gen, n, -1.0, 1.0);
  v *= 1.0 / gensec::norm(v);
  const Matrix Mt = M.transpose();
  for (int it = 0; it < 200; ++it) {
    Vector w = Mt * (M * v);
    const double wn = gensec::norm(w);
    if (wn == 0.0) break;
    v = (1.0 / wn) * w;
  }
  Vector u = M * v;
  const double s1 = gensec::norm(u);
  if (s1 == 0.0) return probe;
  u *= 1.0 / s1;
  probe.sigma2 = gensec::operator_norm(M - s1 * gensec::outer(u, v));
  return probe;
}

/// Numerical rank-one acceptance: the trailing singular value is either
/// negligible relative to the leading one or sits at the absolute rounding
/// floor (reconstructing B_{k+1} - B_k by subtraction leaves ~eps*||B||
/// noise, far below 1e-14 at desk scale).
inline bool numerically_rank_one(const RankOneProbe& p) {
  return p.sigma2 <= 1e-12 * p.sigma1 || p.sigma2 <= 1e-14;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

}  // namespace testutil
