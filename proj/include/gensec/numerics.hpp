#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "gensec/errors.hpp"

namespace gensec {

/// Dense real vector with value semantics.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double value = 0.0) : v_(n, value) {}
  Vector(std::initializer_list<double> values) : v_(values) {}
  explicit Vector(std::vector<double> values) : v_(std::move(values)) {}

  std::size_t size() const { return v_.size(); }
  double& operator[](std::size_t i) { return v_[i]; }
  double operator[](std::size_t i) const { return v_[i]; }
  const std::vector<double>& values() const { return v_; }

  auto begin() { return v_.begin(); }
  auto end() { return v_.end(); }
  auto begin() const { return v_.begin(); }
  auto end() const { return v_.end(); }

  Vector& operator+=(const Vector& o) {
    require_same_size(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
    return *this;
  }
  Vector& operator-=(const Vector& o) {
    require_same_size(o);
    for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
    return *this;
  }
  Vector& operator*=(double a) {
    for (double& x : v_) x *= a;
    return *this;
  }

  friend Vector operator+(Vector a, const Vector& b) { return a += b; }
  friend Vector operator-(Vector a, const Vector& b) { return a -= b; }
  friend Vector operator*(double a, Vector v) { return v *= a; }
  friend Vector operator*(Vector v, double a) { return v *= a; }
  friend Vector operator-(Vector v) { return v *= -1.0; }

  friend bool operator==(const Vector& a, const Vector& b) { return a.v_ == b.v_; }

 private:
  void require_same_size(const Vector& o) const {
    if (v_.size() != o.v_.size()) throw DimensionMismatch("vector sizes differ");
  }
  std::vector<double> v_;
};

inline double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) throw DimensionMismatch("dot: vector sizes differ");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Vector& a) { return std::sqrt(dot(a, a)); }

inline bool all_finite(const Vector& a) {
  for (double x : a)
    if (!std::isfinite(x)) return false;
  return true;
}

/// Dense row-major matrix, doubling as a linear operator on Vector.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
      : rows_(rows), cols_(cols), a_(rows * cols, value) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return a_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * cols_ + j]; }

  Matrix& operator+=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
  }
  Matrix& operator-=(const Matrix& o) {
    require_same_shape(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
  }
  Matrix& operator*=(double s) {
    for (double& x : a_) x *= s;
    return *this;
  }

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(double s, Matrix m) { return m *= s; }

  friend Vector operator*(const Matrix& m, const Vector& v) {
    if (m.cols_ != v.size()) throw DimensionMismatch("matvec: shape mismatch");
    Vector out(m.rows_);
    for (std::size_t i = 0; i < m.rows_; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < m.cols_; ++j) s += m(i, j) * v[j];
      out[i] = s;
    }
    return out;
  }

  friend Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw DimensionMismatch("matmul: shape mismatch");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        const double aik = a(i, k);
        for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
      }
    return out;
  }

  Matrix transpose() const {
    Matrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  double frobenius_norm() const {
    double s = 0.0;
    for (double x : a_) s += x * x;
    return std::sqrt(s);
  }

  double max_abs() const {
    double m = 0.0;
    for (double x : a_) m = std::max(m, std::abs(x));
    return m;
  }

  bool all_finite() const {
    for (double x : a_)
      if (!std::isfinite(x)) return false;
    return true;
  }

 private:
  void require_same_shape(const Matrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_) throw DimensionMismatch("matrix shapes differ");
  }
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> a_;
};

/// Rank-one matrix a * b^T.
inline Matrix outer(const Vector& a, const Vector& b) {
  Matrix m(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) m(i, j) = a[i] * b[j];
  return m;
}

using VectorFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Matrix(const Vector&)>;

/// Map that is identically zero, handy as a default nonsmooth part.
inline VectorFn zero_map() {
  return [](const Vector& x) { return Vector(x.size(), 0.0); };
}

/// Solves A x = b by LU factorization with partial pivoting.
///
/// A pivot smaller than 1e-12 * max|A| is treated as rank deficiency.
inline Vector solve_linear(const Matrix& A, const Vector& b) {
  const std::size_t n = A.rows();
  if (A.cols() != n) throw DimensionMismatch("solve_linear: matrix not square");
  if (b.size() != n) throw DimensionMismatch("solve_linear: rhs size mismatch");
  const double pivot_floor = 1e-12 * A.max_abs();

  Matrix lu = A;
  Vector x = b;
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;

  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    double best = std::abs(lu(col, col));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double cand = std::abs(lu(r, col));
      if (cand > best) {
        best = cand;
        piv = r;
      }
    }
    if (!(best > pivot_floor)) throw SingularOperator("solve_linear: rank-deficient matrix");
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(lu(piv, j), lu(col, j));
      std::swap(x[piv], x[col]);
    }
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = lu(r, col) / lu(col, col);
      lu(r, col) = 0.0;
      for (std::size_t j = col + 1; j < n; ++j) lu(r, j) -= f * lu(col, j);
      x[r] -= f * x[col];
    }
  }
  for (std::size_t i = n; i-- > 0;) {
    double s = x[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= lu(i, j) * x[j];
    x[i] = s / lu(i, i);
  }
  return x;
}

/// Spectral norm sup{ ||A x|| : ||x|| <= 1 } by power iteration on A^T A.
inline double operator_norm(const Matrix& A) {
  const std::size_t n = A.cols();
  if (n == 0 || A.rows() == 0) return 0.0;
  if (A.max_abs() == 0.0) return 0.0;

  std::mt19937 gen(0x5eedu);  // fixed seed keeps results reproducible
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Vector v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = unif(gen);
  double vn = norm(v);
  v *= 1.0 / vn;

  const Matrix At = A.transpose();
  double lambda = 0.0;
  for (int it = 0; it < 500; ++it) {
    Vector w = At * (A * v);
    const double wn = norm(w);
    if (wn == 0.0) return 0.0;  // v landed in the null space
    const double lambda_new = dot(v, w);
    v = (1.0 / wn) * w;
    if (it > 0 && std::abs(lambda_new - lambda) <= 1e-12 * std::max(lambda_new, 1e-300)) {
      lambda = lambda_new;
      break;
    }
    lambda = lambda_new;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

/// Central-difference Jacobian with step h in every coordinate.
inline Matrix fd_jacobian(const VectorFn& func, const Vector& x, double h) {
  if (!(h > 0.0)) throw InvalidProblem("fd_jacobian: step must be positive");
  const std::size_t n = x.size();
  Matrix J;
  for (std::size_t j = 0; j < n; ++j) {
    Vector xp = x, xm = x;
    xp[j] += h;
    xm[j] -= h;
    const Vector fp = func(xp);
    const Vector fm = func(xm);
    if (!all_finite(fp) || !all_finite(fm))
      throw NonFiniteEvaluation("fd_jacobian: function returned NaN/Inf");
    if (j == 0) J = Matrix(fp.size(), n);
    if (fp.size() != J.rows() || fm.size() != J.rows())
      throw DimensionMismatch("fd_jacobian: inconsistent function output size");
    for (std::size_t i = 0; i < J.rows(); ++i) J(i, j) = (fp[i] - fm[i]) / (2.0 * h);
  }
  if (n == 0) J = Matrix(0, 0);
  return J;
}

/// Same with the default step 1e-6 * (1 + ||x||).
inline Matrix fd_jacobian(const VectorFn& func, const Vector& x) {
  return fd_jacobian(func, x, 1e-6 * (1.0 + norm(x)));
}

}  // namespace gensec
