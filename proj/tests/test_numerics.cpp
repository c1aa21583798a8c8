#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "gensec/numerics.hpp"
#include "support.hpp"

using gensec::Matrix;
using gensec::Vector;

TEST_CASE("solve_linear handles the identity") {
  const Vector x = gensec::solve_linear(Matrix::identity(2), Vector{3.0, -1.0});
  CHECK(x[0] == Catch::Approx(3.0).margin(1e-14));
  CHECK(x[1] == Catch::Approx(-1.0).margin(1e-14));
}

TEST_CASE("solve_linear handles a diagonal system") {
  Matrix A(2, 2);
  A(0, 0) = 2.0;
  A(1, 1) = 4.0;
  const Vector x = gensec::solve_linear(A, Vector{2.0, 8.0});
  CHECK(x[0] == Catch::Approx(1.0).margin(1e-14));
  CHECK(x[1] == Catch::Approx(2.0).margin(1e-14));
}

TEST_CASE("solve_linear rejects a rank-one matrix") {
  Matrix A(2, 2, 1.0);
  CHECK_THROWS_AS(gensec::solve_linear(A, Vector{1.0, 0.0}), gensec::SingularOperator);
}

TEST_CASE("solve_linear round-trips well-conditioned random systems") {
  std::mt19937 gen(101u);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 5;
    std::vector<double> sigma(n);
    for (std::size_t i = 0; i < n; ++i) sigma[i] = testutil::urand(gen, 1e-3, 1e3);
    const Matrix A = testutil::matrix_with_spectrum(gen, sigma);
    const Vector b = testutil::random_vector(gen, n, -10.0, 10.0);
    const Vector x = gensec::solve_linear(A, b);
    CHECK(gensec::norm(A * x - b) <= 1e-10 * (1.0 + gensec::norm(b)));
  }
}

TEST_CASE("operator_norm of the identity is one") {
  CHECK(gensec::operator_norm(Matrix::identity(3)) == Catch::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("operator_norm of a diagonal matrix is the largest magnitude") {
  Matrix A(2, 2);
  A(0, 0) = 3.0;
  A(1, 1) = -5.0;
  CHECK(gensec::operator_norm(A) == Catch::Approx(5.0).epsilon(1e-8));
}

TEST_CASE("operator_norm of a nilpotent matrix") {
  // A^T A = diag(0, 4), so the singular values are 2 and 0.
  Matrix A(2, 2);
  A(0, 1) = 2.0;
  CHECK(gensec::operator_norm(A) == Catch::Approx(2.0).epsilon(1e-8));
  CHECK(gensec::operator_norm(Matrix(3, 3)) == 0.0);
}

TEST_CASE("operator_norm dominates every Rayleigh quotient") {
  std::mt19937 gen(202u);
  const Matrix A = testutil::random_matrix(gen, 4, 4, -1.0, 1.0);
  const double nrm = gensec::operator_norm(A);
  for (int trial = 0; trial < 100; ++trial) {
    Vector v = testutil::random_vector(gen, 4, -1.0, 1.0);
    v *= 1.0 / gensec::norm(v);
    CHECK(nrm >= gensec::norm(A * v) - 1e-8);
  }
}

TEST_CASE("fd_jacobian of the identity map") {
  const auto id = [](const Vector& x) { return x; };
  const Matrix J = gensec::fd_jacobian(id, Vector{0.3, -0.8});
  CHECK(gensec::operator_norm(J - Matrix::identity(2)) <= 1e-8);
}

TEST_CASE("fd_jacobian of a smooth nonlinear map") {
  const auto f = [](const Vector& x) { return Vector{x[0] * x[0], x[1]}; };
  const Matrix J = gensec::fd_jacobian(f, Vector{1.0, 1.0}, 1e-6);
  Matrix expect(2, 2);
  expect(0, 0) = 2.0;
  expect(1, 1) = 1.0;
  CHECK(gensec::operator_norm(J - expect) <= 1e-8);
}

TEST_CASE("fd_jacobian of a constant map is zero") {
  const auto f = [](const Vector& x) { return Vector(x.size(), 4.2); };
  CHECK(gensec::fd_jacobian(f, Vector{1.0, 2.0, 3.0}).max_abs() == 0.0);
}

TEST_CASE("fd_jacobian of an affine map recovers the matrix") {
  std::mt19937 gen(303u);
  const Matrix M = testutil::random_matrix(gen, 3, 3, -2.0, 2.0);
  const Vector c = testutil::random_vector(gen, 3, -1.0, 1.0);
  const auto f = [&](const Vector& x) { return M * x + c; };
  const Matrix J = gensec::fd_jacobian(f, testutil::random_vector(gen, 3, -1.0, 1.0));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(std::abs(J(i, j) - M(i, j)) <= 1e-8);
}

TEST_CASE("fd_jacobian needs a positive step") {
  const auto id = [](const Vector& x) { return x; };
  CHECK_THROWS_AS(gensec::fd_jacobian(id, Vector{1.0}, 0.0), gensec::InvalidProblem);
  CHECK_THROWS_AS(gensec::fd_jacobian(id, Vector{1.0}, -1e-6), gensec::InvalidProblem);
}

TEST_CASE("fd_jacobian reports non-finite evaluations") {
  const auto bad = [](const Vector& x) {
    return Vector{std::sqrt(x[0])};  // NaN for negative probe points
  };
  CHECK_THROWS_AS(gensec::fd_jacobian(bad, Vector{0.0}), gensec::NonFiniteEvaluation);
}
