#pragma once

// Dense primitives for desk-scale problems (n up to ~100). Everything is a
// pure function of its arguments.

#include <Eigen/Dense>

namespace dynregret {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Spectral enclosure lambda_min * I <= A <= lambda_max * I.
struct SpdBounds {
  double lambda_min = 1.0;
  double lambda_max = 1.0;

  double condition_number() const { return lambda_max / lambda_min; }
  bool positive_definite() const { return lambda_min > 0.0; }
};

// Symmetry within 1e-12 relative to the largest entry.
bool is_symmetric(const Matrix& a, double rel_tol = 1e-12);
bool all_finite(const Vector& v);
bool all_finite(const Matrix& m);

void require_symmetric(const Matrix& a, const char* what);
void require_same_dim(Eigen::Index expected, Eigen::Index got, const char* what);

/// Solves A x = b through a Cholesky factorization. Throws
/// NotPositiveDefinite when the factorization hits a non-positive pivot.
Vector spd_solve(const Matrix& a, const Vector& b);

/// Extreme eigenvalues of a symmetric matrix (not necessarily definite).
SpdBounds eig_extremes(const Matrix& a);

/// sqrt(x^T A x). Throws NegativeQuadraticForm when x^T A x < -1e-12.
double a_norm(const Vector& x, const Matrix& a);

inline Matrix identity(Eigen::Index n) { return Matrix::Identity(n, n); }

}  // namespace dynregret
