#include "dynregret/linalg.hpp"

#include <cmath>
#include <string>

#include "dynregret/errors.hpp"

namespace dynregret {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::kNotSymmetric: return "NotSymmetric";
    case ErrorCode::kNegativeQuadraticForm: return "NegativeQuadraticForm";
    case ErrorCode::kInvalidConstants: return "InvalidConstants";
    case ErrorCode::kZetaTooSmall: return "ZetaTooSmall";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kDiverged: return "Diverged";
    case ErrorCode::kNotAdmissible: return "NotAdmissible";
    case ErrorCode::kRhoOutOfRange: return "RhoOutOfRange";
    case ErrorCode::kEmptyHull: return "EmptyHull";
    case ErrorCode::kConfigInvalid: return "ConfigInvalid";
    case ErrorCode::kUnsupportedEnvironment: return "UnsupportedEnvironment";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kProtocolViolation: return "ProtocolViolation";
    case ErrorCode::kInvariantViolated: return "InvariantViolated";
    case ErrorCode::kNonFinite: return "NonFinite";
  }
  return "Unknown";
}

bool is_symmetric(const Matrix& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

bool all_finite(const Vector& v) { return v.allFinite(); }
bool all_finite(const Matrix& m) { return m.allFinite(); }

void require_symmetric(const Matrix& a, const char* what) {
  if (a.rows() == 0 || !is_symmetric(a)) {
    throw Error(ErrorCode::kNotSymmetric, std::string(what) + " is not symmetric");
  }
  if (!a.allFinite()) {
    throw Error(ErrorCode::kNonFinite, std::string(what) + " has non-finite entries");
  }
}

void require_same_dim(Eigen::Index expected, Eigen::Index got, const char* what) {
  if (expected != got) {
    throw Error(ErrorCode::kDimensionMismatch, std::string(what) + ": expected dimension " +
                                                   std::to_string(expected) + ", got " +
                                                   std::to_string(got));
  }
}

Vector spd_solve(const Matrix& a, const Vector& b) {
  require_same_dim(a.rows(), b.size(), "spd_solve");
  require_symmetric(a, "spd_solve matrix");
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPositiveDefinite, "Cholesky factorization hit a non-positive pivot");
  }
  Vector x = llt.solve(b);
  // one round of iterative refinement for badly scaled systems
  const Vector r = b - a * x;
  if (r.norm() > 1e-10 * (1.0 + b.norm())) x += llt.solve(r);
  return x;
}

SpdBounds eig_extremes(const Matrix& a) {
  require_symmetric(a, "eig_extremes matrix");
  if (a.rows() == 1) return {a(0, 0), a(0, 0)};
  Eigen::SelfAdjointEigenSolver<Matrix> es(a, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();  // ascending
  return {ev(0), ev(ev.size() - 1)};
}

double a_norm(const Vector& x, const Matrix& a) {
  require_same_dim(a.rows(), x.size(), "a_norm");
  const double q = x.dot(a * x);
  if (q < -1e-12) {
    throw Error(ErrorCode::kNegativeQuadraticForm, "x^T A x = " + std::to_string(q));
  }
  return std::sqrt(std::max(q, 0.0));
}

}  // namespace dynregret
