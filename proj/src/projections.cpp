#include "dynregret/projections.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "dynregret/errors.hpp"

namespace dynregret {

FeasibleSet FeasibleSet::ball(Vector center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw Error(ErrorCode::kInvalidConstants, "ball radius must be positive and finite");
  }
  if (center.size() == 0 || !center.allFinite()) {
    throw Error(ErrorCode::kInvalidConstants, "ball center must be a finite nonempty vector");
  }
  return FeasibleSet(Ball{std::move(center), radius});
}

FeasibleSet FeasibleSet::box(Vector lower, Vector upper) {
  require_same_dim(lower.size(), upper.size(), "box bounds");
  if (lower.size() == 0 || !lower.allFinite() || !upper.allFinite()) {
    throw Error(ErrorCode::kInvalidConstants, "box bounds must be finite nonempty vectors");
  }
  if ((lower.array() > upper.array()).any()) {
    throw Error(ErrorCode::kInvalidConstants, "box requires lower <= upper coordinate-wise");
  }
  return FeasibleSet(Box{std::move(lower), std::move(upper)});
}

Eigen::Index FeasibleSet::dimension() const {
  if (const auto* b = as_ball()) return b->center.size();
  if (const auto* b = as_box()) return b->lower.size();
  return 0;
}

bool FeasibleSet::contains(const Vector& x) const {
  if (const auto* b = as_ball()) return (x - b->center).norm() <= b->radius;
  if (const auto* b = as_box()) {
    return (x.array() >= b->lower.array()).all() && (x.array() <= b->upper.array()).all();
  }
  return true;
}

bool FeasibleSet::contains(const Vector& x, double tol) const {
  if (const auto* b = as_ball()) return (x - b->center).norm() <= b->radius + tol;
  if (const auto* b = as_box()) {
    return (x.array() >= b->lower.array() - tol).all() &&
           (x.array() <= b->upper.array() + tol).all();
  }
  return true;
}

double FeasibleSet::diameter() const {
  if (const auto* b = as_ball()) return 2.0 * b->radius;
  if (const auto* b = as_box()) return (b->upper - b->lower).norm();
  return std::numeric_limits<double>::infinity();
}

namespace {

void check_dims(const FeasibleSet& set, const Vector& y) {
  if (!set.is_unconstrained()) require_same_dim(set.dimension(), y.size(), "projection");
}

Vector clip(const Box& box, const Vector& y) {
  return y.cwiseMax(box.lower).cwiseMin(box.upper);
}

ProjectionResult euclidean_ball(const Ball& ball, const Vector& y) {
  const Vector w = y - ball.center;
  const double dist = w.norm();
  Vector x = ball.center + w * (ball.radius / dist);
  const double infeasibility = std::max(0.0, (x - ball.center).norm() - ball.radius);
  return {std::move(x), infeasibility / ball.radius};
}

bool is_scaled_identity(const Matrix& a) {
  const double d = a(0, 0);
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (a(i, j) != (i == j ? d : 0.0)) return false;
    }
  }
  return true;
}

bool is_diagonal(const Matrix& a) {
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j && a(i, j) != 0.0) return false;
    }
  }
  return true;
}

// Projection onto {||x - c|| <= r} in the A-norm. Stationarity gives
// (A + nu I) u = A w with u = x - c, w = y - c; ||u(nu)|| is decreasing in nu,
// so the multiplier is found by safeguarded Newton on the secular equation
// 1/||u(nu)|| - 1/r = 0, falling back to bisection.
ProjectionResult a_norm_ball(const Ball& ball, const Vector& y, const Matrix& a) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  const Vector& lam = es.eigenvalues();
  if (!(lam(0) > 0.0)) {
    throw Error(ErrorCode::kNotPositiveDefinite, "A-norm projection needs an SPD matrix");
  }
  const Matrix& v = es.eigenvectors();
  const Vector w = y - ball.center;
  const Vector wt = v.transpose() * w;
  const Vector aw = lam.cwiseProduct(wt);  // coordinates of A w
  const double r = ball.radius;

  auto u_norm = [&](double nu) {
    return (aw.array() / (lam.array() + nu)).matrix().norm();
  };
  // d/dnu ||u||, used for the Newton step on 1/||u||
  auto u_norm_deriv = [&](double nu, double un) {
    const auto denom = lam.array() + nu;
    const double s = (aw.array().square() / denom.cube()).sum();
    return -s / un;
  };

  double lo = 0.0;
  double hi = lam(lam.size() - 1) * w.norm() / r;
  double nu = 0.5 * hi;
  int iter = 0;
  for (; iter < kProjectionIterationCap; ++iter) {
    const double un = u_norm(nu);
    const double resid = un - r;
    if (std::abs(resid) <= 1e-13 * r) break;
    if (resid > 0.0) lo = nu; else hi = nu;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, hi)) break;
    const double d = u_norm_deriv(nu, un);
    // Newton on psi(nu) = 1/||u|| - 1/r: psi' = -d/||u||^2
    double next = nu - (1.0 / un - 1.0 / r) / (-d / (un * un));
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    nu = next;
  }
  if (iter == kProjectionIterationCap) {
    throw Error(ErrorCode::kNoConvergence, "ball A-norm projection multiplier search");
  }
  Vector ut = aw.array() / (lam.array() + nu);
  Vector u = v * ut;
  const double un = u.norm();
  if (un > r) u *= r / un;
  Vector x = ball.center + u;

  const Vector grad = a * (x - y);
  const Vector xc = x - ball.center;
  const double nu_fit = std::max(0.0, -xc.dot(grad) / xc.squaredNorm());
  const double stationarity = (grad + nu_fit * xc).norm() / (1.0 + grad.norm());
  const double infeasibility = std::max(0.0, xc.norm() - r) / r;
  return {std::move(x), std::max(stationarity, infeasibility)};
}

enum class Bound : unsigned char { kFree, kLower, kUpper };

// Primal active-set method for min 1/2 (x-y)^T A (x-y) s.t. lower <= x <= upper.
ProjectionResult a_norm_box(const Box& box, const Vector& y, const Matrix& a) {
  Eigen::LLT<Matrix> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::kNotPositiveDefinite, "A-norm projection needs an SPD matrix");
  }
  const Eigen::Index n = y.size();
  Vector x = clip(box, y);
  std::vector<Bound> status(static_cast<size_t>(n), Bound::kFree);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (y(i) < box.lower(i)) status[i] = Bound::kLower;
    else if (y(i) > box.upper(i)) status[i] = Bound::kUpper;
  }
  const double scale = a.cwiseAbs().maxCoeff() * std::max(1.0, (x - y).norm());
  const double mult_tol = 1e-13 * scale;

  bool at_face_minimum = false;
  int iter = 0;
  for (; iter < kProjectionIterationCap; ++iter) {
    const Vector grad = a * (x - y);
    std::vector<Eigen::Index> free_idx;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (status[i] == Bound::kFree) free_idx.push_back(i);
    }

    if (!at_face_minimum && !free_idx.empty()) {
      const auto nf = static_cast<Eigen::Index>(free_idx.size());
      Matrix a_ff(nf, nf);
      Vector g_f(nf);
      for (Eigen::Index r = 0; r < nf; ++r) {
        g_f(r) = grad(free_idx[r]);
        for (Eigen::Index c = 0; c < nf; ++c) a_ff(r, c) = a(free_idx[r], free_idx[c]);
      }
      const Vector p_f = a_ff.llt().solve(-g_f);
      double alpha = 1.0;
      Eigen::Index blocking = -1;
      Bound blocking_side = Bound::kFree;
      for (Eigen::Index r = 0; r < nf; ++r) {
        const Eigen::Index i = free_idx[r];
        if (p_f(r) < 0.0) {
          const double room = (box.lower(i) - x(i)) / p_f(r);
          if (room < alpha) { alpha = room; blocking = i; blocking_side = Bound::kLower; }
        } else if (p_f(r) > 0.0) {
          const double room = (box.upper(i) - x(i)) / p_f(r);
          if (room < alpha) { alpha = room; blocking = i; blocking_side = Bound::kUpper; }
        }
      }
      alpha = std::max(alpha, 0.0);
      for (Eigen::Index r = 0; r < nf; ++r) x(free_idx[r]) += alpha * p_f(r);
      x = clip(box, x);
      if (blocking >= 0) {
        x(blocking) = blocking_side == Bound::kLower ? box.lower(blocking) : box.upper(blocking);
        status[blocking] = blocking_side;
      } else {
        at_face_minimum = true;
      }
      continue;
    }

    // Face minimum reached: release the bound with the most violated multiplier.
    Eigen::Index release = -1;
    double worst = mult_tol;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (box.lower(i) == box.upper(i)) continue;
      double violation = 0.0;
      if (status[i] == Bound::kLower) violation = -grad(i);
      else if (status[i] == Bound::kUpper) violation = grad(i);
      if (violation > worst) { worst = violation; release = i; }
    }
    if (release < 0) break;
    status[release] = Bound::kFree;
    at_face_minimum = false;
  }
  if (iter == kProjectionIterationCap) {
    throw Error(ErrorCode::kNoConvergence, "box A-norm projection active-set iterations");
  }

  const Vector grad = a * (x - y);
  double resid = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double r = 0.0;
    if (box.lower(i) == box.upper(i)) r = 0.0;
    else if (x(i) <= box.lower(i)) r = std::max(0.0, -grad(i));
    else if (x(i) >= box.upper(i)) r = std::max(0.0, grad(i));
    else r = std::abs(grad(i));
    resid = std::max(resid, r);
  }
  return {std::move(x), resid / (1.0 + scale)};
}

}  // namespace

ProjectionResult project_euclidean(const FeasibleSet& set, const Vector& y) {
  check_dims(set, y);
  if (set.contains(y)) return {y, 0.0};
  if (const auto* b = set.as_ball()) return euclidean_ball(*b, y);
  if (const auto* b = set.as_box()) return {clip(*b, y), 0.0};
  return {y, 0.0};
}

ProjectionResult project_a_norm(const FeasibleSet& set, const Vector& y, const Matrix& a) {
  check_dims(set, y);
  require_same_dim(y.size(), a.rows(), "project_a_norm matrix");
  require_symmetric(a, "project_a_norm matrix");
  if (set.contains(y)) return {y, 0.0};

  if (is_scaled_identity(a)) {
    if (!(a(0, 0) > 0.0)) {
      throw Error(ErrorCode::kNotPositiveDefinite, "A-norm projection needs an SPD matrix");
    }
    return project_euclidean(set, y);
  }
  if (const auto* b = set.as_ball()) return a_norm_ball(*b, y, a);
  if (const auto* b = set.as_box()) {
    if (is_diagonal(a)) {
      if (!(a.diagonal().array() > 0.0).all()) {
        throw Error(ErrorCode::kNotPositiveDefinite, "A-norm projection needs an SPD matrix");
      }
      return {clip(*b, y), 0.0};
    }
    return a_norm_box(*b, y, a);
  }
  return {y, 0.0};
}

}  // namespace dynregret
