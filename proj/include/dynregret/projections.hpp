#pragma once

// Euclidean and A-weighted projections onto the supported feasible sets.

#include <variant>

#include "dynregret/linalg.hpp"

namespace dynregret {

struct Unconstrained {};

struct Ball {
  Vector center;
  double radius = 1.0;
};

struct Box {
  Vector lower;
  Vector upper;
};

/// A nonempty closed convex set. Construct through the factories so the
/// invariants (radius > 0, lower <= upper) are checked once.
class FeasibleSet {
 public:
  using Variant = std::variant<Unconstrained, Ball, Box>;

  FeasibleSet() = default;

  static FeasibleSet unconstrained() { return FeasibleSet(); }
  static FeasibleSet ball(Vector center, double radius);
  static FeasibleSet box(Vector lower, Vector upper);

  const Variant& shape() const { return shape_; }
  bool is_unconstrained() const { return std::holds_alternative<Unconstrained>(shape_); }
  const Ball* as_ball() const { return std::get_if<Ball>(&shape_); }
  const Box* as_box() const { return std::get_if<Box>(&shape_); }

  /// Dimension of the set; 0 for the unconstrained sentinel (any dimension).
  Eigen::Index dimension() const;

  /// Exact membership (no tolerance).
  bool contains(const Vector& x) const;
  /// Distance-to-set style membership within `tol`.
  bool contains(const Vector& x, double tol) const;

  /// max ||x - y|| over the set; +inf when unconstrained.
  double diameter() const;

 private:
  explicit FeasibleSet(Variant v) : shape_(std::move(v)) {}
  Variant shape_{Unconstrained{}};
};

struct ProjectionResult {
  Vector point;
  double kkt_residual = 0.0;
};

/// argmin_{x in S} ||y - x||.
ProjectionResult project_euclidean(const FeasibleSet& set, const Vector& y);

/// argmin_{x in S} ||y - x||_A for SPD A. Points already in S are returned
/// unchanged (bit-identical).
ProjectionResult project_a_norm(const FeasibleSet& set, const Vector& y, const Matrix& a);

inline constexpr int kProjectionIterationCap = 10'000;

}  // namespace dynregret
