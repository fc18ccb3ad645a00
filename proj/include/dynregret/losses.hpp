#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "dynregret/linalg.hpp"
#include "dynregret/projections.hpp"

namespace dynregret {

/// A twice-differentiable strongly convex smooth loss. Learners only see
/// this interface.
class LossFunction {
 public:
  virtual ~LossFunction() = default;

  virtual Eigen::Index dimension() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual Matrix hessian(const Vector& x) const = 0;
};

/// f(x) = 1/2 (x - c)^T Q (x - c) + offset, with Q SPD.
class QuadraticLoss final : public LossFunction {
 public:
  QuadraticLoss(Matrix curvature, Vector center, double offset = 0.0);

  Eigen::Index dimension() const override { return center_.size(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  Matrix hessian(const Vector& x) const override;

  const Matrix& curvature() const { return curvature_; }
  const Vector& center() const { return center_; }
  double offset() const { return offset_; }
  const SpdBounds& spectrum() const { return spectrum_; }

 private:
  Matrix curvature_;
  Vector center_;
  double offset_;
  SpdBounds spectrum_;
};

double eval_value(const QuadraticLoss& f, const Vector& x);
Vector eval_grad(const QuadraticLoss& f, const Vector& x);
Matrix eval_hessian(const QuadraticLoss& f, const Vector& x);

enum class EnvironmentKind { kAlternatingOffset, kAlternatingCenterDecay, kRandomWalk, kStatic, kCustom };

std::string to_string(EnvironmentKind kind);
EnvironmentKind environment_kind_from_string(const std::string& s);

/// Immutable sequence of quadratic losses plus their exact constants and
/// (feasible) minimizers.
class FunctionSequence {
 public:
  struct Constants {
    double mu = 0.0;
    double smoothness = 0.0;           // L
    double hessian_lipschitz = 0.0;    // L_H; exactly 0 for quadratics
  };

  /// Computes mu/L from the spectra. When `declared` is given and every
  /// spectrum lies within [mu, L] of it (1e-9 relative), the declared values
  /// are kept so constants stay exact.
  FunctionSequence(std::vector<QuadraticLoss> losses, FeasibleSet feasible_set,
                   std::optional<Constants> declared = std::nullopt);

  size_t horizon() const { return losses_.size(); }
  Eigen::Index dimension() const { return losses_.front().dimension(); }

  /// 1-based round index, matching the t of the online protocol.
  const QuadraticLoss& at(size_t t) const { return losses_.at(t - 1); }
  const std::vector<QuadraticLoss>& losses() const { return losses_; }

  const FeasibleSet& feasible_set() const { return feasible_set_; }
  const Constants& constants() const { return constants_; }
  double mu() const { return constants_.mu; }
  double smoothness() const { return constants_.smoothness; }
  double hessian_lipschitz() const { return constants_.hessian_lipschitz; }

  /// x*_t = argmin over the feasible set, 1-based.
  const Vector& minimizer(size_t t) const { return minimizers_.at(t - 1); }
  const std::vector<Vector>& minimizers() const { return minimizers_; }

  /// Sequences whose strong convexity decays with t can only be used to
  /// compare regularity measures; theorem bounds are refused on them.
  bool regularity_comparison_only() const { return regularity_only_; }
  void mark_regularity_comparison_only() { regularity_only_ = true; }

  /// The first `horizon` rounds with the same constants.
  FunctionSequence prefix(size_t horizon) const;

  EnvironmentKind kind() const { return kind_; }
  void set_kind(EnvironmentKind k) { kind_ = k; }

 private:
  std::vector<QuadraticLoss> losses_;
  FeasibleSet feasible_set_;
  Constants constants_;
  std::vector<Vector> minimizers_;
  bool regularity_only_ = false;
  EnvironmentKind kind_ = EnvironmentKind::kCustom;
};

struct EnvironmentSpec {
  EnvironmentKind kind = EnvironmentKind::kRandomWalk;
  Eigen::Index dimension = 2;
  size_t horizon = 100;
  std::uint64_t seed = 0;

  // kind-specific parameters
  double mu = 1.0;
  double smoothness = 4.0;
  double step_bound = 0.1;                 // c-bar of the random walk
  std::optional<Vector> anchor;            // x_star / y / walk start / static center
  FeasibleSet feasible_set;
  std::string custom_path;                 // kCustom: sequence JSON file
};

FunctionSequence gen_alternating_offset(Eigen::Index dim, size_t horizon, const Vector& x_star);
FunctionSequence gen_alternating_center_decay(Eigen::Index dim, size_t horizon, const Vector& y);
FunctionSequence gen_random_walk(Eigen::Index dim, size_t horizon, double mu, double smoothness,
                                 double step_bound, std::uint64_t seed,
                                 const Vector& start = Vector(),
                                 const FeasibleSet& feasible_set = FeasibleSet());
FunctionSequence gen_static(Eigen::Index dim, size_t horizon, double mu, double smoothness,
                            std::uint64_t seed, const Vector& center = Vector(),
                            const FeasibleSet& feasible_set = FeasibleSet());

/// Dispatches on spec.kind. kCustom loads spec.custom_path.
FunctionSequence generate(const EnvironmentSpec& spec);

/// Q = R diag(d) R^T with R Haar-distributed, d uniform in [mu, L] and the
/// extremes pinned to mu and L when dim >= 2.
Matrix random_spd(Eigen::Index dim, double mu, double smoothness, std::mt19937_64& rng);

}  // namespace dynregret
