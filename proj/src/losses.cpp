#include "dynregret/losses.hpp"

#include <cmath>
#include <string>

#include "dynregret/errors.hpp"
#include "dynregret/serialization.hpp"

namespace dynregret {

QuadraticLoss::QuadraticLoss(Matrix curvature, Vector center, double offset)
    : curvature_(std::move(curvature)), center_(std::move(center)), offset_(offset) {
  require_same_dim(curvature_.rows(), center_.size(), "quadratic loss center");
  if (!center_.allFinite() || !std::isfinite(offset_)) {
    throw Error(ErrorCode::kNonFinite, "quadratic loss has non-finite center or offset");
  }
  spectrum_ = eig_extremes(curvature_);
  if (!(spectrum_.lambda_min > 0.0)) {
    throw Error(ErrorCode::kNotPositiveDefinite,
                "quadratic curvature must be positive definite, lambda_min = " +
                    std::to_string(spectrum_.lambda_min));
  }
}

double QuadraticLoss::value(const Vector& x) const {
  require_same_dim(center_.size(), x.size(), "loss value");
  const Vector d = x - center_;
  return 0.5 * d.dot(curvature_ * d) + offset_;
}

Vector QuadraticLoss::gradient(const Vector& x) const {
  require_same_dim(center_.size(), x.size(), "loss gradient");
  return curvature_ * (x - center_);
}

Matrix QuadraticLoss::hessian(const Vector& x) const {
  require_same_dim(center_.size(), x.size(), "loss hessian");
  return curvature_;
}

double eval_value(const QuadraticLoss& f, const Vector& x) { return f.value(x); }
Vector eval_grad(const QuadraticLoss& f, const Vector& x) { return f.gradient(x); }
Matrix eval_hessian(const QuadraticLoss& f, const Vector& x) { return f.hessian(x); }

std::string to_string(EnvironmentKind kind) {
  switch (kind) {
    case EnvironmentKind::kAlternatingOffset: return "alternating_offset";
    case EnvironmentKind::kAlternatingCenterDecay: return "alternating_center_decay";
    case EnvironmentKind::kRandomWalk: return "random_walk";
    case EnvironmentKind::kStatic: return "static";
    case EnvironmentKind::kCustom: return "custom";
  }
  return "custom";
}

EnvironmentKind environment_kind_from_string(const std::string& s) {
  if (s == "alternating_offset") return EnvironmentKind::kAlternatingOffset;
  if (s == "alternating_center_decay") return EnvironmentKind::kAlternatingCenterDecay;
  if (s == "random_walk") return EnvironmentKind::kRandomWalk;
  if (s == "static") return EnvironmentKind::kStatic;
  if (s == "custom") return EnvironmentKind::kCustom;
  throw Error(ErrorCode::kConfigInvalid, "unknown environment kind '" + s + "'");
}

FunctionSequence::FunctionSequence(std::vector<QuadraticLoss> losses, FeasibleSet feasible_set,
                                   std::optional<Constants> declared)
    : losses_(std::move(losses)), feasible_set_(std::move(feasible_set)) {
  if (losses_.empty()) {
    throw Error(ErrorCode::kInvalidConstants, "function sequence needs at least one round");
  }
  const Eigen::Index n = losses_.front().dimension();
  if (!feasible_set_.is_unconstrained()) {
    require_same_dim(n, feasible_set_.dimension(), "feasible set");
  }
  double mu = losses_.front().spectrum().lambda_min;
  double big_l = losses_.front().spectrum().lambda_max;
  for (const auto& f : losses_) {
    require_same_dim(n, f.dimension(), "sequence loss");
    mu = std::min(mu, f.spectrum().lambda_min);
    big_l = std::max(big_l, f.spectrum().lambda_max);
  }
  constants_ = {mu, big_l, 0.0};
  if (declared) {
    if (!(declared->mu > 0.0) || declared->smoothness < declared->mu) {
      throw Error(ErrorCode::kInvalidConstants, "declared constants need 0 < mu <= L");
    }
    const bool consistent = mu >= declared->mu * (1.0 - 1e-9) &&
                            big_l <= declared->smoothness * (1.0 + 1e-9);
    if (!consistent) {
      throw Error(ErrorCode::kInvalidConstants,
                  "declared (mu, L) do not enclose the sequence spectra");
    }
    constants_ = {declared->mu, declared->smoothness, 0.0};
  }

  minimizers_.reserve(losses_.size());
  for (const auto& f : losses_) {
    if (feasible_set_.is_unconstrained()) {
      minimizers_.push_back(f.center());
    } else {
      // argmin over S of a quadratic is the Q-norm projection of its center
      minimizers_.push_back(project_a_norm(feasible_set_, f.center(), f.curvature()).point);
    }
  }
}

FunctionSequence FunctionSequence::prefix(size_t horizon) const {
  if (horizon == 0 || horizon > losses_.size()) {
    throw Error(ErrorCode::kInvalidConstants, "prefix length out of range");
  }
  std::vector<QuadraticLoss> head(losses_.begin(), losses_.begin() + static_cast<long>(horizon));
  FunctionSequence out(std::move(head), feasible_set_, constants_);
  out.regularity_only_ = regularity_only_;
  out.kind_ = kind_;
  return out;
}

namespace {

Vector anchor_or_zero(const Vector& v, Eigen::Index dim, const char* what) {
  if (v.size() == 0) return Vector::Zero(dim);
  require_same_dim(dim, v.size(), what);
  return v;
}

void require_positive_dims(Eigen::Index dim, size_t horizon, size_t min_horizon) {
  if (dim < 1) throw Error(ErrorCode::kInvalidConstants, "dimension must be >= 1");
  if (horizon < min_horizon) {
    throw Error(ErrorCode::kInvalidConstants,
                "horizon must be >= " + std::to_string(min_horizon));
  }
}

double uniform01(std::mt19937_64& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

}  // namespace

Matrix random_spd(Eigen::Index dim, double mu, double smoothness, std::mt19937_64& rng) {
  if (!(mu > 0.0) || !(smoothness >= mu)) {
    throw Error(ErrorCode::kInvalidConstants, "random_spd needs 0 < mu <= L");
  }
  Vector d(dim);
  for (Eigen::Index i = 0; i < dim; ++i) d(i) = mu + (smoothness - mu) * uniform01(rng);
  if (dim >= 2) {
    d(0) = mu;
    d(dim - 1) = smoothness;
  }
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix g(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) g(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix rot = qr.householderQ();
  // sign fix makes the rotation Haar distributed
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (r(j, j) < 0.0) rot.col(j) *= -1.0;
  }
  Matrix q = rot * d.asDiagonal() * rot.transpose();
  return 0.5 * (q + q.transpose());
}

FunctionSequence gen_alternating_offset(Eigen::Index dim, size_t horizon, const Vector& x_star) {
  require_positive_dims(dim, horizon, 2);
  const Vector center = anchor_or_zero(x_star, dim, "x_star");
  const Matrix q = 2.0 * identity(dim);
  std::vector<QuadraticLoss> losses;
  losses.reserve(horizon);
  for (size_t t = 1; t <= horizon; ++t) {
    losses.emplace_back(q, center, t % 2 == 1 ? 0.0 : 1.0);
  }
  FunctionSequence seq(std::move(losses), FeasibleSet(), FunctionSequence::Constants{2.0, 2.0, 0.0});
  seq.set_kind(EnvironmentKind::kAlternatingOffset);
  return seq;
}

FunctionSequence gen_alternating_center_decay(Eigen::Index dim, size_t horizon, const Vector& y) {
  require_positive_dims(dim, horizon, 2);
  const Vector shift = anchor_or_zero(y, dim, "y");
  const Vector origin = Vector::Zero(dim);
  std::vector<QuadraticLoss> losses;
  losses.reserve(horizon);
  for (size_t t = 1; t <= horizon; ++t) {
    const double scale = 2.0 / static_cast<double>(t);
    losses.emplace_back(scale * identity(dim), t % 2 == 1 ? origin : shift, 0.0);
  }
  FunctionSequence seq(std::move(losses), FeasibleSet());
  seq.set_kind(EnvironmentKind::kAlternatingCenterDecay);
  seq.mark_regularity_comparison_only();
  return seq;
}

FunctionSequence gen_random_walk(Eigen::Index dim, size_t horizon, double mu, double smoothness,
                                 double step_bound, std::uint64_t seed, const Vector& start,
                                 const FeasibleSet& feasible_set) {
  require_positive_dims(dim, horizon, 1);
  if (!(mu > 0.0) || mu > smoothness) {
    throw Error(ErrorCode::kInvalidConstants, "random walk needs 0 < mu <= L");
  }
  if (!(step_bound >= 0.0) || !std::isfinite(step_bound)) {
    throw Error(ErrorCode::kInvalidConstants, "random walk step bound must be >= 0");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector center = anchor_or_zero(start, dim, "walk start");
  std::vector<QuadraticLoss> losses;
  losses.reserve(horizon);
  for (size_t t = 1; t <= horizon; ++t) {
    if (t > 1 && step_bound > 0.0) {
      Vector dir(dim);
      for (Eigen::Index i = 0; i < dim; ++i) dir(i) = normal(rng);
      dir /= dir.norm();
      Vector step = dir * (step_bound * uniform01(rng));
      Vector next = center + step;
      // rounding in the addition may push the realized step past c-bar
      while ((next - center).norm() > step_bound) {
        step *= 1.0 - 1e-12;
        next = center + step;
      }
      center = std::move(next);
    }
    losses.emplace_back(random_spd(dim, mu, smoothness, rng), center, 0.0);
  }
  FunctionSequence seq(std::move(losses), feasible_set,
                       FunctionSequence::Constants{mu, smoothness, 0.0});
  seq.set_kind(EnvironmentKind::kRandomWalk);
  return seq;
}

FunctionSequence gen_static(Eigen::Index dim, size_t horizon, double mu, double smoothness,
                            std::uint64_t seed, const Vector& center,
                            const FeasibleSet& feasible_set) {
  require_positive_dims(dim, horizon, 1);
  std::mt19937_64 rng(seed);
  const Matrix q = random_spd(dim, mu, smoothness, rng);
  const Vector c = anchor_or_zero(center, dim, "static center");
  std::vector<QuadraticLoss> losses(horizon, QuadraticLoss(q, c, 0.0));
  FunctionSequence seq(std::move(losses), feasible_set,
                       FunctionSequence::Constants{mu, smoothness, 0.0});
  seq.set_kind(EnvironmentKind::kStatic);
  return seq;
}

FunctionSequence generate(const EnvironmentSpec& spec) {
  const Vector anchor = spec.anchor.value_or(Vector());
  switch (spec.kind) {
    case EnvironmentKind::kAlternatingOffset:
      return gen_alternating_offset(spec.dimension, spec.horizon, anchor);
    case EnvironmentKind::kAlternatingCenterDecay: {
      // y = 0 would make every loss share a minimizer; default to e_1
      Vector y = anchor;
      if (y.size() == 0 && spec.dimension >= 1) y = Vector::Unit(spec.dimension, 0);
      return gen_alternating_center_decay(spec.dimension, spec.horizon, y);
    }
    case EnvironmentKind::kRandomWalk:
      return gen_random_walk(spec.dimension, spec.horizon, spec.mu, spec.smoothness,
                             spec.step_bound, spec.seed, anchor, spec.feasible_set);
    case EnvironmentKind::kStatic:
      return gen_static(spec.dimension, spec.horizon, spec.mu, spec.smoothness, spec.seed, anchor,
                        spec.feasible_set);
    case EnvironmentKind::kCustom: {
      FunctionSequence seq = load_sequence_json(spec.custom_path);
      if (spec.horizon == 0 || spec.horizon == seq.horizon()) return seq;
      if (seq.horizon() < spec.horizon) {
        throw Error(ErrorCode::kConfigInvalid,
                    "custom sequence has " + std::to_string(seq.horizon()) +
                        " rounds, config asks for " + std::to_string(spec.horizon));
      }
      return seq.prefix(spec.horizon);
    }
  }
  throw Error(ErrorCode::kUnsupportedEnvironment, "unknown environment kind");
}

}  // namespace dynregret
