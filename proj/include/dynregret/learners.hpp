#pragma once

// Step rules for the online learners. Every learner plays x_t, then observes
// f_t through a LossHistory that only exposes rounds 1..t (plus t+1 for the
// oracle predictor), and computes x_{t+1}.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dynregret/linalg.hpp"
#include "dynregret/losses.hpp"
#include "dynregret/projections.hpp"

namespace dynregret {

/// Called on every loss lookup a learner makes: (requested round, revealed round).
using AccessObserver = std::function<void(size_t requested, size_t revealed)>;

/// Read access to the losses revealed so far. Requests past the revealed
/// round throw ProtocolViolation, except round t+1 when oracle lookahead is
/// granted explicitly.
class LossHistory {
 public:
  using Fetch = std::function<const LossFunction&(size_t)>;

  LossHistory(Fetch fetch, size_t horizon, size_t revealed, bool oracle_lookahead,
              const AccessObserver* observer = nullptr);

  /// History over a FunctionSequence.
  static LossHistory over(const FunctionSequence& seq, size_t revealed, bool oracle_lookahead,
                          const AccessObserver* observer = nullptr);

  size_t revealed() const { return revealed_; }
  size_t horizon() const { return horizon_; }
  bool has_next() const { return revealed_ < horizon_; }

  const LossFunction& at(size_t t) const;
  const LossFunction& current() const { return at(revealed_); }

 private:
  Fetch fetch_;
  size_t horizon_;
  size_t revealed_;
  bool oracle_lookahead_;
  const AccessObserver* observer_;
};

struct RoundCost {
  int gradient_queries = 0;   // true gradients of f_t
  int predicted_queries = 0;  // predicted gradients (OON step 6)
};

// ---------------------------------------------------------------- OPGD / OGD

enum class PreconditionerKind { kIdentity, kRegularizedNewton };

/// Produces A_t for a round. The declared bounds must enclose every A_t.
struct Preconditioner {
  PreconditionerKind kind = PreconditionerKind::kIdentity;
  double zeta = 0.0;
  SpdBounds bounds{1.0, 1.0};

  Matrix operator()(const LossFunction& f, const Vector& x) const;
};

Preconditioner identity_preconditioner();
/// A_t = H_t(x_t) + zeta I with bounds (mu + zeta, L + zeta). Throws
/// ZetaTooSmall unless zeta > (L - mu) 4 L^2 / mu^2 - mu.
Preconditioner regularized_newton_schedule(double zeta, double mu, double smoothness);
Matrix regularized_newton_preconditioner(const LossFunction& f, const Vector& x, double zeta,
                                         double mu, double smoothness);
double regularized_newton_zeta_threshold(double mu, double smoothness);

/// eta = lambda' mu / (2 L^2).
double theorem1_step_size(double mu, double smoothness, double lambda_prime);
/// lambda / lambda' < 1 + mu^2 / (4 L^2), strictly.
bool check_theorem1_admissible(const SpdBounds& bounds, double mu, double smoothness);

struct OpgdState {
  Vector x;
  double eta = 0.0;
  Preconditioner preconditioner;
};

/// x <- x - eta A_t^{-1} grad f_t(x).
void opgd_step(OpgdState& state, const LossFunction& f);
/// Unconstrained step followed by the A_t-norm projection onto `set`.
void opgd_constrained_step(OpgdState& state, const LossFunction& f, const FeasibleSet& set);

struct OgdState {
  Vector x;
  double eta = 0.0;
};

/// Plain gradient step x <- x - eta grad f_t(x), optionally projected.
void ogd_step(OgdState& state, const LossFunction& f);

// ---------------------------------------------------------------------- OON

enum class PredictorKind { kStale, kOracle, kCustom };

std::string to_string(PredictorKind kind);

/// Predicted (M_{t+1}, m_{t+1}) evaluated at the query point x_hat_t.
struct Prediction {
  Matrix hessian;
  Vector gradient;
};

class Predictor {
 public:
  using Rule = std::function<Prediction(const Vector& query, const LossHistory& history)>;

  static Predictor stale();
  static Predictor oracle();
  static Predictor custom(Rule rule);

  PredictorKind kind() const { return kind_; }
  bool needs_lookahead() const { return kind_ == PredictorKind::kOracle; }
  Prediction predict(const Vector& query, const LossHistory& history) const;

 private:
  Predictor(PredictorKind kind, Rule rule) : kind_(kind), rule_(std::move(rule)) {}
  PredictorKind kind_;
  Rule rule_;
};

/// One OON round as seen by the bound evaluators.
struct OonRound {
  Vector query;                // x_hat_{t-1}, where f_t's Newton step is taken
  Vector x_hat;                // x_hat_t after the true Newton correction
  Vector newton_direction;     // H_t^{-1}(x_hat_{t-1}) grad f_t(x_hat_{t-1})
  Vector predicted_direction;  // M_t^{-1}(x_hat_{t-1}) m_t(x_hat_{t-1}); zero at t = 1
  Vector predicted_gradient;   // m_t(x_hat_{t-1}); zero at t = 1
};

struct OonTrace {
  PredictorKind predictor = PredictorKind::kStale;
  Vector initial_point;        // x_hat_0 = x_1
  std::vector<OonRound> rounds;
};

struct OonState {
  Vector x;      // played action x_t
  Vector x_hat;  // x_hat_{t-1}
  Predictor predictor = Predictor::stale();
  // prediction computed last round for the current round
  Vector pending_direction;
  Vector pending_gradient;
};

OonState make_oon_state(const Vector& x1, Predictor predictor);

/// Newton correction with the true f_t (step 5), then the optimistic step
/// with the predicted f_{t+1} (step 6, skipped when t = T). Appends to trace.
void oon_step(OonState& state, const LossHistory& history, OonTrace& trace);

// --------------------------------------------------------------------- OMGD

/// Squared-distance contraction factor per inner gradient step:
/// 1 - 2 eta mu L / (mu + L) unconstrained, 1 - 2 mu / (1/eta + mu) projected.
double omgd_contraction(double eta, double mu, double smoothness, bool constrained);

/// K_t = ceil(-2 log t / log rho), clamped to >= 1, with t^2 rho^K_t <= 1.
int omgd_inner_count(size_t t, double eta, double mu, double smoothness, bool constrained);

/// Called after every inner step: (round t, inner index j, z^{(j-1)}, z^{(j)}).
using InnerStepObserver = std::function<void(size_t, int, const Vector&, const Vector&)>;

struct OmgdState {
  Vector x;
  double eta = 0.0;
  double mu = 0.0;
  double smoothness = 0.0;
  FeasibleSet feasible_set;  // unconstrained sentinel selects the unprojected variant
  size_t round = 1;
  InnerStepObserver observer;
};

/// Validates 0 < eta <= 2/(mu+L) (unconstrained) or 0 < eta <= 1/L (constrained).
OmgdState make_omgd_state(const Vector& x1, double eta, double mu, double smoothness,
                          FeasibleSet feasible_set = FeasibleSet());

/// Runs K_t inner gradient steps on f_t from z^{(0)} = x_t. Returns K_t.
int omgd_step(OmgdState& state, const LossFunction& f);

// ----------------------------------------------------------- learner facade

enum class Algorithm { kOpgd, kOgd, kOon, kOmgd };

std::string to_string(Algorithm a);

inline constexpr double kDivergenceNorm = 1e12;

/// Uniform observe-then-step interface. `trajectory()` holds x_1..x_t.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual Algorithm algorithm() const = 0;
  const Vector& action() const { return trajectory_.back(); }
  const std::vector<Vector>& trajectory() const { return trajectory_; }

  /// Observes f_t = history.current() and moves to x_{t+1}.
  RoundCost update(const LossHistory& history);

  virtual bool uses_oracle() const { return false; }
  virtual const OonTrace* oon_trace() const { return nullptr; }

 protected:
  explicit Learner(const Vector& x1) : trajectory_{x1} {}
  virtual RoundCost step(const LossHistory& history, Vector& next) = 0;

 private:
  std::vector<Vector> trajectory_;
};

class OpgdLearner final : public Learner {
 public:
  OpgdLearner(const Vector& x1, double eta, Preconditioner preconditioner,
              FeasibleSet feasible_set = FeasibleSet());
  Algorithm algorithm() const override { return Algorithm::kOpgd; }
  const OpgdState& state() const { return state_; }

 private:
  RoundCost step(const LossHistory& history, Vector& next) override;
  OpgdState state_;
  FeasibleSet feasible_set_;
};

class OgdLearner final : public Learner {
 public:
  OgdLearner(const Vector& x1, double eta, FeasibleSet feasible_set = FeasibleSet());
  Algorithm algorithm() const override { return Algorithm::kOgd; }

 private:
  RoundCost step(const LossHistory& history, Vector& next) override;
  OgdState state_;
  FeasibleSet feasible_set_;
};

class OonLearner final : public Learner {
 public:
  OonLearner(const Vector& x1, Predictor predictor);
  Algorithm algorithm() const override { return Algorithm::kOon; }
  bool uses_oracle() const override { return state_.predictor.needs_lookahead(); }
  const OonTrace* oon_trace() const override { return &trace_; }

 private:
  RoundCost step(const LossHistory& history, Vector& next) override;
  OonState state_;
  OonTrace trace_;
};

class OmgdLearner final : public Learner {
 public:
  OmgdLearner(const Vector& x1, double eta, double mu, double smoothness,
              FeasibleSet feasible_set = FeasibleSet(), InnerStepObserver observer = {});
  Algorithm algorithm() const override { return Algorithm::kOmgd; }
  const OmgdState& state() const { return state_; }

 private:
  RoundCost step(const LossHistory& history, Vector& next) override;
  OmgdState state_;
};

}  // namespace dynregret
