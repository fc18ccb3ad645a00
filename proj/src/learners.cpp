#include "dynregret/learners.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "dynregret/errors.hpp"

namespace dynregret {

namespace {

void require_positive_constants(double mu, double smoothness) {
  if (!(mu > 0.0) || !(smoothness >= mu) || !std::isfinite(smoothness)) {
    std::ostringstream os;
    os << "need 0 < mu <= L, got mu=" << mu << " L=" << smoothness;
    throw Error(ErrorCode::kInvalidConstants, os.str());
  }
}

void require_step(double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw Error(ErrorCode::kInvalidConstants, "step size must be positive and finite");
  }
}

}  // namespace

// ---------------------------------------------------------------- history

LossHistory::LossHistory(Fetch fetch, size_t horizon, size_t revealed, bool oracle_lookahead,
                         const AccessObserver* observer)
    : fetch_(std::move(fetch)),
      horizon_(horizon),
      revealed_(revealed),
      oracle_lookahead_(oracle_lookahead),
      observer_(observer) {
  if (revealed_ < 1 || revealed_ > horizon_) {
    throw Error(ErrorCode::kProtocolViolation, "revealed round outside [1, T]");
  }
}

LossHistory LossHistory::over(const FunctionSequence& seq, size_t revealed, bool oracle_lookahead,
                              const AccessObserver* observer) {
  return LossHistory([&seq](size_t t) -> const LossFunction& { return seq.at(t); },
                     seq.horizon(), revealed, oracle_lookahead, observer);
}

const LossFunction& LossHistory::at(size_t t) const {
  if (observer_ != nullptr && *observer_) (*observer_)(t, revealed_);
  const bool lookahead = oracle_lookahead_ && t == revealed_ + 1 && t <= horizon_;
  if (t < 1 || (t > revealed_ && !lookahead)) {
    std::ostringstream os;
    os << "requested f_" << t << " after only f_1..f_" << revealed_ << " were revealed";
    throw Error(ErrorCode::kProtocolViolation, os.str());
  }
  return fetch_(t);
}

// ----------------------------------------------------------- preconditioner

Matrix Preconditioner::operator()(const LossFunction& f, const Vector& x) const {
  const auto n = f.dimension();
  if (kind == PreconditionerKind::kIdentity) return identity(n);
  Matrix a = f.hessian(x);
  a.diagonal().array() += zeta;
  return a;
}

Preconditioner identity_preconditioner() { return {}; }

double regularized_newton_zeta_threshold(double mu, double smoothness) {
  require_positive_constants(mu, smoothness);
  return (smoothness - mu) * 4.0 * smoothness * smoothness / (mu * mu) - mu;
}

Preconditioner regularized_newton_schedule(double zeta, double mu, double smoothness) {
  const double threshold = regularized_newton_zeta_threshold(mu, smoothness);
  if (!(zeta > threshold) || !std::isfinite(zeta)) {
    std::ostringstream os;
    os << "zeta=" << zeta << " must exceed " << threshold;
    throw Error(ErrorCode::kZetaTooSmall, os.str());
  }
  Preconditioner p;
  p.kind = PreconditionerKind::kRegularizedNewton;
  p.zeta = zeta;
  p.bounds = {mu + zeta, smoothness + zeta};
  return p;
}

Matrix regularized_newton_preconditioner(const LossFunction& f, const Vector& x, double zeta,
                                         double mu, double smoothness) {
  return regularized_newton_schedule(zeta, mu, smoothness)(f, x);
}

double theorem1_step_size(double mu, double smoothness, double lambda_prime) {
  require_positive_constants(mu, smoothness);
  if (!(lambda_prime > 0.0) || !std::isfinite(lambda_prime)) {
    throw Error(ErrorCode::kInvalidConstants, "lambda' must be positive");
  }
  return lambda_prime * mu / (2.0 * smoothness * smoothness);
}

bool check_theorem1_admissible(const SpdBounds& bounds, double mu, double smoothness) {
  if (!bounds.positive_definite() || !(bounds.lambda_max >= bounds.lambda_min)) return false;
  if (!(mu > 0.0) || !(smoothness >= mu)) return false;
  return bounds.lambda_max / bounds.lambda_min < 1.0 + mu * mu / (4.0 * smoothness * smoothness);
}

// --------------------------------------------------------------- OPGD / OGD

void opgd_step(OpgdState& state, const LossFunction& f) {
  require_same_dim(state.x.size(), f.dimension(), "opgd_step");
  const Vector g = f.gradient(state.x);
  if (state.preconditioner.kind == PreconditionerKind::kIdentity) {
    // A_t = I: the solve is the identity, so skip it and keep the step exactly
    // x - eta * g.
    state.x -= state.eta * g;
    return;
  }
  state.x -= state.eta * spd_solve(state.preconditioner(f, state.x), g);
}

void opgd_constrained_step(OpgdState& state, const LossFunction& f, const FeasibleSet& set) {
  if (set.is_unconstrained()) {
    opgd_step(state, f);
    return;
  }
  const Matrix a = state.preconditioner(f, state.x);
  opgd_step(state, f);
  state.x = project_a_norm(set, state.x, a).point;
}

void ogd_step(OgdState& state, const LossFunction& f) {
  require_same_dim(state.x.size(), f.dimension(), "ogd_step");
  state.x -= state.eta * f.gradient(state.x);
}

// ---------------------------------------------------------------------- OON

std::string to_string(PredictorKind kind) {
  switch (kind) {
    case PredictorKind::kStale: return "stale";
    case PredictorKind::kOracle: return "oracle";
    case PredictorKind::kCustom: return "custom";
  }
  return "unknown";
}

Predictor Predictor::stale() {
  return Predictor(PredictorKind::kStale, [](const Vector& q, const LossHistory& h) {
    const LossFunction& f = h.current();
    return Prediction{f.hessian(q), f.gradient(q)};
  });
}

Predictor Predictor::oracle() {
  return Predictor(PredictorKind::kOracle, [](const Vector& q, const LossHistory& h) {
    const LossFunction& f = h.at(h.revealed() + 1);
    return Prediction{f.hessian(q), f.gradient(q)};
  });
}

Predictor Predictor::custom(Rule rule) {
  if (!rule) throw Error(ErrorCode::kConfigInvalid, "custom predictor needs a rule");
  return Predictor(PredictorKind::kCustom, std::move(rule));
}

Prediction Predictor::predict(const Vector& query, const LossHistory& history) const {
  Prediction p = rule_(query, history);
  require_same_dim(query.size(), p.gradient.size(), "predicted gradient");
  require_same_dim(query.size(), p.hessian.rows(), "predicted hessian");
  return p;
}

OonState make_oon_state(const Vector& x1, Predictor predictor) {
  OonState s;
  s.x = x1;
  s.x_hat = x1;
  s.predictor = std::move(predictor);
  // No data before round 1: (M_1, m_1) = (I, 0), so x_1 = x_hat_0.
  s.pending_direction = Vector::Zero(x1.size());
  s.pending_gradient = Vector::Zero(x1.size());
  return s;
}

void oon_step(OonState& state, const LossHistory& history, OonTrace& trace) {
  const LossFunction& f = history.current();
  require_same_dim(state.x_hat.size(), f.dimension(), "oon_step");

  OonRound round;
  round.query = state.x_hat;
  round.newton_direction = spd_solve(f.hessian(state.x_hat), f.gradient(state.x_hat));
  round.predicted_direction = std::move(state.pending_direction);
  round.predicted_gradient = std::move(state.pending_gradient);
  state.x_hat = state.x_hat - round.newton_direction;
  round.x_hat = state.x_hat;

  if (history.has_next()) {
    Prediction p = state.predictor.predict(state.x_hat, history);
    state.pending_direction = spd_solve(p.hessian, p.gradient);
    state.pending_gradient = std::move(p.gradient);
    state.x = state.x_hat - state.pending_direction;
  } else {
    state.pending_direction = Vector::Zero(state.x_hat.size());
    state.pending_gradient = Vector::Zero(state.x_hat.size());
    state.x = state.x_hat;
  }
  trace.rounds.push_back(std::move(round));
}

// --------------------------------------------------------------------- OMGD

double omgd_contraction(double eta, double mu, double smoothness, bool constrained) {
  require_positive_constants(mu, smoothness);
  require_step(eta);
  double rho = constrained ? 1.0 - 2.0 * mu / (1.0 / eta + mu)
                           : 1.0 - 2.0 * eta * mu * smoothness / (mu + smoothness);
  // mu = L with eta = 2/(mu+L) gives an exact step; keep rounding from pushing it negative
  if (rho < 0.0 && rho > -1e-12) rho = 0.0;
  if (!(rho >= 0.0 && rho < 1.0)) {
    std::ostringstream os;
    os << "contraction factor " << rho << " outside [0, 1)";
    throw Error(ErrorCode::kInvalidConstants, os.str());
  }
  return rho;
}

int omgd_inner_count(size_t t, double eta, double mu, double smoothness, bool constrained) {
  if (t < 1) throw Error(ErrorCode::kInvalidConstants, "round index starts at 1");
  const double rho = omgd_contraction(eta, mu, smoothness, constrained);
  if (rho == 0.0) return 1;
  const double td = static_cast<double>(t);
  int k = static_cast<int>(std::ceil(-2.0 * std::log(td) / std::log(rho)));
  k = std::max(k, 1);
  // ceil of a rounded quotient can land one short of the guarantee
  while (td * td * std::pow(rho, k) > 1.0) ++k;
  return k;
}

OmgdState make_omgd_state(const Vector& x1, double eta, double mu, double smoothness,
                          FeasibleSet feasible_set) {
  const bool constrained = !feasible_set.is_unconstrained();
  require_positive_constants(mu, smoothness);
  require_step(eta);
  const double limit = constrained ? 1.0 / smoothness : 2.0 / (mu + smoothness);
  if (eta > limit) {
    std::ostringstream os;
    os << "eta=" << eta << " exceeds " << (constrained ? "1/L" : "2/(mu+L)") << "=" << limit;
    throw Error(ErrorCode::kInvalidConstants, os.str());
  }
  omgd_contraction(eta, mu, smoothness, constrained);
  OmgdState s;
  s.x = x1;
  s.eta = eta;
  s.mu = mu;
  s.smoothness = smoothness;
  s.feasible_set = std::move(feasible_set);
  return s;
}

int omgd_step(OmgdState& state, const LossFunction& f) {
  require_same_dim(state.x.size(), f.dimension(), "omgd_step");
  const bool constrained = !state.feasible_set.is_unconstrained();
  const int k = omgd_inner_count(state.round, state.eta, state.mu, state.smoothness, constrained);
  Vector z = state.x;
  for (int j = 1; j <= k; ++j) {
    Vector next = z - state.eta * f.gradient(z);
    if (constrained) next = project_euclidean(state.feasible_set, next).point;
    if (state.observer) state.observer(state.round, j, z, next);
    z = std::move(next);
  }
  state.x = std::move(z);
  ++state.round;
  return k;
}

// ----------------------------------------------------------- learner facade

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kOpgd: return "opgd";
    case Algorithm::kOgd: return "ogd";
    case Algorithm::kOon: return "oon";
    case Algorithm::kOmgd: return "omgd";
  }
  return "unknown";
}

RoundCost Learner::update(const LossHistory& history) {
  if (history.revealed() != trajectory_.size()) {
    throw Error(ErrorCode::kProtocolViolation, "learner updated out of round order");
  }
  Vector next;
  const RoundCost cost = step(history, next);
  const double norm = next.norm();
  if (!std::isfinite(norm) || norm > kDivergenceNorm) {
    std::ostringstream os;
    os << to_string(algorithm()) << " iterate norm " << norm << " at round "
       << history.revealed() + 1;
    throw Error(ErrorCode::kDiverged, os.str());
  }
  trajectory_.push_back(std::move(next));
  return cost;
}

OpgdLearner::OpgdLearner(const Vector& x1, double eta, Preconditioner preconditioner,
                         FeasibleSet feasible_set)
    : Learner(x1), state_{x1, eta, std::move(preconditioner)}, feasible_set_(std::move(feasible_set)) {
  require_step(eta);
}

RoundCost OpgdLearner::step(const LossHistory& history, Vector& next) {
  opgd_constrained_step(state_, history.current(), feasible_set_);
  next = state_.x;
  return {1, 0};
}

OgdLearner::OgdLearner(const Vector& x1, double eta, FeasibleSet feasible_set)
    : Learner(x1), state_{x1, eta}, feasible_set_(std::move(feasible_set)) {
  require_step(eta);
}

RoundCost OgdLearner::step(const LossHistory& history, Vector& next) {
  ogd_step(state_, history.current());
  if (!feasible_set_.is_unconstrained()) {
    state_.x = project_euclidean(feasible_set_, state_.x).point;
  }
  next = state_.x;
  return {1, 0};
}

OonLearner::OonLearner(const Vector& x1, Predictor predictor)
    : Learner(x1), state_(make_oon_state(x1, std::move(predictor))) {
  trace_.predictor = state_.predictor.kind();
  trace_.initial_point = x1;
}

RoundCost OonLearner::step(const LossHistory& history, Vector& next) {
  oon_step(state_, history, trace_);
  next = state_.x;
  return {1, history.has_next() ? 1 : 0};
}

OmgdLearner::OmgdLearner(const Vector& x1, double eta, double mu, double smoothness,
                         FeasibleSet feasible_set, InnerStepObserver observer)
    : Learner(x1), state_(make_omgd_state(x1, eta, mu, smoothness, std::move(feasible_set))) {
  state_.observer = std::move(observer);
}

RoundCost OmgdLearner::step(const LossHistory& history, Vector& next) {
  const int k = omgd_step(state_, history.current());
  next = state_.x;
  return {k, 0};
}

}  // namespace dynregret
