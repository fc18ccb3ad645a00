#include "dynregret/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dynregret/errors.hpp"

namespace dynregret {

namespace {

constexpr double kRegretFloor = -1e-12;
constexpr double kEtaMatchTolerance = 1e-12;

void refuse(const std::string& why) { throw Error(ErrorCode::kNotAdmissible, why); }

void require_theory_sequence(const FunctionSequence& seq) {
  if (seq.regularity_comparison_only()) {
    refuse("sequence has decaying strong convexity and is for regularity comparison only");
  }
}

void require_ledger(const FunctionSequence& seq, const RegretLedger& ledger) {
  if (ledger.horizon() == 0) refuse("empty ledger");
  if (ledger.horizon() > seq.horizon()) {
    throw Error(ErrorCode::kDimensionMismatch, "ledger is longer than the sequence");
  }
}

std::vector<Vector> played_minimizers(const FunctionSequence& seq, size_t horizon) {
  return {seq.minimizers().begin(), seq.minimizers().begin() + static_cast<long>(horizon)};
}

// sum_{t=from}^{to} ||grad f_t(x*_t)||, 1-based and inclusive
double minimizer_gradient_sum(const FunctionSequence& seq, size_t from, size_t to) {
  double s = 0.0;
  for (size_t t = from; t <= to; ++t) s += seq.at(t).gradient(seq.minimizer(t)).norm();
  return s;
}

BoundReport finish(BoundReport r, double bound) {
  r.admissible = true;
  r.bound = bound;
  r.slack = bound - r.measured;
  return r;
}

// Right-hand side shared by theorem1_bound and theorem5_bound.
BoundReport opgd_report(const char* id, const FunctionSequence& seq, const RegretLedger& ledger,
                        const OpgdSettings& settings, double& bound) {
  require_theory_sequence(seq);
  require_ledger(seq, ledger);
  const double mu = seq.mu();
  const double ell = seq.smoothness();
  const double lam = settings.bounds.lambda_max;
  const double lamp = settings.bounds.lambda_min;
  if (!check_theorem1_admissible(settings.bounds, mu, ell)) {
    std::ostringstream os;
    os << "lambda/lambda' = " << lam / lamp << " is not below 1 + mu^2/(4L^2) = "
       << 1.0 + mu * mu / (4.0 * ell * ell);
    refuse(os.str());
  }
  const double eta = theorem1_step_size(mu, ell, lamp);
  if (std::abs(settings.eta - eta) > kEtaMatchTolerance * eta) {
    std::ostringstream os;
    os << "eta=" << settings.eta << " differs from lambda' mu/(2L^2)=" << eta;
    refuse(os.str());
  }

  const size_t horizon = ledger.horizon();
  // x*_{T+1} := x*_T, so the sum over t = 2..T+1 equals C*_{2,T}.
  const double c2 = path_length_p(played_minimizers(seq, horizon), 2.0);
  const double l2 = ell * ell;
  const double coef = (l2 / mu) * (4.0 * l2 * lam - mu * mu * lamp) /
                      (mu * mu * lamp - 4.0 * l2 * lam + 4.0 * l2 * lamp);
  const double init = (l2 * lam / (lamp * mu) - mu / 4.0) *
                      (ledger.rounds().front().action - seq.minimizer(1)).squaredNorm();
  bound = coef * c2 + init;

  BoundReport r;
  r.theorem = id;
  r.measured = ledger.cumulative_regret();
  r.constants = {{"eta", settings.eta},
                 {"lambda", lam},
                 {"lambda_prime", lamp},
                 {"c", mu * mu / (4.0 * l2) - lam / lamp + 1.0},
                 {"mu", mu},
                 {"L", ell},
                 {"path_coefficient", coef}};
  if (settings.zeta) r.constants["zeta"] = *settings.zeta;
  return r;
}

struct OonTerms {
  double initial_gap = 0.0;     // ||x_hat_1 - x*_1||^2
  double final_gap = 0.0;       // ||x_hat_T - x*_T||^2
  double first_newton = 0.0;    // ||H_1^{-1}(x_hat_0) grad f_1(x_hat_0)||^2
  double c2 = 0.0;
  double c4 = 0.0;
};

OonTerms oon_terms(const FunctionSequence& seq, const RegretLedger& ledger, const OonTrace& trace) {
  require_theory_sequence(seq);
  require_ledger(seq, ledger);
  if (!seq.feasible_set().is_unconstrained()) refuse("OON bounds apply to unconstrained runs");
  const size_t horizon = ledger.horizon();
  if (trace.rounds.size() < horizon) {
    throw Error(ErrorCode::kDimensionMismatch, "OON trace shorter than the ledger");
  }
  const double mu = seq.mu();
  const double lh = seq.hessian_lipschitz();
  const auto minimizers = played_minimizers(seq, horizon);
  if (lh > 0.0) {
    // locality conditions; vacuous for quadratics
    if ((trace.initial_point - seq.minimizer(1)).norm() > mu / lh) {
      refuse("initial point outside the mu/L_H neighbourhood of x*_1");
    }
    double cbar = 0.0;
    for (size_t t = 1; t < minimizers.size(); ++t) {
      cbar = std::max(cbar, (minimizers[t] - minimizers[t - 1]).norm());
    }
    if (cbar > mu / (2.0 * lh)) refuse("minimizer steps exceed mu/(2 L_H)");
  }
  OonTerms o;
  o.initial_gap = (trace.rounds.front().x_hat - seq.minimizer(1)).squaredNorm();
  o.final_gap = (trace.rounds[horizon - 1].x_hat - seq.minimizer(horizon)).squaredNorm();
  o.first_newton = trace.rounds.front().newton_direction.squaredNorm();
  o.c2 = path_length_p(minimizers, 2.0);
  o.c4 = path_length_p(minimizers, 4.0);
  return o;
}

double trace_prediction_variation(const OonTrace& trace, size_t horizon) {
  double s = 0.0;
  for (size_t t = 2; t <= horizon; ++t) {
    const OonRound& r = trace.rounds[t - 1];
    s += (r.predicted_direction - r.newton_direction).squaredNorm();
  }
  return s;
}

struct ValueGapTerms {
  double gap1 = 0.0;    // f_1(x_1) - f_1(x*_1)
  double dist1 = 0.0;   // ||x_1 - x*_1||^2
  double c2 = 0.0;
  Variation v;
};

ValueGapTerms omgd_terms(const FunctionSequence& seq, const RegretLedger& ledger) {
  ValueGapTerms g;
  const LedgerRound& first = ledger.rounds().front();
  g.gap1 = first.regret;
  g.dist1 = (first.action - first.minimizer).squaredNorm();
  g.c2 = path_length_p(played_minimizers(seq, ledger.horizon()), 2.0);
  std::vector<Vector> hull = ledger.actions();
  const auto mins = played_minimizers(seq, ledger.horizon());
  hull.insert(hull.end(), mins.begin(), mins.end());
  g.v = function_variation(seq.prefix(ledger.horizon()), hull);
  return g;
}

void require_omgd_eta(const FunctionSequence& seq, double eta, bool constrained) {
  const double limit = constrained ? 1.0 / seq.smoothness() : 2.0 / (seq.mu() + seq.smoothness());
  if (!(eta > 0.0) || eta > limit) {
    std::ostringstream os;
    os << "eta=" << eta << " outside (0, " << limit << "]";
    throw Error(ErrorCode::kInvalidConstants, os.str());
  }
}

}  // namespace

// ------------------------------------------------------------------ ledger

void RegretLedger::record(const FunctionSequence& seq, size_t t, const Vector& action,
                          RoundCost cost) {
  if (t != rounds_.size() + 1) {
    throw Error(ErrorCode::kInvariantViolated, "ledger rounds must be recorded in order");
  }
  const QuadraticLoss& f = seq.at(t);
  LedgerRound r;
  r.t = t;
  r.action = action;
  r.minimizer = seq.minimizer(t);
  r.loss = f.value(action);
  r.best_loss = f.value(r.minimizer);
  // f(x) - f(y) = 1/2 (x - y)^T Q (x + y - 2c): no cancellation against the offset
  const Vector diff = action - r.minimizer;
  const Vector sum = action + r.minimizer - 2.0 * f.center();
  r.regret = 0.5 * diff.dot(f.curvature() * sum);
  if (!std::isfinite(r.regret)) throw Error(ErrorCode::kNonFinite, "per-round regret");
  if (r.regret < kRegretFloor) {
    std::ostringstream os;
    os << "negative per-round regret " << r.regret << " at t=" << t;
    throw Error(ErrorCode::kInvariantViolated, os.str());
  }
  r.cumulative = cumulative_regret() + r.regret;
  r.step_norm = t == 1 ? 0.0 : (r.minimizer - seq.minimizer(t - 1)).norm();
  r.gradient_queries = cost.gradient_queries;
  r.predicted_queries = cost.predicted_queries;
  rounds_.push_back(std::move(r));
}

long long RegretLedger::total_gradient_queries() const {
  long long n = 0;
  for (const auto& r : rounds_) n += r.gradient_queries + r.predicted_queries;
  return n;
}

std::vector<Vector> RegretLedger::actions() const {
  std::vector<Vector> out;
  out.reserve(rounds_.size());
  for (const auto& r : rounds_) out.push_back(r.action);
  return out;
}

RegretLedger run_online(const FunctionSequence& seq, Learner& learner,
                        const AccessObserver* observer) {
  RegretLedger ledger;
  for (size_t t = 1; t <= seq.horizon(); ++t) {
    const Vector played = learner.action();
    const auto history = LossHistory::over(seq, t, learner.uses_oracle(), observer);
    const RoundCost cost = learner.update(history);
    ledger.record(seq, t, played, cost);
  }
  return ledger;
}

// --------------------------------------------------------------- measures

double path_length_p(const std::vector<Vector>& minimizers, double p) {
  if (!(p >= 1.0)) throw Error(ErrorCode::kInvalidConstants, "path length order must be >= 1");
  double s = 0.0;
  for (size_t t = 1; t < minimizers.size(); ++t) {
    const double step = (minimizers[t] - minimizers[t - 1]).norm();
    s += p == 2.0 ? step * step : p == 4.0 ? (step * step) * (step * step) : std::pow(step, p);
  }
  return s;
}

std::string to_string(Exactness e) {
  return e == Exactness::kExact ? "exact" : "lower_bound";
}

Variation function_variation(const FunctionSequence& seq, const std::vector<Vector>& hull_points) {
  if (hull_points.empty()) throw Error(ErrorCode::kEmptyHull, "function variation needs points");
  const Eigen::Index n = seq.dimension();
  const auto m = static_cast<Eigen::Index>(hull_points.size());
  Matrix pts(m, n);
  for (Eigen::Index i = 0; i < m; ++i) {
    require_same_dim(n, hull_points[i].size(), "hull point");
    pts.row(i) = hull_points[i].transpose();
  }
  const Vector lo = pts.colwise().minCoeff().transpose();
  const Vector hi = pts.colwise().maxCoeff().transpose();

  // A hull with at most two distinct points is a segment, where the sup of a
  // quadratic is exact: endpoints plus the interior stationary point.
  std::vector<Vector> distinct;
  for (const auto& p : hull_points) {
    if (std::find(distinct.begin(), distinct.end(), p) == distinct.end()) distinct.push_back(p);
    if (distinct.size() > 2) break;
  }
  const bool segment = distinct.size() <= 2;
  const Vector seg_dir = distinct.size() == 2 ? Vector(distinct[1] - distinct[0]) : Vector::Zero(n);

  Variation v;
  for (size_t t = 2; t <= seq.horizon(); ++t) {
    const QuadraticLoss& cur = seq.at(t);
    const QuadraticLoss& prev = seq.at(t - 1);
    // g(x) = 1/2 x^T dQ x - b^T x + k
    const Matrix dq = cur.curvature() - prev.curvature();
    const Vector qc_cur = cur.curvature() * cur.center();
    const Vector qc_prev = prev.curvature() * prev.center();
    const Vector b = qc_cur - qc_prev;
    const double k = 0.5 * cur.center().dot(qc_cur) - 0.5 * prev.center().dot(qc_prev) +
                     cur.offset() - prev.offset();
    const bool affine = (dq.array() == 0.0).all();

    Vector vals = -(pts * b);
    if (!affine) vals += 0.5 * ((pts * dq).cwiseProduct(pts)).rowwise().sum();
    vals.array() += k;
    double sup = vals.cwiseAbs().maxCoeff();

    if (!affine && segment) {
      // g(p0 + s d) = a s^2 + beta s + g(p0)
      const Vector& p0 = distinct[0];
      const double a = 0.5 * seg_dir.dot(dq * seg_dir);
      const double beta = p0.dot(dq * seg_dir) - b.dot(seg_dir);
      if (a != 0.0) {
        const double s = -beta / (2.0 * a);
        if (s > 0.0 && s < 1.0) {
          const Vector x = p0 + s * seg_dir;
          sup = std::max(sup, std::abs(0.5 * x.dot(dq * x) - b.dot(x) + k));
        }
      }
    } else if (!affine) {
      v.exactness = Exactness::kLowerBound;
      const auto lu = dq.fullPivLu();
      if (lu.isInvertible()) {
        const Vector s = lu.solve(b);
        if ((s.array() >= lo.array()).all() && (s.array() <= hi.array()).all()) {
          sup = std::max(sup, std::abs(0.5 * s.dot(dq * s) - b.dot(s) + k));
        }
      }
    }
    v.value += sup;
  }
  return v;
}

double prediction_variation(const OonTrace& trace) {
  return trace_prediction_variation(trace, trace.rounds.size());
}

double gradient_prediction_variation(const FunctionSequence& seq, const OonTrace& trace) {
  double s = 0.0;
  for (size_t t = 2; t <= trace.rounds.size(); ++t) {
    const OonRound& r = trace.rounds[t - 1];
    s += (seq.at(t).gradient(r.query) - r.predicted_gradient).squaredNorm();
  }
  return s;
}

RegularityReport compute_regularity(const FunctionSequence& seq, const RegretLedger& ledger,
                                    const OonTrace* trace) {
  RegularityReport r;
  const auto mins = played_minimizers(seq, ledger.horizon());
  r.path_length_1 = path_length_p(mins, 1.0);
  r.path_length_2 = path_length_p(mins, 2.0);
  r.path_length_4 = path_length_p(mins, 4.0);
  for (const auto& round : ledger.rounds()) r.max_step = std::max(r.max_step, round.step_norm);
  if (ledger.horizon() > 0) {
    std::vector<Vector> hull = ledger.actions();
    hull.insert(hull.end(), mins.begin(), mins.end());
    r.function_variation = function_variation(seq.prefix(ledger.horizon()), hull);
  }
  if (trace != nullptr) {
    r.prediction_variation = trace_prediction_variation(*trace, ledger.horizon());
    r.gradient_prediction_variation = gradient_prediction_variation(seq, *trace);
  }
  return r;
}

// ------------------------------------------------------------------ bounds

bool BoundReport::passed() const {
  if (!admissible || !bound) return false;
  return measured <= *bound + kBoundRelativeTolerance * (1.0 + std::abs(*bound));
}

BoundReport not_admissible(std::string theorem, double measured, std::string reason) {
  BoundReport r;
  r.theorem = std::move(theorem);
  r.admissible = false;
  r.reason = std::move(reason);
  r.measured = measured;
  return r;
}

BoundReport theorem1_bound(const FunctionSequence& seq, const RegretLedger& ledger,
                           const OpgdSettings& settings) {
  if (!seq.feasible_set().is_unconstrained()) {
    refuse("theorem1 applies to unconstrained runs; use theorem5");
  }
  double bound = 0.0;
  BoundReport r = opgd_report("theorem1", seq, ledger, settings, bound);
  return finish(std::move(r), bound);
}

BoundReport theorem5_bound(const FunctionSequence& seq, const RegretLedger& ledger,
                           const OpgdSettings& settings) {
  if (seq.feasible_set().is_unconstrained()) refuse("theorem5 applies to constrained runs");
  double bound = 0.0;
  BoundReport r = opgd_report("theorem5", seq, ledger, settings, bound);
  const double diameter = seq.feasible_set().diameter();
  const double grad_sum = minimizer_gradient_sum(seq, 1, ledger.horizon());
  const double extra = seq.mu() * diameter / (2.0 * seq.smoothness()) * grad_sum;
  r.constants["D"] = diameter;
  r.constants["minimizer_gradient_sum"] = grad_sum;
  return finish(std::move(r), bound + extra);
}

std::pair<double, double> theorem2_rhos(double c1, double c2, double mu, double hessian_lipschitz) {
  if (!(c1 > 0.0) || !(c2 > 0.0)) {
    throw Error(ErrorCode::kRhoOutOfRange, "c1 and c2 must be positive");
  }
  const double rho1 = (1.0 + c1) * (1.0 + c1) * (1.0 + c2) / 16.0;
  if (!(rho1 > 0.0 && rho1 < 1.0)) {
    std::ostringstream os;
    os << "rho'=" << rho1 << " for c1=" << c1 << " c2=" << c2;
    throw Error(ErrorCode::kRhoOutOfRange, os.str());
  }
  const double h = hessian_lipschitz / (2.0 * mu);
  const double rho2 = h * h * (1.0 + 1.0 / c1) * (1.0 + 1.0 / c1) * (1.0 + 1.0 / c2);
  return {rho1, rho2};
}

BoundReport theorem2_bound(const FunctionSequence& seq, const RegretLedger& ledger,
                           const OonTrace& trace, double c1, double c2) {
  const OonTerms o = oon_terms(seq, ledger, trace);
  const auto [rho1, rho2] = theorem2_rhos(c1, c2, seq.mu(), seq.hessian_lipschitz());
  const double ell = seq.smoothness();
  const double dprime = trace_prediction_variation(trace, ledger.horizon());
  const double bound = ell * ((o.initial_gap - rho1 * o.final_gap) / (1.0 - rho1) +
                              rho2 / (1.0 - rho1) * o.c4) +
                       ell * dprime + ell * o.first_newton;
  BoundReport r;
  r.theorem = "theorem2";
  r.measured = ledger.cumulative_regret();
  r.constants = {{"c1", c1},           {"c2", c2},       {"rho_prime", rho1},
                 {"rho_double_prime", rho2}, {"L", ell}, {"D_prime", dprime},
                 {"oracle", trace.predictor == PredictorKind::kOracle ? 1.0 : 0.0}};
  return finish(std::move(r), bound);
}

BoundReport theorem2_tightest(const FunctionSequence& seq, const RegretLedger& ledger,
                              const OonTrace& trace) {
  static constexpr double kGrid[] = {0.05, 0.1, 0.2, 0.5, 1.0};
  std::optional<BoundReport> best;
  for (double c1 : kGrid) {
    for (double c2 : kGrid) {
      if ((1.0 + c1) * (1.0 + c1) * (1.0 + c2) / 16.0 >= 1.0) continue;
      BoundReport r = theorem2_bound(seq, ledger, trace, c1, c2);
      if (!best || *r.bound < *best->bound) best = std::move(r);
    }
  }
  return *best;
}

BoundReport corollary3_bound(const FunctionSequence& seq, const RegretLedger& ledger,
                             const OonTrace& trace, double c1, double c2) {
  if (trace.predictor != PredictorKind::kStale) refuse("corollary3 needs the stale predictor");
  const OonTerms o = oon_terms(seq, ledger, trace);
  const auto [rho1, rho2] = theorem2_rhos(c1, c2, seq.mu(), seq.hessian_lipschitz());
  const double mu = seq.mu();
  const double ell = seq.smoothness();
  const double mu2 = mu * mu;
  const double bound =
      (6.0 * ell * ell * ell + mu2 * ell) / mu2 *
          (o.initial_gap / (1.0 - rho1) + rho2 / (1.0 - rho1) * o.c4) +
      ell * o.first_newton + 4.0 * ell * ell * ell / mu2 * o.c2;
  BoundReport r;
  r.theorem = "corollary3";
  r.measured = ledger.cumulative_regret();
  r.constants = {{"c1", c1}, {"c2", c2}, {"rho_prime", rho1}, {"rho_double_prime", rho2},
                 {"mu", mu}, {"L", ell}};
  return finish(std::move(r), bound);
}

BoundReport theorem3_bound(const FunctionSequence& seq, const RegretLedger& ledger, double eta) {
  require_theory_sequence(seq);
  require_ledger(seq, ledger);
  if (!seq.feasible_set().is_unconstrained()) {
    refuse("theorem3 applies to unconstrained runs; use theorem6");
  }
  require_omgd_eta(seq, eta, false);
  const ValueGapTerms g = omgd_terms(seq, ledger);
  double dmax = 0.0;
  for (const auto& r : ledger.rounds()) dmax = std::max(dmax, (r.action - r.minimizer).norm());
  const double ell = seq.smoothness();
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double b1 = g.gap1 + 2.0 * g.v.value + pi2 * dmax * dmax * ell / 12.0;
  const double b2 = ell / 2.0 * (g.dist1 + 2.0 * dmax * dmax * (pi2 / 6.0) + 2.0 * g.c2);

  BoundReport r;
  r.theorem = "theorem3";
  r.measured = ledger.cumulative_regret();
  r.constants = {{"eta", eta}, {"D", dmax}, {"V_T", g.v.value}, {"C2", g.c2}, {"L", ell}};
  r.branches = {{"variation", b1}, {"path_length", b2}};
  r.variation_exactness = g.v.exactness;
  return finish(std::move(r), std::min(b1, b2));
}

BoundReport theorem6_bound(const FunctionSequence& seq, const RegretLedger& ledger, double eta) {
  require_theory_sequence(seq);
  require_ledger(seq, ledger);
  if (seq.feasible_set().is_unconstrained()) refuse("theorem6 applies to constrained runs");
  require_omgd_eta(seq, eta, true);
  const ValueGapTerms g = omgd_terms(seq, ledger);
  const size_t horizon = ledger.horizon();
  const double diameter = seq.feasible_set().diameter();
  const double ell = seq.smoothness();
  const double pi2 = std::numbers::pi * std::numbers::pi;
  const double grad_prev = horizon >= 2 ? minimizer_gradient_sum(seq, 1, horizon - 1) : 0.0;
  const double grad_all = minimizer_gradient_sum(seq, 1, horizon);
  const double b1 = g.gap1 + 2.0 * g.v.value + pi2 * diameter * diameter * ell / 12.0 +
                    diameter * grad_prev;
  const double b2 =
      ell / 2.0 * (g.dist1 + 2.0 * diameter * diameter * (pi2 / 6.0) + 2.0 * g.c2) +
      diameter * grad_all;

  BoundReport r;
  r.theorem = "theorem6";
  r.measured = ledger.cumulative_regret();
  r.constants = {{"eta", eta},           {"D", diameter}, {"V_T", g.v.value},
                 {"C2", g.c2},           {"L", ell},      {"minimizer_gradient_sum", grad_all}};
  r.branches = {{"variation", b1}, {"path_length", b2}};
  r.variation_exactness = g.v.exactness;
  return finish(std::move(r), std::min(b1, b2));
}

}  // namespace dynregret
