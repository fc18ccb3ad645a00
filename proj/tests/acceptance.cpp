// Acceptance sweep: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>

#include "dynregret/harness.hpp"
#include "dynregret/regularity.hpp"

using namespace dynregret;

namespace {

constexpr Eigen::Index kDim = 5;
constexpr size_t kHorizon = 1000;
constexpr double kMu = 1.0;
constexpr double kL = 4.0;
constexpr double kStep = 0.1;
constexpr int kSeeds = 100;

FunctionSequence walk(std::uint64_t seed, const FeasibleSet& set = FeasibleSet(),
                      const Vector& start = Vector()) {
  return gen_random_walk(kDim, kHorizon, kMu, kL, kStep, seed, start, set);
}

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void fail(const std::string& what) {
    if (ok) detail << what;
    ok = false;
  }
};

int report(int id, const char* name, Outcome& o, double seconds) {
  std::printf("[%s] %d %s (%.2fs)%s%s\n", o.ok ? "PASS" : "FAIL", id, name, seconds,
              o.detail.str().empty() ? "" : ": ", o.detail.str().c_str());
  std::fflush(stdout);
  return o.ok ? 0 : 1;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string describe(const BoundReport& r, std::uint64_t seed) {
  std::ostringstream os;
  os << r.theorem << " seed " << seed << ": ";
  if (!r.admissible) {
    os << "refused (" << r.reason << ")";
  } else {
    os << "measured " << r.measured << " > bound " << *r.bound;
  }
  return os.str();
}

void require_pass(Outcome& o, const BoundReport& r, std::uint64_t seed) {
  if (!r.passed()) o.fail(describe(r, seed));
}

// 1: OGD and regularized-Newton OPGD against the first bound.
int criterion1() {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  const double threshold = regularized_newton_zeta_threshold(kMu, kL);
  const Preconditioner newton = regularized_newton_schedule(1.1 * threshold, kMu, kL);
  double min_slack = INFINITY;
  for (int s = 0; s < kSeeds; ++s) {
    const FunctionSequence seq = walk(s);
    const Vector x1 = Vector::Zero(kDim);

    const double eta_ogd = theorem1_step_size(kMu, kL, 1.0);
    OgdLearner ogd(x1, eta_ogd);
    const BoundReport a = theorem1_bound(seq, run_online(seq, ogd), {eta_ogd, {1.0, 1.0}, std::nullopt});
    require_pass(o, a, s);

    const double eta_newton = theorem1_step_size(kMu, kL, newton.bounds.lambda_min);
    OpgdLearner opgd(x1, eta_newton, newton);
    const BoundReport b =
        theorem1_bound(seq, run_online(seq, opgd), {eta_newton, newton.bounds, newton.zeta});
    require_pass(o, b, s);
    if (a.slack) min_slack = std::min(min_slack, *a.slack);
    if (b.slack) min_slack = std::min(min_slack, *b.slack);
  }
  if (o.ok) o.detail << "200 runs, min slack " << min_slack;
  return report(1, "first bound holds for OGD and regularized-Newton OPGD on 100 random walks", o,
                seconds_since(start));
}

// 2: identity-preconditioned OPGD is OGD.
int criterion2() {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  for (int s = 0; s < 20; ++s) {
    const FunctionSequence seq = gen_random_walk(kDim, 500, kMu, kL, kStep, 1000 + s);
    const double eta = theorem1_step_size(kMu, kL, 1.0);
    OpgdLearner opgd(Vector::Zero(kDim), eta, identity_preconditioner());
    OgdLearner ogd(Vector::Zero(kDim), eta);
    run_online(seq, opgd);
    run_online(seq, ogd);
    for (size_t t = 0; t < opgd.trajectory().size(); ++t) {
      if (opgd.trajectory()[t] != ogd.trajectory()[t]) {
        o.fail("seed " + std::to_string(s) + " differs at round " + std::to_string(t + 1));
        break;
      }
    }
  }
  return report(2, "identity OPGD and OGD trajectories are bit-identical (20 seeds, T=500)", o,
                seconds_since(start));
}

// 3: OON with the oracle and the stale predictor.
int criterion3() {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  double worst_round = 0.0;
  for (int s = 0; s < kSeeds; ++s) {
    const FunctionSequence seq = walk(s);
    OonLearner oracle(Vector::Zero(kDim), Predictor::oracle());
    const RegretLedger ledger = run_online(seq, oracle);
    if (prediction_variation(*oracle.oon_trace()) != 0.0) {
      o.fail("seed " + std::to_string(s) + ": oracle D'_T is not exactly 0");
    }
    for (const auto& r : ledger.rounds()) {
      if (r.t >= 2) worst_round = std::max(worst_round, std::abs(r.regret));
    }
    require_pass(o, theorem2_bound(seq, ledger, *oracle.oon_trace()), s);

    OonLearner stale(Vector::Zero(kDim), Predictor::stale());
    const RegretLedger sl = run_online(seq, stale);
    require_pass(o, corollary3_bound(seq, sl, *stale.oon_trace()), s);
  }
  if (worst_round > 1e-18) {
    std::ostringstream os;
    os << "oracle per-round regret " << worst_round << " exceeds 1e-18";
    o.fail(os.str());
  }
  if (o.ok) o.detail << "max oracle per-round regret from t=2: " << worst_round;
  return report(3, "OON: oracle D'=0, exact rounds and second bound; stale meets composite bound", o,
                seconds_since(start));
}

// Branch 1 should win: fixed curvature with a flat direction along which the
// minimizer jumps, so the path length is large while the values barely move.
FunctionSequence flat_jump_sequence(size_t horizon) {
  Matrix q = Matrix::Zero(2, 2);
  q(0, 0) = 0.01;
  q(1, 1) = 1.0;
  std::vector<QuadraticLoss> losses;
  for (size_t t = 1; t <= horizon; ++t) {
    losses.emplace_back(q, t % 2 == 1 ? Vector(Vector::Zero(2)) : Vector(Vector::Unit(2, 0)));
  }
  return FunctionSequence(std::move(losses), FeasibleSet(),
                          FunctionSequence::Constants{0.01, 1.0, 0.0});
}

// 4: OMGD against the min of both branches, inner counts and branch selection.
int criterion4() {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  const double eta = 2.0 / (kMu + kL);
  const double rho = 1.0 - 2.0 * eta * kMu * kL / (kMu + kL);
  for (int s = 0; s < kSeeds; ++s) {
    const FunctionSequence seq = walk(s);
    OmgdLearner omgd(Vector::Zero(kDim), eta, kMu, kL);
    const RegretLedger ledger = run_online(seq, omgd);
    const BoundReport r = theorem3_bound(seq, ledger, eta);
    require_pass(o, r, s);
    if (r.admissible && *r.bound != std::min(r.branches[0].second, r.branches[1].second)) {
      o.fail("bound is not the min of its branches");
    }
    for (const auto& round : ledger.rounds()) {
      const double t = static_cast<double>(round.t);
      const int k = std::max(1, static_cast<int>(std::ceil(-2.0 * std::log(t) / std::log(rho))));
      // the implementation may add a step when the ceil lands short
      const bool count_ok = round.gradient_queries == k ||
                            (round.gradient_queries == k + 1 && t * t * std::pow(rho, k) > 1.0);
      if (!count_ok) {
        o.fail("seed " + std::to_string(s) + " round " + std::to_string(round.t) + ": " +
               std::to_string(round.gradient_queries) + " inner steps, formula gives " +
               std::to_string(k));
        break;
      }
      if (t * t * std::pow(rho, round.gradient_queries) > 1.0) {
        o.fail("t^2 rho^K > 1 at round " + std::to_string(round.t));
        break;
      }
    }
  }

  // V_T = Theta(T) with zero path length: the path-length branch wins.
  const FunctionSequence offset = gen_alternating_offset(kDim, kHorizon, Vector());
  const double eta_offset = 2.0 / (offset.mu() + offset.smoothness());
  OmgdLearner a(Vector::Ones(kDim), eta_offset, offset.mu(), offset.smoothness());
  const BoundReport ra = theorem3_bound(offset, run_online(offset, a), eta_offset);
  require_pass(o, ra, 0);
  if (!(ra.constants.at("V_T") == kHorizon - 1.0 && ra.constants.at("C2") == 0.0 &&
        ra.branches[1].second < ra.branches[0].second)) {
    o.fail("alternating offset did not select the path-length branch");
  }

  // C2 >> V_T: the variation branch wins.
  const FunctionSequence flat = flat_jump_sequence(kHorizon);
  const double eta_flat = 2.0 / (flat.mu() + flat.smoothness());
  OmgdLearner b(Vector::Unit(2, 0) * 0.5, eta_flat, flat.mu(), flat.smoothness());
  const BoundReport rb = theorem3_bound(flat, run_online(flat, b), eta_flat);
  require_pass(o, rb, 0);
  if (!(rb.constants.at("C2") > 10.0 * rb.constants.at("V_T") &&
        rb.branches[0].second < rb.branches[1].second)) {
    o.fail("flat jump sequence did not select the variation branch");
  }
  if (o.ok) {
    o.detail << "offset: V_T=" << ra.constants.at("V_T") << " picks path_length; flat: V_T="
             << rb.constants.at("V_T") << " C2=" << rb.constants.at("C2") << " picks variation";
  }
  return report(4, "OMGD meets the min-of-branches bound, K_t matches, branches discriminate", o,
                seconds_since(start));
}

// 5: the regularity comparison table.
int criterion5() {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  ExperimentConfig config;
  config.environment.dimension = 2;
  config.sweep_horizons = {10, 100, 500, 1000, 2000, 4000};

  config.environment.kind = EnvironmentKind::kAlternatingOffset;
  for (const auto& row : compare_regularities(config)) {
    if (row.function_variation != static_cast<double>(row.horizon - 1) ||
        row.path_length_2 != 0.0 || row.exactness != Exactness::kExact) {
      o.fail("offset construction at T=" + std::to_string(row.horizon));
    }
  }

  config.environment.kind = EnvironmentKind::kAlternatingCenterDecay;
  const auto rows = compare_regularities(config);
  for (size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].path_length_2 != static_cast<double>(rows[i].horizon - 1)) {
      o.fail("decay construction C2 at T=" + std::to_string(rows[i].horizon));
    }
    if (i + 1 < rows.size() && rows[i].horizon >= 500 && rows[i + 1].horizon == 2 * rows[i].horizon) {
      const double ratio = rows[i + 1].function_variation / rows[i].function_variation;
      o.detail << (o.detail.str().empty() ? "" : ", ") << "V_" << 2 * rows[i].horizon << "/V_"
               << rows[i].horizon << "=" << ratio;
      if (!(ratio < 1.2)) o.fail(" ratio not below 1.2");
    }
  }
  return report(5, "regularity table: offset V_T=T-1, C2=0; decay C2=T-1, V_T sub-linear", o,
                seconds_since(start));
}

// 6: constrained variants.
int criterion6() {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  const FeasibleSet big = FeasibleSet::ball(Vector::Zero(kDim), 100.0);
  const double threshold = regularized_newton_zeta_threshold(kMu, kL);
  const Preconditioner newton = regularized_newton_schedule(1.1 * threshold, kMu, kL);
  const double eta_ogd = theorem1_step_size(kMu, kL, 1.0);
  const double eta_newton = theorem1_step_size(kMu, kL, newton.bounds.lambda_min);
  const double eta_omgd = 1.0 / kL;

  for (int s = 0; s < 20; ++s) {
    const FunctionSequence free_seq = walk(s);
    const FunctionSequence ball_seq = walk(s, big);
    const Vector x1 = Vector::Zero(kDim);
    if (free_seq.minimizers() != ball_seq.minimizers()) o.fail("interior minimizers moved");

    OpgdLearner p_free(x1, eta_newton, newton);
    OpgdLearner p_ball(x1, eta_newton, newton, big);
    OpgdLearner g_free(x1, eta_ogd, identity_preconditioner());
    OpgdLearner g_ball(x1, eta_ogd, identity_preconditioner(), big);
    OmgdLearner m_free(x1, eta_omgd, kMu, kL);
    OmgdLearner m_ball(x1, eta_omgd, kMu, kL, big);
    run_online(free_seq, p_free);
    const RegretLedger lp = run_online(ball_seq, p_ball);
    run_online(free_seq, g_free);
    run_online(ball_seq, g_ball);
    run_online(free_seq, m_free);
    const RegretLedger lm = run_online(ball_seq, m_ball);
    if (p_free.trajectory() != p_ball.trajectory() || g_free.trajectory() != g_ball.trajectory() ||
        m_free.trajectory() != m_ball.trajectory()) {
      o.fail("seed " + std::to_string(s) + ": constrained trajectory differs on interior minimizers");
    }
    const BoundReport r5 = theorem5_bound(ball_seq, lp, {eta_newton, newton.bounds, newton.zeta});
    const BoundReport r6 = theorem6_bound(ball_seq, lm, eta_omgd);
    if (r5.constants.at("minimizer_gradient_sum") != 0.0 ||
        r6.constants.at("minimizer_gradient_sum") != 0.0) {
      o.fail("minimizer gradient sums are not 0 on interior minimizers");
    }
  }

  const FeasibleSet small = FeasibleSet::ball(Vector::Zero(kDim), 0.5);
  const Vector far = Vector::Constant(kDim, 3.0 / std::sqrt(static_cast<double>(kDim)));
  double grad_sum = 0.0;
  for (int s = 0; s < 50; ++s) {
    const FunctionSequence seq = walk(500 + s, small, far);
    const Vector x1 = Vector::Zero(kDim);
    OgdLearner ogd(x1, eta_ogd, small);
    require_pass(o, theorem5_bound(seq, run_online(seq, ogd), {eta_ogd, {1.0, 1.0}, std::nullopt}),
                 500 + s);
    OpgdLearner opgd(x1, eta_newton, newton, small);
    const BoundReport r5 =
        theorem5_bound(seq, run_online(seq, opgd), {eta_newton, newton.bounds, newton.zeta});
    require_pass(o, r5, 500 + s);
    OmgdLearner omgd(x1, eta_omgd, kMu, kL, small);
    require_pass(o, theorem6_bound(seq, run_online(seq, omgd), eta_omgd), 500 + s);
    grad_sum = std::max(grad_sum, r5.constants.at("minimizer_gradient_sum"));
  }
  if (o.ok) o.detail << "boundary runs carry minimizer gradient sums up to " << grad_sum;
  return report(6, "constrained runs: interior bit-identity, boundary bounds on 50 seeds", o,
                seconds_since(start));
}

// 7: A-norm projections.
int criterion7() {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  double worst_vi = -INFINITY;
  double worst_pyth = -INFINITY;
  auto random_vector = [&](Eigen::Index n) {
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = u(rng);
    return v;
  };
  for (int type = 0; type < 2; ++type) {
    for (int trial = 0; trial < 1000; ++trial) {
      const Eigen::Index n = 2 + trial % 5;
      const FeasibleSet set = type == 0
                                  ? FeasibleSet::ball(random_vector(n) * 0.2, 0.5 + 0.001 * trial)
                                  : FeasibleSet::box(-Vector::Ones(n), Vector::Constant(n, 0.5));
      const Matrix a = random_spd(n, 0.1, 10.0, rng);
      const Vector y = random_vector(n);
      const Vector x = project_a_norm(set, y, a).point;
      const Vector z = project_euclidean(set, random_vector(n)).point;
      worst_vi = std::max(worst_vi, (a * (y - x)).dot(z - x));
      // ||y - z||_A^2 >= ||y - x||_A^2 + ||x - z||_A^2
      const double lhs = a_norm(y - z, a);
      const double rhs = a_norm(y - x, a);
      const double mid = a_norm(x - z, a);
      worst_pyth = std::max(worst_pyth, rhs * rhs + mid * mid - lhs * lhs);
      if (!set.contains(x, 1e-12)) o.fail("projection left the set");
    }
  }
  if (worst_vi > 1e-8) o.fail("variational inequality violated");
  if (worst_pyth > 1e-8) o.fail("Pythagorean inequality violated");
  o.detail << (o.ok ? "" : "; ") << "worst VI " << worst_vi << ", worst Pythagorean excess "
           << worst_pyth;
  return report(7, "A-norm projections: variational and Pythagorean inequalities (2x1000)", o,
                seconds_since(start));
}

// 8: finite differences and per-inner-step contraction.
int criterion8() {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  std::mt19937_64 rng(88);
  std::normal_distribution<double> normal;
  double worst_grad = 0.0;
  double worst_hess = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::Index n = 1 + trial % 6;
    Vector c(n), x(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      c(i) = normal(rng);
      x(i) = normal(rng);
    }
    const QuadraticLoss q(random_spd(n, 0.5, 5.0, rng), c, normal(rng));
    const LossFunction& f = q;
    Vector fd_grad(n);
    Matrix fd_hess(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector e1 = Vector::Unit(n, i) * 1e-5;
      fd_grad(i) = (f.value(x + e1) - f.value(x - e1)) / 2e-5;
      const Vector e2 = Vector::Unit(n, i) * 1e-4;
      fd_hess.col(i) = (f.gradient(x + e2) - f.gradient(x - e2)) / 2e-4;
    }
    worst_grad = std::max(worst_grad, (fd_grad - f.gradient(x)).norm() / f.gradient(x).norm());
    worst_hess = std::max(worst_hess, (fd_hess - f.hessian(x)).norm() / f.hessian(x).norm());
  }
  if (worst_grad > 1e-6) o.fail("finite-difference gradient mismatch");
  if (worst_hess > 1e-5) o.fail("finite-difference Hessian mismatch");

  double worst_contraction = -INFINITY;
  long long steps = 0;
  for (int s = 0; s < 10; ++s) {
    const FunctionSequence seq = walk(900 + s);
    for (double eta : {0.1, 0.25, 2.0 / (kMu + kL)}) {
      const double rho = omgd_contraction(eta, kMu, kL, false);
      const InnerStepObserver obs = [&](size_t t, int, const Vector& prev, const Vector& next) {
        const Vector& star = seq.minimizer(t);
        const double excess = (next - star).squaredNorm() - rho * (prev - star).squaredNorm();
        worst_contraction = std::max(worst_contraction, excess);
        ++steps;
      };
      OmgdLearner omgd(Vector::Constant(kDim, 2.0), eta, kMu, kL, FeasibleSet(), obs);
      run_online(seq, omgd);
    }
  }
  if (worst_contraction > 1e-12) o.fail("inner step contraction violated");
  o.detail << (o.ok ? "" : "; ") << "grad rel err " << worst_grad << ", hessian rel err "
           << worst_hess << ", worst contraction excess " << worst_contraction << " over "
           << steps << " inner steps";
  return report(8, "finite differences (1000 pairs) and per-inner-step contraction", o,
                seconds_since(start));
}

}  // namespace

int main() {
  int failed = 0;
  failed += criterion1();
  failed += criterion2();
  failed += criterion3();
  failed += criterion4();
  failed += criterion5();
  failed += criterion6();
  failed += criterion7();
  failed += criterion8();
  std::printf("%d of 8 criteria failed\n", failed);
  return failed == 0 ? 0 : 1;
}
