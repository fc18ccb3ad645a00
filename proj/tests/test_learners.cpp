#include <doctest.h>

#include <cmath>

#include "dynregret/errors.hpp"
#include "dynregret/learners.hpp"
#include "dynregret/regularity.hpp"

using namespace dynregret;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode{0};
}

// The four-round sequence also used by the numpy reference below.
FunctionSequence small_sequence() {
  Matrix q1(2, 2), q2(2, 2), q3(2, 2), q4(2, 2);
  q1 << 2, 0.5, 0.5, 1;
  q2 << 1.5, 0, 0, 1;
  q3 << 2, -0.3, -0.3, 1.2;
  q4 << 1, 0, 0, 2;
  std::vector<QuadraticLoss> losses{{q1, vec({1, 0})},
                                    {q2, vec({1.2, 0.1})},
                                    {q3, vec({0.9, 0.3})},
                                    {q4, vec({1, 0.25})}};
  return FunctionSequence(std::move(losses), FeasibleSet());
}

}  // namespace

TEST_CASE("opgd_step examples") {
  const QuadraticLoss f(identity(2), Vector::Zero(2));
  OpgdState s{vec({2, 2}), 1.0, identity_preconditioner()};
  opgd_step(s, f);
  CHECK(s.x == vec({0, 0}));
  opgd_step(s, f);
  CHECK(s.x == vec({0, 0}));

  // A_t = Q, eta = 1 lands on the center
  Matrix q(2, 2);
  q << 3, 1, 1, 2;
  const QuadraticLoss g(q, vec({0.5, -1}));
  Preconditioner newton = regularized_newton_schedule(0.0, 1.0, 1.0);  // threshold -1 at mu = L
  newton.zeta = 0.0;
  OpgdState t{vec({4, 4}), 1.0, newton};
  opgd_step(t, g);
  CHECK((t.x - vec({0.5, -1})).norm() < 1e-14);
}

TEST_CASE("theorem1 step size and admissibility") {
  CHECK(theorem1_step_size(2, 2, 1) == 0.25);
  CHECK(theorem1_step_size(1, 1, 1) == 0.5);
  CHECK(theorem1_step_size(1, 3, 2) == 2 * theorem1_step_size(1, 3, 1));
  CHECK(code_of([] { theorem1_step_size(2, 1, 1); }) == ErrorCode::kInvalidConstants);

  CHECK(check_theorem1_admissible({1, 1}, 0.1, 10));
  CHECK(check_theorem1_admissible({1, 1.2}, 2, 2));
  CHECK_FALSE(check_theorem1_admissible({1, 1.01}, 0.1, 1));
  CHECK_FALSE(check_theorem1_admissible({1, 1.25}, 2, 2));  // strict
}

TEST_CASE("regularized Newton threshold") {
  CHECK(regularized_newton_zeta_threshold(1, 2) == 15.0);
  CHECK(regularized_newton_zeta_threshold(3, 3) == -3.0);
  CHECK(code_of([] { regularized_newton_schedule(15.0, 1, 2); }) == ErrorCode::kZetaTooSmall);
  const Preconditioner p = regularized_newton_schedule(15.5, 1, 2);
  CHECK(p.bounds.lambda_min == 16.5);
  CHECK(p.bounds.lambda_max == 17.5);
  CHECK(check_theorem1_admissible(p.bounds, 1, 2));
  const double zeta = 1.1 * regularized_newton_zeta_threshold(1, 4);
  CHECK(check_theorem1_admissible(regularized_newton_schedule(zeta, 1, 4).bounds, 1, 4));

  Matrix q(2, 2);
  q << 2, 0, 0, 1;
  const QuadraticLoss f(q, Vector::Zero(2));
  const Matrix a = regularized_newton_preconditioner(f, Vector::Zero(2), 16.0, 1, 2);
  CHECK(a(0, 0) == 18.0);
  CHECK(a(1, 1) == 17.0);
}

TEST_CASE("opgd identity and ogd are bit-identical") {
  const FunctionSequence seq = gen_random_walk(4, 300, 1, 4, 0.1, 17);
  const double eta = theorem1_step_size(1, 4, 1);
  OpgdLearner a(Vector::Zero(4), eta, identity_preconditioner());
  OgdLearner b(Vector::Zero(4), eta);
  run_online(seq, a);
  run_online(seq, b);
  REQUIRE(a.trajectory().size() == b.trajectory().size());
  for (size_t i = 0; i < a.trajectory().size(); ++i) CHECK(a.trajectory()[i] == b.trajectory()[i]);
}

TEST_CASE("constrained opgd") {
  const QuadraticLoss f(identity(2), vec({5, 0}));
  OpgdState s{vec({0, 0}), 0.4, identity_preconditioner()};
  opgd_constrained_step(s, f, FeasibleSet::ball(Vector::Zero(2), 1.0));
  CHECK(s.x(0) == doctest::Approx(1.0));

  OpgdState u{vec({0, 0}), 0.4, identity_preconditioner()};
  OpgdState v = u;
  opgd_constrained_step(u, f, FeasibleSet());
  opgd_step(v, f);
  CHECK(u.x == v.x);
}

TEST_CASE("OON with the oracle predictor plays the minimizer from round 2") {
  const FunctionSequence seq = gen_random_walk(3, 50, 1, 4, 0.1, 5);
  OonLearner oon(Vector::Constant(3, 0.7), Predictor::oracle());
  const RegretLedger ledger = run_online(seq, oon);
  CHECK(oon.uses_oracle());
  for (size_t t = 2; t <= seq.horizon(); ++t) {
    CHECK(ledger.rounds()[t - 1].regret <= 1e-18);
    CHECK((oon.oon_trace()->rounds[t - 1].x_hat - seq.minimizer(t)).norm() <= 1e-9);
  }
  CHECK(prediction_variation(*oon.oon_trace()) == 0.0);
}

TEST_CASE("OON stale predictor on a static sequence has zero regret after round 1") {
  const FunctionSequence seq = gen_static(3, 20, 1, 3, 8, vec({1, 2, 3}));
  OonLearner oon(Vector::Zero(3), Predictor::stale());
  const RegretLedger ledger = run_online(seq, oon);
  CHECK(ledger.rounds()[0].regret > 0.0);
  for (size_t t = 2; t <= 20; ++t) CHECK(ledger.rounds()[t - 1].regret <= 1e-24);
  CHECK(prediction_variation(*oon.oon_trace()) <= 1e-28);
}

TEST_CASE("OON custom predictor") {
  const FunctionSequence seq = gen_static(2, 5, 1, 2, 1);
  int calls = 0;
  Predictor p = Predictor::custom([&](const Vector& q, const LossHistory&) {
    ++calls;
    return Prediction{identity(q.size()), Vector::Zero(q.size())};
  });
  OonLearner oon(Vector::Ones(2), std::move(p));
  run_online(seq, oon);
  CHECK(calls == 4);  // no prediction after the last round
  CHECK(oon.oon_trace()->predictor == PredictorKind::kCustom);
}

TEST_CASE("omgd inner count") {
  CHECK(omgd_inner_count(1, 0.5, 1, 3, false) == 1);
  CHECK(omgd_contraction(0.5, 1, 3, false) == doctest::Approx(0.25));
  CHECK(omgd_inner_count(10, 0.5, 1, 3, false) == 4);
  int prev = 0;
  for (size_t t = 1; t < 2000; ++t) {
    const int k = omgd_inner_count(t, 0.3, 1, 4, false);
    CHECK(k >= prev);
    const double rho = omgd_contraction(0.3, 1, 4, false);
    CHECK(static_cast<double>(t) * static_cast<double>(t) * std::pow(rho, k) <= 1.0);
    prev = k;
  }
  CHECK(code_of([] { omgd_inner_count(3, 1.5, 1, 1, false); }) == ErrorCode::kInvalidConstants);
  CHECK(omgd_inner_count(7, 1.0, 1, 1, false) == 1);
  CHECK(omgd_contraction(0.25, 1, 4, true) == doctest::Approx(1.0 - 2.0 / 5.0));
}

TEST_CASE("omgd step with eta = 2/(mu+L) on ((mu+L)/2) I is exact") {
  const QuadraticLoss f(2.0 * identity(2), vec({1, -1}));
  OmgdState s = make_omgd_state(vec({5, 5}), 0.5, 1.0, 3.0);
  const int k = omgd_step(s, f);
  CHECK(k == 1);
  CHECK(s.x == vec({1, -1}));
  CHECK(code_of([] { make_omgd_state(vec({0}), 0.6, 1.0, 3.0); }) == ErrorCode::kInvalidConstants);
  CHECK(code_of([] { make_omgd_state(vec({0}), 0.6, 1.0, 2.0, FeasibleSet::ball(vec({0}), 1)); }) ==
        ErrorCode::kInvalidConstants);
}

TEST_CASE("omgd contraction per inner step on a static sequence") {
  const FunctionSequence seq = gen_static(4, 30, 1, 4, 2, vec({0.3, -0.2, 1, 0.5}));
  const Vector star = seq.minimizer(1);
  const double eta = 2.0 / 5.0;
  const double rho = omgd_contraction(eta, 1, 4, false);
  int steps = 0;
  OmgdLearner learner(Vector::Constant(4, 3.0), eta, 1, 4, FeasibleSet(),
                      [&](size_t, int, const Vector& before, const Vector& after) {
                        ++steps;
                        CHECK((after - star).squaredNorm() <=
                              rho * (before - star).squaredNorm() + 1e-12);
                      });
  const RegretLedger ledger = run_online(seq, learner);
  long long expected = 0;
  for (size_t t = 1; t <= 30; ++t) {
    expected += omgd_inner_count(t, eta, 1, 4, false);
    CHECK(ledger.rounds()[t - 1].gradient_queries == omgd_inner_count(t, eta, 1, 4, false));
  }
  CHECK(steps == expected);
}

TEST_CASE("small sequence trajectories match the numpy reference") {
  // numpy: OGD at eta = mu/(2L^2), OMGD at eta = 2/(mu+L), OON stale, x1 = 0
  const FunctionSequence seq = small_sequence();
  CHECK(seq.mu() == doctest::Approx(0.7928932188134525).epsilon(1e-14));
  CHECK(seq.smoothness() == doctest::Approx(2.2071067811865475).epsilon(1e-14));

  const double eta = theorem1_step_size(seq.mu(), seq.smoothness(), 1.0);
  CHECK(eta == doctest::Approx(0.08138381002408662).epsilon(1e-13));
  OgdLearner ogd(Vector::Zero(2), eta);
  CHECK(run_online(seq, ogd).cumulative_regret() ==
        doctest::Approx(2.4021917850329104).epsilon(1e-12));

  OmgdLearner omgd(Vector::Zero(2), 2.0 / (seq.mu() + seq.smoothness()), seq.mu(), seq.smoothness());
  const RegretLedger ml = run_online(seq, omgd);
  CHECK(ml.cumulative_regret() == doctest::Approx(1.1528781508916321).epsilon(1e-12));
  CHECK(ml.rounds()[0].gradient_queries == 1);
  CHECK(ml.rounds()[1].gradient_queries == 1);
  CHECK(ml.rounds()[2].gradient_queries == 2);
  CHECK(ml.rounds()[3].gradient_queries == 2);

  OonLearner oon(Vector::Zero(2), Predictor::stale());
  const RegretLedger ol = run_online(seq, oon);
  CHECK(ol.cumulative_regret() == doctest::Approx(1.1745).epsilon(1e-12));
  CHECK(prediction_variation(*oon.oon_trace()) == doctest::Approx(0.1925).epsilon(1e-12));
}

TEST_CASE("loss history enforces the online protocol") {
  const FunctionSequence seq = gen_static(2, 5, 1, 2, 0);
  const auto h = LossHistory::over(seq, 2, false);
  CHECK_NOTHROW(h.at(1));
  CHECK_NOTHROW(h.current());
  CHECK(code_of([&] { h.at(3); }) == ErrorCode::kProtocolViolation);
  const auto oracle = LossHistory::over(seq, 2, true);
  CHECK_NOTHROW(oracle.at(3));
  CHECK(code_of([&] { oracle.at(4); }) == ErrorCode::kProtocolViolation);
  const auto last = LossHistory::over(seq, 5, true);
  CHECK_FALSE(last.has_next());
  CHECK(code_of([&] { last.at(6); }) == ErrorCode::kProtocolViolation);
}

TEST_CASE("a cheating predictor is caught") {
  const FunctionSequence seq = gen_static(2, 5, 1, 2, 0);
  Predictor peek = Predictor::custom([](const Vector& q, const LossHistory& h) {
    const LossFunction& f = h.at(h.revealed() + 1);
    return Prediction{f.hessian(q), f.gradient(q)};
  });
  OonLearner oon(Vector::Zero(2), std::move(peek));
  CHECK(code_of([&] { run_online(seq, oon); }) == ErrorCode::kProtocolViolation);
}

TEST_CASE("divergence guard") {
  const FunctionSequence seq = gen_static(2, 200, 1, 4, 0, vec({1, 1}));
  OgdLearner ogd(Vector::Zero(2), 10.0);
  CHECK(code_of([&] { run_online(seq, ogd); }) == ErrorCode::kDiverged);
}
