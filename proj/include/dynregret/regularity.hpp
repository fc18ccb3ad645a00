#pragma once

// Regret bookkeeping, regularity measures of a loss sequence, and the
// right-hand sides of the regret bounds.

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dynregret/learners.hpp"
#include "dynregret/losses.hpp"

namespace dynregret {

struct LedgerRound {
  size_t t = 0;
  Vector action;     // x_t
  Vector minimizer;  // x*_t
  double loss = 0.0;       // f_t(x_t)
  double best_loss = 0.0;  // f_t(x*_t)
  double regret = 0.0;     // f_t(x_t) - f_t(x*_t)
  double cumulative = 0.0;
  double step_norm = 0.0;  // ||x*_t - x*_{t-1}||, 0 at t = 1
  int gradient_queries = 0;
  int predicted_queries = 0;
};

/// Per-round losses of a learner against the per-round minimizers.
class RegretLedger {
 public:
  /// Throws InvariantViolated when the per-round regret is below -1e-12.
  void record(const FunctionSequence& seq, size_t t, const Vector& action, RoundCost cost);

  const std::vector<LedgerRound>& rounds() const { return rounds_; }
  size_t horizon() const { return rounds_.size(); }
  double cumulative_regret() const { return rounds_.empty() ? 0.0 : rounds_.back().cumulative; }
  long long total_gradient_queries() const;
  std::vector<Vector> actions() const;

 private:
  std::vector<LedgerRound> rounds_;
};

/// Plays `learner` against `seq` for seq.horizon() rounds.
RegretLedger run_online(const FunctionSequence& seq, Learner& learner,
                        const AccessObserver* observer = nullptr);

/// sum_{t=2}^T ||x*_t - x*_{t-1}||^p.
double path_length_p(const std::vector<Vector>& minimizers, double p);

enum class Exactness { kExact, kLowerBound };

std::string to_string(Exactness e);

struct Variation {
  double value = 0.0;
  Exactness exactness = Exactness::kExact;
};

/// sum_t sup |f_t - f_{t-1}| over the convex hull of `hull_points`. Exact for
/// affine differences or a hull of at most two distinct points; otherwise the
/// sup is taken over the points and an in-box stationary point, a lower bound.
Variation function_variation(const FunctionSequence& seq, const std::vector<Vector>& hull_points);

/// D'_T: sum_{t=2}^T ||predicted direction - Newton direction||^2.
double prediction_variation(const OonTrace& trace);
/// D_T diagnostic: sum_{t=2}^T ||grad f_t(x_hat_{t-1}) - m_t(x_hat_{t-1})||^2.
double gradient_prediction_variation(const FunctionSequence& seq, const OonTrace& trace);

struct RegularityReport {
  double path_length_1 = 0.0;
  double path_length_2 = 0.0;
  double path_length_4 = 0.0;
  Variation function_variation;
  std::optional<double> prediction_variation;           // D'_T
  std::optional<double> gradient_prediction_variation;  // D_T
  double max_step = 0.0;
};

/// V_T is taken over the hull of the played actions and the minimizers.
RegularityReport compute_regularity(const FunctionSequence& seq, const RegretLedger& ledger,
                                    const OonTrace* trace = nullptr);

inline constexpr double kBoundRelativeTolerance = 1e-6;

struct BoundReport {
  std::string theorem;
  bool admissible = false;
  std::string reason;                 // why not admissible
  std::optional<double> bound;        // absent unless admissible
  double measured = 0.0;
  std::optional<double> slack;        // bound - measured
  std::map<std::string, double> constants;
  std::vector<std::pair<std::string, double>> branches;
  std::optional<Exactness> variation_exactness;

  bool passed() const;
};

/// Builds the refusal report used when a precondition fails.
BoundReport not_admissible(std::string theorem, double measured, std::string reason);

/// The caller's learner constants, checked by each bound.
struct OpgdSettings {
  double eta = 0.0;
  SpdBounds bounds;
  std::optional<double> zeta;
};

BoundReport theorem1_bound(const FunctionSequence& seq, const RegretLedger& ledger,
                           const OpgdSettings& settings);
BoundReport theorem5_bound(const FunctionSequence& seq, const RegretLedger& ledger,
                           const OpgdSettings& settings);

inline constexpr double kDefaultC1 = 0.1;
inline constexpr double kDefaultC2 = 0.1;

/// Returns {rho', rho''}; throws RhoOutOfRange unless 0 < rho' < 1.
std::pair<double, double> theorem2_rhos(double c1, double c2, double mu, double hessian_lipschitz);

BoundReport theorem2_bound(const FunctionSequence& seq, const RegretLedger& ledger,
                           const OonTrace& trace, double c1 = kDefaultC1, double c2 = kDefaultC2);
/// Smallest theorem2_bound over c1, c2 in {0.05, 0.1, 0.2, 0.5, 1.0}^2.
BoundReport theorem2_tightest(const FunctionSequence& seq, const RegretLedger& ledger,
                              const OonTrace& trace);
/// Composite bound for the stale predictor.
BoundReport corollary3_bound(const FunctionSequence& seq, const RegretLedger& ledger,
                             const OonTrace& trace, double c1 = kDefaultC1,
                             double c2 = kDefaultC2);

BoundReport theorem3_bound(const FunctionSequence& seq, const RegretLedger& ledger, double eta);
BoundReport theorem6_bound(const FunctionSequence& seq, const RegretLedger& ledger, double eta);

}  // namespace dynregret
