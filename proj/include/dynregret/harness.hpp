#pragma once

// Configuration-driven experiment runner. One schema serves TOML and JSON.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dynregret/learners.hpp"
#include "dynregret/losses.hpp"
#include "dynregret/regularity.hpp"
#include "dynregret/serialization.hpp"

namespace dynregret {

struct StepRule {
  enum class Kind { kValue, kTheorem1, kTheorem3, kTheorem6 };
  Kind kind = Kind::kTheorem1;
  double value = 0.0;
};

struct LearnerConfig {
  std::string name;
  Algorithm algorithm = Algorithm::kOgd;
  StepRule eta;
  PreconditionerKind preconditioner = PreconditionerKind::kIdentity;
  std::optional<double> zeta;
  std::optional<double> zeta_factor;  // zeta = factor * threshold
  PredictorKind predictor = PredictorKind::kStale;
  bool constrained = false;
};

struct InitRule {
  enum class Kind { kOrigin, kMinimizer, kPoint };
  Kind kind = Kind::kOrigin;
  Vector point;
};

struct OutputConfig {
  std::string csv_path = "{learner}_seed{seed}.csv";
  std::string json_path = "summary.json";
};

struct ExperimentConfig {
  EnvironmentSpec environment;
  std::vector<LearnerConfig> learners;
  size_t horizon = 100;
  std::vector<std::uint64_t> seeds{0};
  InitRule init;
  OutputConfig outputs;
  std::vector<std::string> bound_checks;
  std::vector<size_t> sweep_horizons{10, 100, 1000};
};

/// Every theorem id accepted in bound_checks.
const std::vector<std::string>& known_bound_checks();

/// Throws ConfigInvalid with the offending key. Relative custom sequence
/// paths resolve against `base_dir`.
ExperimentConfig parse_config(const Json& doc, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
/// Checks the cross-field invariants (T >= 1, learners, seeds, bound checks).
void validate_config(const ExperimentConfig& config);

/// The [environment] block on its own, plus optional horizon and seed keys;
/// used by gen-env.
EnvironmentSpec parse_environment_spec(const Json& doc, const std::filesystem::path& base_dir = {});

struct RunRecord {
  std::string learner;
  Algorithm algorithm = Algorithm::kOgd;
  std::uint64_t seed = 0;
  bool oracle = false;
  double eta = 0.0;
  RegretLedger ledger;
  RegularityReport regularity;
  std::vector<BoundReport> bounds;
  double wall_seconds = 0.0;
};

struct RunSummary {
  std::vector<RunRecord> runs;  // sorted by (learner, seed)

  size_t failed_bounds() const;
  size_t refused_bounds() const;
};

/// Runs every (learner, seed) pair, in parallel across hardware threads.
RunSummary run_experiment(const ExperimentConfig& config, unsigned threads = 0);

/// Runs one learner against one sequence; exposed for tests and the C API.
RunRecord run_single(const ExperimentConfig& config, const LearnerConfig& learner,
                     const FunctionSequence& seq, std::uint64_t seed);

FunctionSequence build_environment(const ExperimentConfig& config, std::uint64_t seed);

struct RegularityRow {
  size_t horizon = 0;
  double function_variation = 0.0;
  Exactness exactness = Exactness::kExact;
  double path_length_2 = 0.0;
};

/// V_T and C*_{2,T} over the configured horizon sweep for the two
/// alternating constructions; the hull is the minimizer set.
std::vector<RegularityRow> compare_regularities(const ExperimentConfig& config);

std::string regularity_table_csv(const std::vector<RegularityRow>& rows);
Json regularity_table_json(const std::vector<RegularityRow>& rows);

/// CSV with t, per_round_regret, cumulative_regret, step_norm,
/// gradient_queries and one <theorem>_bound column per report.
std::string ledger_csv(const RegretLedger& ledger, const std::vector<BoundReport>& bounds = {});
void emit_csv(const RegretLedger& ledger, const std::filesystem::path& path,
              const std::vector<BoundReport>& bounds = {});

Json regularity_to_json(const RegularityReport& r);
Json bound_report_to_json(const BoundReport& r);
/// Deterministic: wall times are left out.
Json summary_to_json(const RunSummary& summary);

std::string expand_output_template(const std::string& pattern, const std::string& learner,
                                   std::uint64_t seed);

/// Writes per-run CSVs and/or the JSON summary below out_dir.
std::vector<std::filesystem::path> write_artifacts(const RunSummary& summary,
                                                   const ExperimentConfig& config,
                                                   const std::filesystem::path& out_dir,
                                                   bool csv, bool json);

/// One line per (learner, seed, bound).
std::string summary_text(const RunSummary& summary);

}  // namespace dynregret
