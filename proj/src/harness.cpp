#include "dynregret/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

#include "dynregret/errors.hpp"

namespace dynregret {

namespace {

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::kConfigInvalid, what);
}

void reject_unknown_keys(const Json& obj, const std::set<std::string>& allowed, const char* where) {
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) config_error(std::string(where) + ": unknown key '" + key + "'");
  }
}

const Json& require_object(const Json& j, const char* where) {
  if (!j.is_object()) config_error(std::string(where) + " must be a table/object");
  return j;
}

std::string get_string(const Json& j, const char* key, const char* where) {
  if (!j.is_string()) config_error(std::string(where) + "." + key + " must be a string");
  return j.get<std::string>();
}

double get_real(const Json& j, const std::string& where) {
  if (!j.is_number() || !std::isfinite(j.get<double>())) {
    config_error(where + " must be a finite number");
  }
  return j.get<double>();
}

std::uint64_t get_count(const Json& j, const std::string& where) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<long long>() >= 0) return static_cast<std::uint64_t>(j.get<long long>());
  config_error(where + " must be a non-negative integer");
}

Vector get_vector(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) config_error(where + " must be a nonempty array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = get_real(j[i], where);
  return v;
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "opgd") return Algorithm::kOpgd;
  if (s == "ogd") return Algorithm::kOgd;
  if (s == "oon") return Algorithm::kOon;
  if (s == "omgd") return Algorithm::kOmgd;
  config_error("unknown algorithm '" + s + "' (opgd, ogd, oon, omgd)");
}

LearnerConfig parse_learner(const Json& j, size_t index) {
  const std::string where = "learners[" + std::to_string(index) + "]";
  require_object(j, where.c_str());
  reject_unknown_keys(j, {"name", "algorithm", "eta", "preconditioner", "zeta", "zeta_factor",
                          "predictor", "constrained"},
                      where.c_str());
  if (!j.contains("algorithm")) config_error(where + ": missing 'algorithm'");
  LearnerConfig c;
  c.algorithm = algorithm_from_string(get_string(j["algorithm"], "algorithm", where.c_str()));
  c.name = j.contains("name") ? get_string(j["name"], "name", where.c_str()) : to_string(c.algorithm);
  if (c.name.empty()) config_error(where + ": empty name");
  if (j.contains("constrained")) {
    if (!j["constrained"].is_boolean()) config_error(where + ".constrained must be a boolean");
    c.constrained = j["constrained"].get<bool>();
  }

  if (j.contains("eta")) {
    const Json& e = j["eta"];
    if (e.is_string()) {
      const std::string s = e.get<std::string>();
      if (s == "theorem1") c.eta.kind = StepRule::Kind::kTheorem1;
      else if (s == "theorem3") c.eta.kind = StepRule::Kind::kTheorem3;
      else if (s == "theorem6") c.eta.kind = StepRule::Kind::kTheorem6;
      else config_error(where + ".eta: unknown rule '" + s + "'");
    } else {
      c.eta.kind = StepRule::Kind::kValue;
      c.eta.value = get_real(e, where + ".eta");
      if (!(c.eta.value > 0.0)) config_error(where + ".eta must be positive");
    }
  } else if (c.algorithm == Algorithm::kOmgd) {
    c.eta.kind = c.constrained ? StepRule::Kind::kTheorem6 : StepRule::Kind::kTheorem3;
  }

  if (j.contains("preconditioner")) {
    const std::string p = get_string(j["preconditioner"], "preconditioner", where.c_str());
    if (p == "identity") c.preconditioner = PreconditionerKind::kIdentity;
    else if (p == "regularized_newton") c.preconditioner = PreconditionerKind::kRegularizedNewton;
    else config_error(where + ".preconditioner: unknown '" + p + "'");
  }
  if (j.contains("zeta")) c.zeta = get_real(j["zeta"], where + ".zeta");
  if (j.contains("zeta_factor")) c.zeta_factor = get_real(j["zeta_factor"], where + ".zeta_factor");
  if (c.zeta && c.zeta_factor) config_error(where + ": give zeta or zeta_factor, not both");
  if (c.preconditioner == PreconditionerKind::kRegularizedNewton && !c.zeta && !c.zeta_factor) {
    config_error(where + ": regularized_newton needs zeta or zeta_factor");
  }

  if (j.contains("predictor")) {
    const std::string p = get_string(j["predictor"], "predictor", where.c_str());
    if (p == "stale") c.predictor = PredictorKind::kStale;
    else if (p == "oracle") c.predictor = PredictorKind::kOracle;
    else config_error(where + ".predictor: unknown '" + p + "' (stale, oracle)");
  }

  // reject combinations that have no meaning rather than silently ignoring them
  if (c.algorithm != Algorithm::kOpgd && c.preconditioner != PreconditionerKind::kIdentity) {
    config_error(where + ": only opgd takes a preconditioner");
  }
  if (c.algorithm == Algorithm::kOon && c.constrained) {
    config_error(where + ": oon has no constrained variant");
  }
  if (c.algorithm == Algorithm::kOon && j.contains("eta")) {
    config_error(where + ": oon takes no step size");
  }
  if (c.algorithm != Algorithm::kOon && j.contains("predictor")) {
    config_error(where + ": only oon takes a predictor");
  }
  const bool omgd_rule = c.eta.kind == StepRule::Kind::kTheorem3 || c.eta.kind == StepRule::Kind::kTheorem6;
  if (c.algorithm != Algorithm::kOmgd && omgd_rule) {
    config_error(where + ": eta rules theorem3/theorem6 are for omgd");
  }
  if (c.algorithm == Algorithm::kOmgd && c.eta.kind == StepRule::Kind::kTheorem1) {
    config_error(where + ": omgd uses eta = theorem3, theorem6 or a number");
  }
  return c;
}

bool check_applies(const std::string& id, const LearnerConfig& l) {
  const bool opgd_like = l.algorithm == Algorithm::kOpgd || l.algorithm == Algorithm::kOgd;
  if (id == "theorem1") return opgd_like && !l.constrained;
  if (id == "theorem5") return opgd_like && l.constrained;
  if (id == "theorem2" || id == "theorem2_tightest" || id == "corollary3") {
    return l.algorithm == Algorithm::kOon;
  }
  if (id == "theorem3") return l.algorithm == Algorithm::kOmgd && !l.constrained;
  if (id == "theorem6") return l.algorithm == Algorithm::kOmgd && l.constrained;
  return false;
}

double resolve_zeta(const LearnerConfig& l, double mu, double smoothness) {
  if (l.zeta) return *l.zeta;
  const double threshold = regularized_newton_zeta_threshold(mu, smoothness);
  return *l.zeta_factor * std::max(threshold, 0.0);
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

const std::vector<std::string>& known_bound_checks() {
  static const std::vector<std::string> ids{"theorem1", "theorem2", "theorem2_tightest",
                                            "corollary3", "theorem3", "theorem5", "theorem6"};
  return ids;
}

// ------------------------------------------------------------------ config

EnvironmentSpec parse_environment_spec(const Json& doc, const std::filesystem::path& base_dir) {
  require_object(doc, "environment");
  reject_unknown_keys(doc, {"kind", "dimension", "mu", "L", "step_bound", "anchor",
                            "feasible_set", "path", "horizon", "seed"},
                      "environment");
  EnvironmentSpec spec;
  if (!doc.contains("kind")) config_error("environment: missing 'kind'");
  try {
    spec.kind = environment_kind_from_string(get_string(doc["kind"], "kind", "environment"));
  } catch (const Error& e) {
    config_error(e.what());
  }
  if (doc.contains("dimension")) {
    spec.dimension = static_cast<Eigen::Index>(get_count(doc["dimension"], "environment.dimension"));
    if (spec.dimension < 1) config_error("environment.dimension must be >= 1");
  }
  if (doc.contains("mu")) spec.mu = get_real(doc["mu"], "environment.mu");
  if (doc.contains("L")) spec.smoothness = get_real(doc["L"], "environment.L");
  if (doc.contains("step_bound")) spec.step_bound = get_real(doc["step_bound"], "environment.step_bound");
  if (doc.contains("anchor")) {
    spec.anchor = get_vector(doc["anchor"], "environment.anchor");
    if (!doc.contains("dimension")) spec.dimension = spec.anchor->size();
  }
  if (doc.contains("feasible_set")) spec.feasible_set = feasible_set_from_json(doc["feasible_set"]);
  if (doc.contains("horizon")) spec.horizon = get_count(doc["horizon"], "environment.horizon");
  if (doc.contains("seed")) spec.seed = get_count(doc["seed"], "environment.seed");
  if (spec.kind == EnvironmentKind::kCustom) {
    if (!doc.contains("path")) config_error("environment: custom kind needs 'path'");
    std::filesystem::path p = get_string(doc["path"], "path", "environment");
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    spec.custom_path = p.string();
  } else if (doc.contains("path")) {
    config_error("environment.path is only used with kind = \"custom\"");
  }
  if (spec.anchor && spec.anchor->size() != spec.dimension) {
    config_error("environment.anchor length differs from dimension");
  }
  const Eigen::Index set_dim = spec.feasible_set.dimension();
  if (set_dim != 0 && spec.kind != EnvironmentKind::kCustom && set_dim != spec.dimension) {
    config_error("environment.feasible_set dimension differs from dimension");
  }
  return spec;
}

ExperimentConfig parse_config(const Json& doc, const std::filesystem::path& base_dir) {
  require_object(doc, "config");
  reject_unknown_keys(doc, {"environment", "learners", "horizon", "seeds", "init", "outputs",
                            "bound_checks", "sweep_horizons"},
                      "config");
  ExperimentConfig c;
  if (!doc.contains("environment")) config_error("missing [environment]");
  c.environment = parse_environment_spec(doc["environment"], base_dir);

  if (doc.contains("horizon")) {
    c.horizon = get_count(doc["horizon"], "horizon");
  } else if (doc["environment"].contains("horizon")) {
    c.horizon = c.environment.horizon;
  }
  c.environment.horizon = c.horizon;

  if (doc.contains("seeds")) {
    const Json& s = doc["seeds"];
    c.seeds.clear();
    if (s.is_array()) {
      for (const auto& v : s) c.seeds.push_back(get_count(v, "seeds[]"));
    } else {
      c.seeds.push_back(get_count(s, "seeds"));
    }
  }

  if (doc.contains("learners")) {
    const Json& ls = doc["learners"];
    if (!ls.is_array()) config_error("learners must be an array of tables");
    for (size_t i = 0; i < ls.size(); ++i) c.learners.push_back(parse_learner(ls[i], i));
  }

  if (doc.contains("init")) {
    const Json& i = doc["init"];
    if (i.is_string()) {
      const std::string s = i.get<std::string>();
      if (s == "origin") c.init.kind = InitRule::Kind::kOrigin;
      else if (s == "minimizer") c.init.kind = InitRule::Kind::kMinimizer;
      else config_error("init must be \"origin\", \"minimizer\" or an array");
    } else {
      c.init.kind = InitRule::Kind::kPoint;
      c.init.point = get_vector(i, "init");
    }
  }

  if (doc.contains("outputs")) {
    const Json& o = require_object(doc["outputs"], "outputs");
    reject_unknown_keys(o, {"csv_path", "json_path"}, "outputs");
    if (o.contains("csv_path")) c.outputs.csv_path = get_string(o["csv_path"], "csv_path", "outputs");
    if (o.contains("json_path")) c.outputs.json_path = get_string(o["json_path"], "json_path", "outputs");
  }

  if (doc.contains("bound_checks")) {
    const Json& b = doc["bound_checks"];
    if (!b.is_array()) config_error("bound_checks must be an array of theorem ids");
    for (const auto& v : b) c.bound_checks.push_back(get_string(v, "bound_checks", "config"));
  }

  if (doc.contains("sweep_horizons")) {
    const Json& s = doc["sweep_horizons"];
    if (!s.is_array() || s.empty()) config_error("sweep_horizons must be a nonempty array");
    c.sweep_horizons.clear();
    for (const auto& v : s) c.sweep_horizons.push_back(get_count(v, "sweep_horizons[]"));
  }

  validate_config(c);
  return c;
}

void validate_config(const ExperimentConfig& c) {
  if (c.horizon < 1) config_error("horizon must be >= 1");
  if (c.seeds.empty()) config_error("seeds must be nonempty");
  std::set<std::string> names;
  for (const auto& l : c.learners) {
    if (!names.insert(l.name).second) config_error("duplicate learner name '" + l.name + "'");
    if (l.name.find_first_of("/\\") != std::string::npos) {
      config_error("learner name '" + l.name + "' may not contain path separators");
    }
    const bool set_given = !c.environment.feasible_set.is_unconstrained() ||
                           c.environment.kind == EnvironmentKind::kCustom;
    if (l.constrained && !set_given) {
      config_error("learner '" + l.name + "' is constrained but the environment has no feasible_set");
    }
  }
  std::set<std::string> seen;
  for (const auto& id : c.bound_checks) {
    const auto& known = known_bound_checks();
    if (std::find(known.begin(), known.end(), id) == known.end()) {
      config_error("unknown bound check '" + id + "'");
    }
    if (!seen.insert(id).second) config_error("bound check '" + id + "' listed twice");
    const bool any = std::any_of(c.learners.begin(), c.learners.end(),
                                 [&](const LearnerConfig& l) { return check_applies(id, l); });
    if (!any) config_error("bound check '" + id + "' applies to none of the learners");
  }
  for (size_t t : c.sweep_horizons) {
    if (t < 2) config_error("sweep_horizons entries must be >= 2");
  }
  if (c.init.kind == InitRule::Kind::kPoint && c.environment.kind != EnvironmentKind::kCustom &&
      c.init.point.size() != c.environment.dimension) {
    config_error("init point length differs from the environment dimension");
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  Json doc;
  try {
    doc = load_document(path);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIoError) throw;
    throw Error(ErrorCode::kConfigInvalid, std::string(e.what()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kConfigInvalid, path.string() + ": " + e.what());
  }
  return parse_config(doc, path.parent_path());
}

// ------------------------------------------------------------------ runner

FunctionSequence build_environment(const ExperimentConfig& config, std::uint64_t seed) {
  EnvironmentSpec spec = config.environment;
  spec.horizon = config.horizon;
  spec.seed = seed;
  return generate(spec);
}

RunRecord run_single(const ExperimentConfig& config, const LearnerConfig& lc,
                     const FunctionSequence& seq, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const double mu = seq.mu();
  const double ell = seq.smoothness();
  const FeasibleSet& set = seq.feasible_set();
  if (lc.constrained == set.is_unconstrained()) {
    config_error("learner '" + lc.name + "' is " + (lc.constrained ? "" : "un") +
                 "constrained but the sequence is " + (set.is_unconstrained() ? "un" : "") +
                 "constrained");
  }

  Vector x1;
  switch (config.init.kind) {
    case InitRule::Kind::kOrigin: x1 = Vector::Zero(seq.dimension()); break;
    case InitRule::Kind::kMinimizer: x1 = seq.minimizer(1); break;
    case InitRule::Kind::kPoint:
      require_same_dim(seq.dimension(), config.init.point.size(), "init point");
      x1 = config.init.point;
      break;
  }
  if (lc.constrained) x1 = project_euclidean(set, x1).point;

  RunRecord rec;
  rec.learner = lc.name;
  rec.algorithm = lc.algorithm;
  rec.seed = seed;

  std::unique_ptr<Learner> learner;
  OpgdSettings settings;
  switch (lc.algorithm) {
    case Algorithm::kOpgd:
    case Algorithm::kOgd: {
      Preconditioner pre = identity_preconditioner();
      if (lc.preconditioner == PreconditionerKind::kRegularizedNewton) {
        pre = regularized_newton_schedule(resolve_zeta(lc, mu, ell), mu, ell);
        settings.zeta = pre.zeta;
      }
      rec.eta = lc.eta.kind == StepRule::Kind::kValue
                    ? lc.eta.value
                    : theorem1_step_size(mu, ell, pre.bounds.lambda_min);
      settings.eta = rec.eta;
      settings.bounds = pre.bounds;
      if (lc.algorithm == Algorithm::kOpgd) {
        learner = std::make_unique<OpgdLearner>(x1, rec.eta, pre, set);
      } else {
        learner = std::make_unique<OgdLearner>(x1, rec.eta, set);
      }
      break;
    }
    case Algorithm::kOon: {
      Predictor p = lc.predictor == PredictorKind::kOracle ? Predictor::oracle() : Predictor::stale();
      rec.oracle = p.needs_lookahead();
      learner = std::make_unique<OonLearner>(x1, std::move(p));
      break;
    }
    case Algorithm::kOmgd: {
      switch (lc.eta.kind) {
        case StepRule::Kind::kValue: rec.eta = lc.eta.value; break;
        case StepRule::Kind::kTheorem3: rec.eta = 2.0 / (mu + ell); break;
        case StepRule::Kind::kTheorem6: rec.eta = 1.0 / ell; break;
        case StepRule::Kind::kTheorem1: config_error("omgd has no theorem1 step size");
      }
      learner = std::make_unique<OmgdLearner>(x1, rec.eta, mu, ell, set);
      break;
    }
  }

  rec.ledger = run_online(seq, *learner);
  const OonTrace* trace = learner->oon_trace();
  rec.regularity = compute_regularity(seq, rec.ledger, trace);

  const double measured = rec.ledger.cumulative_regret();
  for (const auto& id : config.bound_checks) {
    if (!check_applies(id, lc)) continue;
    try {
      if (id == "theorem1") rec.bounds.push_back(theorem1_bound(seq, rec.ledger, settings));
      else if (id == "theorem5") rec.bounds.push_back(theorem5_bound(seq, rec.ledger, settings));
      else if (id == "theorem2") rec.bounds.push_back(theorem2_bound(seq, rec.ledger, *trace));
      else if (id == "theorem2_tightest") {
        BoundReport r = theorem2_tightest(seq, rec.ledger, *trace);
        r.theorem = id;
        rec.bounds.push_back(std::move(r));
      } else if (id == "corollary3") rec.bounds.push_back(corollary3_bound(seq, rec.ledger, *trace));
      else if (id == "theorem3") rec.bounds.push_back(theorem3_bound(seq, rec.ledger, rec.eta));
      else if (id == "theorem6") rec.bounds.push_back(theorem6_bound(seq, rec.ledger, rec.eta));
    } catch (const Error& e) {
      const ErrorCode code = e.code();
      if (code != ErrorCode::kNotAdmissible && code != ErrorCode::kInvalidConstants &&
          code != ErrorCode::kRhoOutOfRange) {
        throw;
      }
      rec.bounds.push_back(not_admissible(id, measured, e.what()));
    }
  }
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

size_t RunSummary::failed_bounds() const {
  size_t n = 0;
  for (const auto& r : runs) {
    for (const auto& b : r.bounds) n += b.admissible && !b.passed();
  }
  return n;
}

size_t RunSummary::refused_bounds() const {
  size_t n = 0;
  for (const auto& r : runs) {
    for (const auto& b : r.bounds) n += !b.admissible;
  }
  return n;
}

RunSummary run_experiment(const ExperimentConfig& config, unsigned threads) {
  validate_config(config);
  if (config.learners.empty()) config_error("at least one learner is required to run");
  std::vector<FunctionSequence> sequences;
  sequences.reserve(config.seeds.size());
  for (std::uint64_t seed : config.seeds) sequences.push_back(build_environment(config, seed));

  struct Job {
    size_t learner;
    size_t seed;
  };
  std::vector<Job> jobs;
  for (size_t l = 0; l < config.learners.size(); ++l) {
    for (size_t s = 0; s < config.seeds.size(); ++s) jobs.push_back({l, s});
  }

  std::vector<std::optional<RunRecord>> results(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < jobs.size(); i = next++) {
      try {
        const Job& j = jobs[i];
        results[i] = run_single(config, config.learners[j.learner], sequences[j.seed],
                                config.seeds[j.seed]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<size_t>(threads, jobs.size()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  RunSummary summary;
  for (auto& r : results) summary.runs.push_back(std::move(*r));
  std::stable_sort(summary.runs.begin(), summary.runs.end(),
                   [](const RunRecord& a, const RunRecord& b) {
                     return std::tie(a.learner, a.seed) < std::tie(b.learner, b.seed);
                   });
  return summary;
}

// ----------------------------------------------------------- regularities

std::vector<RegularityRow> compare_regularities(const ExperimentConfig& config) {
  const EnvironmentKind kind = config.environment.kind;
  if (kind != EnvironmentKind::kAlternatingOffset && kind != EnvironmentKind::kAlternatingCenterDecay) {
    throw Error(ErrorCode::kUnsupportedEnvironment,
                "compare-regularities needs alternating_offset or alternating_center_decay, got " +
                    to_string(kind));
  }
  std::vector<RegularityRow> rows;
  for (size_t horizon : config.sweep_horizons) {
    EnvironmentSpec spec = config.environment;
    spec.horizon = horizon;
    const FunctionSequence seq = generate(spec);
    const Variation v = function_variation(seq, seq.minimizers());
    rows.push_back({horizon, v.value, v.exactness, path_length_p(seq.minimizers(), 2.0)});
  }
  return rows;
}

std::string regularity_table_csv(const std::vector<RegularityRow>& rows) {
  std::string out = "T,V_T,V_T_exactness,C2_T\n";
  for (const auto& r : rows) {
    out += std::to_string(r.horizon) + "," + fmt17(r.function_variation) + "," +
           to_string(r.exactness) + "," + fmt17(r.path_length_2) + "\n";
  }
  return out;
}

Json regularity_table_json(const std::vector<RegularityRow>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) {
    out.push_back({{"T", r.horizon},
                   {"V_T", r.function_variation},
                   {"V_T_exactness", to_string(r.exactness)},
                   {"C2_T", r.path_length_2}});
  }
  return out;
}

// ---------------------------------------------------------------- outputs

std::string ledger_csv(const RegretLedger& ledger, const std::vector<BoundReport>& bounds) {
  std::string out = "t,per_round_regret,cumulative_regret,step_norm,gradient_queries";
  for (const auto& b : bounds) out += "," + b.theorem + "_bound";
  out += "\n";
  // the horizon-T bound, repeated per row so the column plots as a reference line
  std::vector<std::string> cells;
  for (const auto& b : bounds) cells.push_back(b.admissible && b.bound ? fmt17(*b.bound) : "");
  for (const auto& r : ledger.rounds()) {
    out += std::to_string(r.t) + "," + fmt17(r.regret) + "," + fmt17(r.cumulative) + "," +
           fmt17(r.step_norm) + "," + std::to_string(r.gradient_queries + r.predicted_queries);
    for (const auto& c : cells) out += "," + c;
    out += "\n";
  }
  return out;
}

void emit_csv(const RegretLedger& ledger, const std::filesystem::path& path,
              const std::vector<BoundReport>& bounds) {
  write_text_file(path, ledger_csv(ledger, bounds));
}

Json regularity_to_json(const RegularityReport& r) {
  Json j = {{"C1_T", r.path_length_1},
            {"C2_T", r.path_length_2},
            {"C4_T", r.path_length_4},
            {"V_T", r.function_variation.value},
            {"V_T_exactness", to_string(r.function_variation.exactness)},
            {"max_step", r.max_step}};
  if (r.prediction_variation) j["D_prime_T"] = *r.prediction_variation;
  if (r.gradient_prediction_variation) j["D_T"] = *r.gradient_prediction_variation;
  return j;
}

Json bound_report_to_json(const BoundReport& r) {
  Json j = {{"theorem", r.theorem}, {"admissible", r.admissible}, {"measured", r.measured}};
  if (!r.admissible) {
    j["reason"] = r.reason;
    return j;
  }
  j["bound"] = *r.bound;
  j["slack"] = *r.slack;
  j["passed"] = r.passed();
  Json constants = Json::object();
  for (const auto& [k, v] : r.constants) constants[k] = v;
  j["constants"] = constants;
  if (!r.branches.empty()) {
    Json branches = Json::object();
    for (const auto& [k, v] : r.branches) branches[k] = v;
    j["branches"] = branches;
  }
  if (r.variation_exactness) j["V_T_exactness"] = to_string(*r.variation_exactness);
  return j;
}

Json summary_to_json(const RunSummary& summary) {
  Json runs = Json::array();
  for (const auto& r : summary.runs) {
    Json bounds = Json::array();
    for (const auto& b : r.bounds) bounds.push_back(bound_report_to_json(b));
    runs.push_back({{"learner", r.learner},
                    {"algorithm", to_string(r.algorithm)},
                    {"seed", r.seed},
                    {"oracle", r.oracle},
                    {"eta", r.eta},
                    {"horizon", r.ledger.horizon()},
                    {"cumulative_regret", r.ledger.cumulative_regret()},
                    {"gradient_queries", r.ledger.total_gradient_queries()},
                    {"regularity", regularity_to_json(r.regularity)},
                    {"bounds", bounds}});
  }
  return {{"format", "dynregret.summary/1"},
          {"failed_bounds", summary.failed_bounds()},
          {"refused_bounds", summary.refused_bounds()},
          {"runs", runs}};
}

std::string expand_output_template(const std::string& pattern, const std::string& learner,
                                   std::uint64_t seed) {
  std::string out;
  for (size_t i = 0; i < pattern.size();) {
    if (pattern.compare(i, 9, "{learner}") == 0) {
      out += learner;
      i += 9;
    } else if (pattern.compare(i, 6, "{seed}") == 0) {
      out += std::to_string(seed);
      i += 6;
    } else {
      out += pattern[i++];
    }
  }
  return out;
}

std::vector<std::filesystem::path> write_artifacts(const RunSummary& summary,
                                                   const ExperimentConfig& config,
                                                   const std::filesystem::path& out_dir,
                                                   bool csv, bool json) {
  std::vector<std::filesystem::path> written;
  if (csv) {
    std::set<std::filesystem::path> used;
    for (const auto& r : summary.runs) {
      const auto path = out_dir / expand_output_template(config.outputs.csv_path, r.learner, r.seed);
      if (!used.insert(path).second) {
        config_error("csv_path template maps two runs to " + path.string());
      }
      emit_csv(r.ledger, path, r.bounds);
      written.push_back(path);
    }
  }
  if (json) {
    const auto path = out_dir / config.outputs.json_path;
    write_text_file(path, summary_to_json(summary).dump(2) + "\n");
    written.push_back(path);
  }
  return written;
}

std::string summary_text(const RunSummary& summary) {
  std::ostringstream os;
  for (const auto& r : summary.runs) {
    os << r.learner << " seed=" << r.seed << (r.oracle ? " oracle" : "") << " T="
       << r.ledger.horizon() << " regret=" << fmt6(r.ledger.cumulative_regret())
       << " grads=" << r.ledger.total_gradient_queries() << "\n";
    for (const auto& b : r.bounds) {
      os << "  " << b.theorem << ": ";
      if (!b.admissible) {
        os << "REFUSED (" << b.reason << ")\n";
        continue;
      }
      os << (b.passed() ? "PASS" : "FAIL") << " bound=" << fmt6(*b.bound)
         << " slack=" << fmt6(*b.slack);
      if (b.variation_exactness == Exactness::kLowerBound) os << " (V_T lower bound)";
      os << "\n";
    }
  }
  os << "failed bounds: " << summary.failed_bounds() << ", refused: " << summary.refused_bounds()
     << "\n";
  return os.str();
}

}  // namespace dynregret
