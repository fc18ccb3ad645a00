#include "dynregret/dynregret.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <limits>
#include <new>
#include <string>

#include "dynregret/errors.hpp"
#include "dynregret/harness.hpp"

struct dr_experiment {
  dynregret::ExperimentConfig config;
};

struct dr_summary {
  dynregret::RunSummary summary;
  std::vector<std::string> algorithms;  // stable storage for dr_run_info
};

struct dr_sequence {
  dynregret::FunctionSequence seq;
};

namespace {

thread_local std::string g_last_error;

dr_status fail(dr_status s, std::string message) {
  g_last_error = std::move(message);
  return s;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
dr_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return DR_OK;
  } catch (const dynregret::Error& e) {
    return fail(static_cast<dr_status>(static_cast<int>(e.code())), e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(DR_ERR_PARSE, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DR_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(DR_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(DR_ERR_INTERNAL, "unknown exception");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define DR_REQUIRE(cond, what)                                   \
  do {                                                           \
    if (!(cond)) return fail(DR_ERR_INVALID_ARGUMENT, (what));   \
  } while (0)

}  // namespace

extern "C" {

const char* dr_version(void) { return "0.1.0"; }

const char* dr_status_name(dr_status status) {
  switch (status) {
    case DR_OK: return "Ok";
    case DR_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case DR_ERR_INTERNAL: return "Internal";
    default: break;
  }
  const int code = static_cast<int>(status);
  if (code >= 1 && code <= 18) {
    return dynregret::ErrorCodeName(static_cast<dynregret::ErrorCode>(code)).data();
  }
  return "Unknown";
}

const char* dr_last_error(void) { return g_last_error.c_str(); }

void dr_string_free(char* s) { std::free(s); }

dr_status dr_experiment_load(const char* path, dr_experiment** out) {
  DR_REQUIRE(path != nullptr && out != nullptr, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new dr_experiment{dynregret::load_config(path)}; });
}

dr_status dr_experiment_parse(const char* text, const char* format, const char* base_dir,
                              dr_experiment** out) {
  DR_REQUIRE(text != nullptr && format != nullptr && out != nullptr, "null argument");
  *out = nullptr;
  const std::string fmt = format;
  DR_REQUIRE(fmt == "json" || fmt == "toml", "format must be \"json\" or \"toml\"");
  return guarded([&] {
    dynregret::Json doc;
    try {
      doc = fmt == "toml" ? dynregret::parse_toml(text) : dynregret::Json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw dynregret::Error(dynregret::ErrorCode::kConfigInvalid, e.what());
    } catch (const dynregret::Error& e) {
      throw dynregret::Error(dynregret::ErrorCode::kConfigInvalid, e.what());
    }
    *out = new dr_experiment{dynregret::parse_config(doc, base_dir ? base_dir : "")};
  });
}

void dr_experiment_free(dr_experiment* exp) { delete exp; }

dr_status dr_experiment_set_seed(dr_experiment* exp, uint64_t seed) {
  DR_REQUIRE(exp != nullptr, "null experiment");
  exp->config.seeds = {seed};
  return DR_OK;
}

dr_status dr_experiment_set_horizon(dr_experiment* exp, size_t horizon) {
  DR_REQUIRE(exp != nullptr, "null experiment");
  if (horizon < 1) return fail(DR_ERR_CONFIG_INVALID, "horizon must be >= 1");
  exp->config.horizon = horizon;
  exp->config.environment.horizon = horizon;
  return DR_OK;
}

dr_status dr_experiment_run(const dr_experiment* exp, unsigned threads, dr_summary** out) {
  DR_REQUIRE(exp != nullptr && out != nullptr, "null argument");
  *out = nullptr;
  return guarded([&] {
    auto* s = new dr_summary{dynregret::run_experiment(exp->config, threads), {}};
    for (const auto& r : s->summary.runs) s->algorithms.push_back(dynregret::to_string(r.algorithm));
    *out = s;
  });
}

dr_status dr_compare_regularities(const dr_experiment* exp, const char* format, char** out) {
  DR_REQUIRE(exp != nullptr && format != nullptr && out != nullptr, "null argument");
  *out = nullptr;
  const std::string fmt = format;
  DR_REQUIRE(fmt == "csv" || fmt == "json", "format must be \"csv\" or \"json\"");
  return guarded([&] {
    const auto rows = dynregret::compare_regularities(exp->config);
    *out = dup_string(fmt == "csv" ? dynregret::regularity_table_csv(rows)
                                   : dynregret::regularity_table_json(rows).dump(2) + "\n");
  });
}

void dr_summary_free(dr_summary* summary) { delete summary; }

size_t dr_summary_run_count(const dr_summary* summary) {
  return summary == nullptr ? 0 : summary->summary.runs.size();
}

dr_status dr_summary_run_info(const dr_summary* summary, size_t run, dr_run_info* out) {
  DR_REQUIRE(summary != nullptr && out != nullptr, "null argument");
  DR_REQUIRE(run < summary->summary.runs.size(), "run index out of range");
  const auto& r = summary->summary.runs[run];
  out->learner = r.learner.c_str();
  out->algorithm = summary->algorithms[run].c_str();
  out->seed = r.seed;
  out->oracle = r.oracle ? 1 : 0;
  out->horizon = r.ledger.horizon();
  out->cumulative_regret = r.ledger.cumulative_regret();
  out->gradient_queries = r.ledger.total_gradient_queries();
  out->bound_count = r.bounds.size();
  return DR_OK;
}

dr_status dr_summary_bound_info(const dr_summary* summary, size_t run, size_t bound,
                                dr_bound_info* out) {
  DR_REQUIRE(summary != nullptr && out != nullptr, "null argument");
  DR_REQUIRE(run < summary->summary.runs.size(), "run index out of range");
  const auto& bounds = summary->summary.runs[run].bounds;
  DR_REQUIRE(bound < bounds.size(), "bound index out of range");
  const auto& b = bounds[bound];
  const double nan = std::numeric_limits<double>::quiet_NaN();
  out->theorem = b.theorem.c_str();
  out->admissible = b.admissible ? 1 : 0;
  out->passed = b.passed() ? 1 : 0;
  out->bound = b.bound.value_or(nan);
  out->measured = b.measured;
  out->slack = b.slack.value_or(nan);
  out->reason = b.reason.c_str();
  return DR_OK;
}

size_t dr_summary_failed_bounds(const dr_summary* summary) {
  return summary == nullptr ? 0 : summary->summary.failed_bounds();
}

dr_status dr_summary_write(const dr_summary* summary, const dr_experiment* exp,
                           const char* out_dir, unsigned flags) {
  DR_REQUIRE(summary != nullptr && exp != nullptr && out_dir != nullptr, "null argument");
  DR_REQUIRE((flags & ~(DR_WRITE_CSV | DR_WRITE_JSON)) == 0, "unknown write flags");
  return guarded([&] {
    dynregret::write_artifacts(summary->summary, exp->config, out_dir,
                               (flags & DR_WRITE_CSV) != 0, (flags & DR_WRITE_JSON) != 0);
  });
}

dr_status dr_summary_to_json(const dr_summary* summary, char** out) {
  DR_REQUIRE(summary != nullptr && out != nullptr, "null argument");
  *out = nullptr;
  return guarded([&] { *out = dup_string(dynregret::summary_to_json(summary->summary).dump(2) + "\n"); });
}

dr_status dr_summary_text(const dr_summary* summary, char** out) {
  DR_REQUIRE(summary != nullptr && out != nullptr, "null argument");
  *out = nullptr;
  return guarded([&] { *out = dup_string(dynregret::summary_text(summary->summary)); });
}

dr_status dr_run_csv(const dr_summary* summary, size_t run, char** out) {
  DR_REQUIRE(summary != nullptr && out != nullptr, "null argument");
  DR_REQUIRE(run < summary->summary.runs.size(), "run index out of range");
  *out = nullptr;
  const auto& r = summary->summary.runs[run];
  return guarded([&] { *out = dup_string(dynregret::ledger_csv(r.ledger, r.bounds)); });
}

dr_status dr_sequence_generate(const char* spec_path, dr_sequence** out) {
  DR_REQUIRE(spec_path != nullptr && out != nullptr, "null argument");
  *out = nullptr;
  return guarded([&] {
    const std::filesystem::path path = spec_path;
    dynregret::Json doc;
    try {
      doc = dynregret::load_document(path);
    } catch (const dynregret::Error& e) {
      if (e.code() == dynregret::ErrorCode::kIoError) throw;
      throw dynregret::Error(dynregret::ErrorCode::kConfigInvalid, e.what());
    }
    // accept either a bare environment table or a full config's [environment]
    const dynregret::Json& env = doc.contains("environment") ? doc["environment"] : doc;
    dynregret::EnvironmentSpec spec = dynregret::parse_environment_spec(env, path.parent_path());
    if (doc.contains("horizon") && doc["horizon"].is_number_unsigned()) {
      spec.horizon = doc["horizon"].get<size_t>();
    }
    *out = new dr_sequence{dynregret::generate(spec)};
  });
}

dr_status dr_sequence_load(const char* path, dr_sequence** out) {
  DR_REQUIRE(path != nullptr && out != nullptr, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new dr_sequence{dynregret::load_sequence_json(path)}; });
}

dr_status dr_sequence_save(const dr_sequence* seq, const char* path) {
  DR_REQUIRE(seq != nullptr && path != nullptr, "null argument");
  return guarded([&] { dynregret::save_sequence_json(seq->seq, path); });
}

void dr_sequence_free(dr_sequence* seq) { delete seq; }

size_t dr_sequence_horizon(const dr_sequence* seq) { return seq == nullptr ? 0 : seq->seq.horizon(); }

size_t dr_sequence_dimension(const dr_sequence* seq) {
  return seq == nullptr ? 0 : static_cast<size_t>(seq->seq.dimension());
}

dr_status dr_sequence_minimizer(const dr_sequence* seq, size_t t, double* out, size_t n) {
  DR_REQUIRE(seq != nullptr && out != nullptr, "null argument");
  DR_REQUIRE(t >= 1 && t <= seq->seq.horizon(), "round out of range");
  if (n != static_cast<size_t>(seq->seq.dimension())) {
    return fail(DR_ERR_DIMENSION_MISMATCH, "buffer length differs from the dimension");
  }
  const auto& x = seq->seq.minimizer(t);
  for (size_t i = 0; i < n; ++i) out[i] = x(static_cast<Eigen::Index>(i));
  return DR_OK;
}

dr_status dr_sequence_value(const dr_sequence* seq, size_t t, const double* x, size_t n,
                            double* out) {
  DR_REQUIRE(seq != nullptr && x != nullptr && out != nullptr, "null argument");
  DR_REQUIRE(t >= 1 && t <= seq->seq.horizon(), "round out of range");
  if (n != static_cast<size_t>(seq->seq.dimension())) {
    return fail(DR_ERR_DIMENSION_MISMATCH, "point length differs from the dimension");
  }
  return guarded([&] {
    const Eigen::Map<const dynregret::Vector> v(x, static_cast<Eigen::Index>(n));
    *out = seq->seq.at(t).value(v);
  });
}

}  // extern "C"
