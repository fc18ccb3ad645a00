// Command-line front end. Talks to the library only through dynregret.h.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dynregret/dynregret.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBoundFailed = 3;

struct Options {
  std::string config;
  std::optional<uint64_t> seed;
  std::optional<size_t> horizon;
  std::string out_dir;
  std::string format;
  bool strict = false;
  unsigned threads = 0;
};

bool is_config_status(dr_status s) {
  return s == DR_ERR_CONFIG_INVALID || s == DR_ERR_PARSE || s == DR_ERR_UNSUPPORTED_ENVIRONMENT;
}

int report(dr_status s, const char* what) {
  std::fprintf(stderr, "dynregret: %s failed: %s\n", what, dr_last_error());
  return is_config_status(s) ? kExitConfig : kExitError;
}

std::filesystem::path output_root(const Options& o) {
  if (!o.out_dir.empty()) return o.out_dir;
  if (const char* env = std::getenv("DYNREGRET_OUT_DIR"); env != nullptr && *env != '\0') return env;
  return ".";
}

struct Experiment {
  dr_experiment* handle = nullptr;
  ~Experiment() { dr_experiment_free(handle); }
};

struct Summary {
  dr_summary* handle = nullptr;
  ~Summary() { dr_summary_free(handle); }
};

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { dr_string_free(s); }
};

// Loads the config and applies --seed / --horizon. Returns an exit code on failure.
std::optional<int> load(const Options& o, Experiment& exp) {
  dr_status s = dr_experiment_load(o.config.c_str(), &exp.handle);
  if (s != DR_OK) {
    report(s, "loading config");
    return kExitConfig;
  }
  if (o.seed && (s = dr_experiment_set_seed(exp.handle, *o.seed)) != DR_OK) {
    return report(s, "--seed");
  }
  if (o.horizon && (s = dr_experiment_set_horizon(exp.handle, *o.horizon)) != DR_OK) {
    return report(s, "--horizon");
  }
  return std::nullopt;
}

int print_summary(const Summary& sum, bool as_json) {
  OwnedString text;
  const dr_status s = as_json ? dr_summary_to_json(sum.handle, &text.s)
                              : dr_summary_text(sum.handle, &text.s);
  if (s != DR_OK) return report(s, "formatting summary");
  std::fputs(text.s, stdout);
  return kExitOk;
}

int cmd_run(const Options& o, bool write_outputs) {
  Experiment exp;
  if (auto code = load(o, exp)) return *code;
  Summary sum;
  if (dr_status s = dr_experiment_run(exp.handle, o.threads, &sum.handle); s != DR_OK) {
    return report(s, "run");
  }
  if (write_outputs) {
    unsigned flags = DR_WRITE_CSV | DR_WRITE_JSON;
    if (o.format == "csv") flags = DR_WRITE_CSV;
    if (o.format == "json") flags = DR_WRITE_JSON;
    const auto root = output_root(o);
    if (dr_status s = dr_summary_write(sum.handle, exp.handle, root.string().c_str(), flags);
        s != DR_OK) {
      return report(s, "writing outputs");
    }
  }
  if (int code = print_summary(sum, !write_outputs && o.format == "json"); code != kExitOk) {
    return code;
  }
  if (o.strict && dr_summary_failed_bounds(sum.handle) > 0) return kExitBoundFailed;
  return kExitOk;
}

int cmd_compare(const Options& o) {
  Experiment exp;
  if (auto code = load(o, exp)) return *code;
  const std::string format = o.format.empty() ? "csv" : o.format;
  OwnedString table;
  if (dr_status s = dr_compare_regularities(exp.handle, format.c_str(), &table.s); s != DR_OK) {
    return report(s, "compare-regularities");
  }
  std::fputs(table.s, stdout);
  if (!o.out_dir.empty() || std::getenv("DYNREGRET_OUT_DIR") != nullptr) {
    const auto path = output_root(o) / ("regularities." + format);
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    out << table.s;
    if (!out) {
      std::fprintf(stderr, "dynregret: cannot write %s\n", path.string().c_str());
      return kExitError;
    }
  }
  return kExitOk;
}

int cmd_gen_env(const std::string& spec, const std::string& output) {
  dr_sequence* seq = nullptr;
  dr_status s = dr_sequence_generate(spec.c_str(), &seq);
  if (s != DR_OK) return report(s, "gen-env");
  s = dr_sequence_save(seq, output.c_str());
  const size_t horizon = dr_sequence_horizon(seq);
  const size_t dim = dr_sequence_dimension(seq);
  dr_sequence_free(seq);
  if (s != DR_OK) return report(s, "writing sequence");
  std::printf("wrote %s (T=%zu, n=%zu)\n", output.c_str(), horizon, dim);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dynamic-regret experiments for online learners on strongly convex losses"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(dr_version()));

  Options o;
  auto add_common = [&o](CLI::App* sub) {
    sub->add_option("config", o.config, "Experiment config (.toml or .json)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Run a single seed instead of the configured list");
    sub->add_option("--horizon", o.horizon, "Override the horizon T")->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", o.out_dir, "Output root (default: $DYNREGRET_OUT_DIR or .)");
    sub->add_option("--format", o.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", o.threads, "Worker threads (0 = all cores)");
    sub->add_flag("--strict", o.strict, "Exit with 3 when any admissible bound check fails");
  };

  auto* run = app.add_subcommand("run", "Run every learner and seed, write CSV/JSON artifacts");
  add_common(run);
  auto* check = app.add_subcommand("check-bounds", "Run and print bound verdicts only");
  add_common(check);
  auto* compare = app.add_subcommand("compare-regularities",
                                     "Tabulate V_T against C*_2,T over a horizon sweep");
  add_common(compare);

  std::string spec, output;
  auto* gen = app.add_subcommand("gen-env", "Generate a loss sequence and save it as JSON");
  gen->add_option("spec", spec, "Environment spec (.toml or .json)")
      ->required()
      ->check(CLI::ExistingFile);
  gen->add_option("-o,--output", output, "Output sequence file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    // CLI11 reports usage errors as 105/106/...; fold them into the config-error code
    return code == 0 ? kExitOk : kExitConfig;
  }

  if (*run) return cmd_run(o, true);
  if (*check) return cmd_run(o, false);
  if (*compare) return cmd_compare(o);
  if (*gen) return cmd_gen_env(spec, output);
  return kExitError;
}
