/* Exercises the shared library through the C header only. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "dynregret/dynregret.h"

static int failures = 0;

#define EXPECT(cond)                                                    \
  do {                                                                  \
    if (!(cond)) {                                                      \
      fprintf(stderr, "%s:%d: expected %s (%s)\n", __FILE__, __LINE__, \
              #cond, dr_last_error());                                  \
      ++failures;                                                       \
    }                                                                   \
  } while (0)

static char* read_file(const char* path) {
  FILE* f = fopen(path, "rb");
  if (f == NULL) return NULL;
  fseek(f, 0, SEEK_END);
  long n = ftell(f);
  fseek(f, 0, SEEK_SET);
  char* buf = malloc((size_t)n + 1);
  size_t got = fread(buf, 1, (size_t)n, f);
  buf[got] = '\0';
  fclose(f);
  return buf;
}

static void test_errors(void) {
  dr_experiment* exp = NULL;
  EXPECT(dr_experiment_load(DR_TEST_CONFIG_DIR "/unknown_key.toml", &exp) == DR_ERR_CONFIG_INVALID);
  EXPECT(exp == NULL);
  EXPECT(strstr(dr_last_error(), "step_size") != NULL);
  EXPECT(dr_experiment_load(DR_TEST_CONFIG_DIR "/malformed.toml", &exp) == DR_ERR_CONFIG_INVALID);
  EXPECT(dr_experiment_load(DR_TEST_CONFIG_DIR "/missing.toml", &exp) == DR_ERR_IO);
  EXPECT(dr_experiment_load(NULL, &exp) == DR_ERR_INVALID_ARGUMENT);
  EXPECT(dr_experiment_parse("{}", "yaml", NULL, &exp) == DR_ERR_INVALID_ARGUMENT);
  EXPECT(strcmp(dr_status_name(DR_ERR_RHO_OUT_OF_RANGE), "RhoOutOfRange") == 0);
  EXPECT(dr_version()[0] != '\0');

  EXPECT(dr_experiment_load(DR_TEST_CONFIG_DIR "/walk_random_comp.toml", &exp) == DR_OK);
  char* table = NULL;
  EXPECT(dr_compare_regularities(exp, "csv", &table) == DR_ERR_UNSUPPORTED_ENVIRONMENT);
  EXPECT(table == NULL);
  dr_experiment_free(exp);
}

static void test_run(const char* out_dir) {
  dr_experiment* toml = NULL;
  dr_experiment* json = NULL;
  EXPECT(dr_experiment_load(DR_TEST_CONFIG_DIR "/walk.toml", &toml) == DR_OK);
  char* text = read_file(DR_TEST_CONFIG_DIR "/walk.json");
  EXPECT(text != NULL);
  EXPECT(dr_experiment_parse(text, "json", DR_TEST_CONFIG_DIR, &json) == DR_OK);
  free(text);

  dr_summary* a = NULL;
  dr_summary* b = NULL;
  EXPECT(dr_experiment_run(toml, 1, &a) == DR_OK);
  EXPECT(dr_experiment_run(json, 2, &b) == DR_OK);
  EXPECT(dr_summary_run_count(a) == 6);
  EXPECT(dr_summary_failed_bounds(a) == 0);

  char* ja = NULL;
  char* jb = NULL;
  EXPECT(dr_summary_to_json(a, &ja) == DR_OK);
  EXPECT(dr_summary_to_json(b, &jb) == DR_OK);
  EXPECT(ja != NULL && jb != NULL && strcmp(ja, jb) == 0);
  dr_string_free(ja);
  dr_string_free(jb);

  for (size_t i = 0; i < dr_summary_run_count(a); ++i) {
    dr_run_info info;
    EXPECT(dr_summary_run_info(a, i, &info) == DR_OK);
    EXPECT(info.horizon == 50);
    EXPECT(info.cumulative_regret >= 0.0);
    for (size_t k = 0; k < info.bound_count; ++k) {
      dr_bound_info bi;
      EXPECT(dr_summary_bound_info(a, i, k, &bi) == DR_OK);
      EXPECT(bi.admissible);
      EXPECT(bi.passed);
      EXPECT(bi.measured <= bi.bound);
      EXPECT(!isnan(bi.slack));
    }
    if (strcmp(info.algorithm, "oon") == 0) EXPECT(info.bound_count == 2);
  }
  dr_run_info bad;
  EXPECT(dr_summary_run_info(a, 6, &bad) == DR_ERR_INVALID_ARGUMENT);

  char* csv = NULL;
  EXPECT(dr_run_csv(a, 0, &csv) == DR_OK);
  EXPECT(csv != NULL && strncmp(csv, "t,per_round_regret,", 19) == 0);
  dr_string_free(csv);

  EXPECT(dr_summary_write(a, toml, out_dir, DR_WRITE_CSV | DR_WRITE_JSON) == DR_OK);
  char path[4096];
  snprintf(path, sizeof path, "%s/summary.json", out_dir);
  char* written = read_file(path);
  EXPECT(written != NULL && strstr(written, "dynregret.summary/1") != NULL);
  free(written);

  EXPECT(dr_experiment_set_horizon(toml, 1) == DR_OK);
  EXPECT(dr_experiment_set_seed(toml, 9) == DR_OK);
  dr_summary* c = NULL;
  EXPECT(dr_experiment_run(toml, 0, &c) == DR_OK);
  EXPECT(dr_summary_run_count(c) == 3);
  EXPECT(dr_experiment_set_horizon(toml, 0) == DR_ERR_CONFIG_INVALID);

  dr_summary_free(a);
  dr_summary_free(b);
  dr_summary_free(c);
  dr_experiment_free(toml);
  dr_experiment_free(json);
}

static void test_sequences(const char* out_dir) {
  dr_sequence* seq = NULL;
  EXPECT(dr_sequence_generate(DR_TEST_CONFIG_DIR "/env_spec.toml", &seq) == DR_OK);
  EXPECT(dr_sequence_horizon(seq) == 30);
  EXPECT(dr_sequence_dimension(seq) == 2);

  char path[4096];
  snprintf(path, sizeof path, "%s/seq.json", out_dir);
  EXPECT(dr_sequence_save(seq, path) == DR_OK);
  dr_sequence* back = NULL;
  EXPECT(dr_sequence_load(path, &back) == DR_OK);

  double m1[2], m2[2];
  for (size_t t = 1; t <= 30; ++t) {
    EXPECT(dr_sequence_minimizer(seq, t, m1, 2) == DR_OK);
    EXPECT(dr_sequence_minimizer(back, t, m2, 2) == DR_OK);
    EXPECT(m1[0] == m2[0] && m1[1] == m2[1]);
    double v = -1.0;
    EXPECT(dr_sequence_value(seq, t, m1, 2, &v) == DR_OK);
    EXPECT(v == 0.0);
  }
  EXPECT(dr_sequence_minimizer(seq, 0, m1, 2) == DR_ERR_INVALID_ARGUMENT);
  EXPECT(dr_sequence_minimizer(seq, 1, m1, 3) == DR_ERR_DIMENSION_MISMATCH);
  dr_sequence_free(seq);
  dr_sequence_free(back);
}

static void test_compare(void) {
  dr_experiment* exp = NULL;
  EXPECT(dr_experiment_parse(
             "sweep_horizons = [10, 100]\n[environment]\nkind = \"alternating_offset\"\n"
             "dimension = 2\n",
             "toml", NULL, &exp) == DR_OK);
  char* table = NULL;
  EXPECT(dr_compare_regularities(exp, "csv", &table) == DR_OK);
  EXPECT(table != NULL && strcmp(table, "T,V_T,V_T_exactness,C2_T\n10,9,exact,0\n100,99,exact,0\n") == 0);
  dr_string_free(table);
  dr_summary* sum = NULL;
  EXPECT(dr_experiment_run(exp, 0, &sum) == DR_ERR_CONFIG_INVALID);
  EXPECT(sum == NULL);
  dr_experiment_free(exp);
}

int main(int argc, char** argv) {
  if (argc < 2) {
    fprintf(stderr, "usage: test_capi <scratch dir>\n");
    return 2;
  }
  test_errors();
  test_run(argv[1]);
  test_sequences(argv[1]);
  test_compare();
  if (failures == 0) printf("test_capi: all checks passed\n");
  return failures == 0 ? 0 : 1;
}
