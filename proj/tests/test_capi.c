/* Exercises the shared library through its C header only. */
#include <math.h>
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "svkit/svkit.h"

static int failures = 0;

#define EXPECT(cond)                                                \
  do {                                                              \
    if (!(cond)) {                                                  \
      fprintf(stderr, "%s:%d: %s\n", __FILE__, __LINE__, #cond);    \
      ++failures;                                                   \
    }                                                               \
  } while (0)

static int close_to(double a, double b, double tol) { return fabs(a - b) <= tol; }

static void families(void) {
  svk_family* g = NULL;
  EXPECT(svk_family_catalog("grushin", &g) == SVK_OK);
  int d = 0, m = 0;
  EXPECT(svk_family_dims(g, &d, &m) == SVK_OK && d == 2 && m == 2);
  double x[2] = {2.0, 5.0}, out[4];
  EXPECT(svk_field_eval(g, 1, x, out) == SVK_OK && out[0] == 0.0 && out[1] == 2.0);
  EXPECT(svk_field_jacobian(g, 1, x, out) == SVK_OK && out[2] == 1.0 && out[0] == 0.0);
  EXPECT(svk_lie_bracket(g, 0, 1, x, out) == SVK_OK && out[0] == 0.0 && out[1] == 1.0);
  EXPECT(svk_field_eval(g, 7, x, out) == SVK_E_INDEX_OUT_OF_RANGE);
  EXPECT(strlen(svk_last_error()) > 0);

  double origin[2] = {0, 0};
  int rank = 0;
  EXPECT(svk_hormander_rank(g, origin, 1, 1e-8, &rank) == SVK_OK && rank == 1);
  EXPECT(svk_hormander_rank(g, origin, 2, 1e-8, &rank) == SVK_OK && rank == 2);

  double p[2] = {1, 1}, X[4] = {0, 0, 0, 0}, q[2], H[4];
  double x2[2] = {2, 0};
  EXPECT(svk_horizontal_jet(g, x2, p, X, q, H) == SVK_OK);
  EXPECT(q[0] == 1.0 && q[1] == 2.0);
  EXPECT(close_to(H[1], 0.5, 1e-15) && close_to(H[2], 0.5, 1e-15));

  double lo[2] = {-1, -1}, hi[2] = {1, 1}, far[2] = {3, 0};
  EXPECT(svk_family_set_domain(g, lo, hi) == SVK_OK);
  EXPECT(svk_field_eval(g, 0, far, out) == SVK_E_OUT_OF_DOMAIN);
  svk_family_free(g);

  svk_family* f = NULL;
  EXPECT(svk_family_catalog("nope", &f) == SVK_E_INVALID_ARGUMENT && f == NULL);
  EXPECT(svk_family_from_json("{\"dim\": 2", &f) == SVK_E_PARSE);
  EXPECT(svk_family_from_json("{\"dim\": 2, \"count\": 1, \"fields\": [[[{\"exponents\": [0, 0], \"coeff\": 1}], []]]}",
                              &f) == SVK_OK);
  EXPECT(svk_family_dims(f, &d, &m) == SVK_OK && d == 2 && m == 1);
  svk_family_free(f);
  EXPECT(svk_family_dims(NULL, &d, &m) == SVK_E_NULL_POINTER);
  svk_family_free(NULL);
}

static void operators(void) {
  double M[4] = {2, 0, 0, -3}, v = 0;
  EXPECT(svk_pucci(M, 2, 1, 2, 1, &v) == SVK_OK && close_to(v, 4, 1e-12));
  EXPECT(svk_pucci(M, 2, 1, 2, -1, &v) == SVK_OK && close_to(v, -1, 1e-12));
  double A[4] = {0, 1, 0, 0};
  EXPECT(svk_pucci(A, 2, 1, 2, 1, &v) == SVK_E_NOT_SYMMETRIC);

  svk_family* e = NULL;
  svk_family_catalog("euclidean:2", &e);
  svk_operator* op = NULL;
  EXPECT(svk_operator_from_json(e, "{\"kind\": \"linear\", \"A\": [[1, 0], [0, 0]]}", &op) == SVK_OK);
  int d = 0, n = 0;
  EXPECT(svk_operator_dims(op, &d, &n) == SVK_OK && d == 2 && n == 2);
  double x[2] = {0, 0}, p[2] = {0, 0}, X[4] = {1, 0, 0, 1};
  EXPECT(svk_operator_eval(op, x, 0, p, X, &v) == SVK_OK && v == -1.0);
  double e1[2] = {1, 0}, e2[2] = {0, 1};
  svk_verdict verdict;
  EXPECT(svk_certify_subunit(op, x, e1, SVK_SUBUNIT_PLUS, &verdict) == SVK_OK && verdict == SVK_CERTIFIED);
  EXPECT(svk_certify_subunit(op, x, e2, SVK_SUBUNIT_PLUS, &verdict) == SVK_OK && verdict == SVK_REFUTED);
  double zero[2] = {0, 0};
  EXPECT(svk_certify_subunit(op, x, zero, SVK_SUBUNIT_PLUS, &verdict) == SVK_E_INVALID_ARGUMENT);
  svk_operator_free(op);
  op = NULL;
  EXPECT(svk_operator_from_json(e, "{\"kind\": \"unknown\"}", &op) != SVK_OK && op == NULL);
  svk_family_free(e);
}

static void control(void) {
  svk_family* h = NULL;
  svk_family_catalog("heisenberg1", &h);
  const double s = 0.1;
  double betas[8] = {1, 0, 0, 1, -1, 0, 0, -1}, durations[4] = {s, s, s, s}, x0[3] = {0, 0, 0}, y[3];
  int exited = -1;
  EXPECT(svk_integrate(h, x0, 4, betas, durations, 4 * s, 0.005, y, &exited) == SVK_OK);
  EXPECT(exited == 0);
  EXPECT(close_to(y[2], -4 * s * s, s * s * s) && close_to(y[0], 0, 1e-12));
  double too_big[2] = {1, 1};
  EXPECT(svk_integrate(h, x0, 1, too_big, durations, s, 0.01, y, &exited) == SVK_E_INVALID_ARGUMENT);

  svk_family* g = NULL;
  svk_family_catalog("grushin", &g);
  double a[2] = {-1, 0}, b[2] = {1, 1}, lo[2] = {-2, -2}, hi[2] = {2, 2};
  int res[2] = {32, 32}, ok = 0;
  double dur = 0, err = 0;
  EXPECT(svk_btc_connect(g, a, b, lo, hi, res, 20, 0, &ok, &dur, &err) == SVK_OK);
  EXPECT(ok == 1 && dur > 2.0 && err <= sqrt(2.0) * 4.0 / 32);
  svk_family_free(g);
  svk_family_free(h);
}

static void catalog_and_scenarios(void) {
  size_t need = 0;
  EXPECT(svk_catalog(NULL, 0, &need) == SVK_E_BUFFER_TOO_SMALL && need > 1);
  char* buf = malloc(need);
  EXPECT(svk_catalog(buf, need, &need) == SVK_OK);
  EXPECT(strstr(buf, "heisenberg1") != NULL && strstr(buf, "smp-propagate") != NULL);
  free(buf);
  EXPECT(strcmp(svk_status_name(SVK_E_PARSE), "") != 0);
  EXPECT(strlen(svk_version()) > 0);

  int code = -1;
  uint64_t seed = 5;
  EXPECT(svk_run_scenario(SVKIT_SCENARIO_DIR "/propagation-line.json", "capi-out", NULL, &seed, &code) == SVK_OK);
  EXPECT(code == 0);
  EXPECT(svk_run_scenario(SVKIT_SCENARIO_DIR "/laplacian-refusal.json", "capi-out", "csv", NULL, &code) == SVK_OK);
  EXPECT(code == 1);
  EXPECT(svk_run_scenario(SVKIT_SCENARIO_DIR "/malformed.json", "capi-out", NULL, NULL, &code) == SVK_OK);
  EXPECT(code == 2);
  EXPECT(svk_run_scenario(SVKIT_SCENARIO_DIR "/propagation-line.json", "capi-out", "xml", NULL, &code) ==
         SVK_E_INVALID_ARGUMENT);

  svk_grid* grid = NULL;
  EXPECT(svk_grid_load("capi-out/does-not-exist.json", &grid) == SVK_E_IO && grid == NULL);
}

int main(void) {
  families();
  operators();
  control();
  catalog_and_scenarios();
  if (failures) fprintf(stderr, "%d check(s) failed\n", failures);
  else printf("C API checks passed\n");
  return failures ? 1 : 0;
}
