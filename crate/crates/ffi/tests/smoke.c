#include <math.h>
#include <stdio.h>
#include <string.h>
#include "aggdiff.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "failed: %s (%s)\n", #cond, aggdiff_last_error()); \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  double v = 0.0;
  CHECK(aggdiff_hyp2f1(1.0, 1.0, 2.0, 0.5, &v) == AGGDIFF_STATUS_OK);
  CHECK(fabs(v - 2.0 * log(2.0)) < 1e-14);

  AggdiffParams *p = NULL;
  CHECK(aggdiff_params_new(3, -1.0, 2.0, 0.0, 1.0, &p) == AGGDIFF_STATUS_OK);
  CHECK(aggdiff_params_new(3, -1.0, 2.0, 0.5, 1.0, &p) == AGGDIFF_STATUS_INVALID_ARGUMENT);
  CHECK(strlen(aggdiff_last_error()) > 0);

  AggdiffSteady *s = NULL;
  CHECK(aggdiff_steady_solve(p, 64, 0.0, &s) == AGGDIFF_STATUS_OK);
  double c = 0.0, r = 0.0;
  CHECK(aggdiff_steady_summary(s, &c, &r) == AGGDIFF_STATUS_OK);
  CHECK(fabs(r - 1.2533) < 0.05);

  AggdiffDensity *d = NULL;
  CHECK(aggdiff_steady_density(s, &d) == AGGDIFF_STATUS_OK);
  AggdiffEnergy e;
  CHECK(aggdiff_energy(p, d, &e) == AGGDIFF_STATUS_OK);
  CHECK(e.total < 0.0 && e.entropy > 0.0);

  aggdiff_density_free(d);
  aggdiff_steady_free(s);
  aggdiff_params_free(p);
  printf("ok\n");
  return 0;
}
