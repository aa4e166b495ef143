/* The public header must compile as plain C. */
#include <stdio.h>
#include <string.h>

#include "eigencurve/eigencurve.h"

int main(void) {
  ec_trace_config cfg;
  ec_session* s = NULL;
  ec_trace_config_default(&cfg);
  cfg.use_oracle = 1;
  if (ec_session_create("diag5", 0, 0, NULL, 0.0, 1.0, &cfg, &s) != EC_OK) return 1;
  if (ec_session_trace(s, NULL, NULL) != EC_OK) return 1;
  int n = 0;
  ec_session_dimension(s, &n);
  ec_session_free(s);
  if (n != 5) return 1;
  if (ec_session_create("nope", 0, 0, NULL, 0.0, 1.0, NULL, &s) != EC_ERR_INVALID_ARGUMENT) return 1;
  if (strlen(ec_last_error()) == 0) return 1;
  printf("eigencurve %s from C: ok\n", ec_version());
  return 0;
}
