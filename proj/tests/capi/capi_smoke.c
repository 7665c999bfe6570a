/* The public header must compile as C; drive one short experiment. */
#include "pcflow/pcflow.h"

#include <stdio.h>

int main(void)
{
  pcflow_config *config = NULL;
  pcflow_series *series = NULL;
  pcflow_analysis *analysis = NULL;
  pcflow_analysis_summary summary;
  double a[3] = {1.0, 2.0, 3.0}, b[3] = {1.0, 1.0, 1.0};
  pcflow_bland_altman_result ba;
  int rc = 1;

  if (pcflow_config_default(&config) != PCFLOW_OK) { goto done; }
  if (pcflow_config_set_noiseless(config, 1) != PCFLOW_OK) { goto done; }
  if (pcflow_simulate(config, PCFLOW_MODE_CINE, 1, &series) != PCFLOW_OK) { goto done; }
  if (pcflow_analyze(series, 0, &analysis) != PCFLOW_OK) { goto done; }
  if (pcflow_analysis_get_summary(analysis, &summary) != PCFLOW_OK) { goto done; }
  if (pcflow_bland_altman(a, b, 3, &ba) != PCFLOW_OK) { goto done; }
  printf("CINE mean flow %.1f mm^3/s, area %.2f mm^2, LoA [%.2f, %.2f]\n", summary.mean_flow_mm3_s, summary.area_mm2,
         ba.loa_low, ba.loa_high);
  if (summary.mean_flow_mm3_s > 1115.5 && summary.mean_flow_mm3_s < 1184.5) { rc = 0; }

done:
  if (rc) { fprintf(stderr, "capi smoke failed: %s\n", pcflow_last_error()); }
  pcflow_analysis_free(analysis);
  pcflow_series_free(series);
  pcflow_config_free(config);
  return rc;
}
