/* C interface to the pcflow phase-contrast flow simulator and analysis
 * pipeline. Every object is an opaque handle created by a pcflow_* call and
 * released with the matching *_free. Functions that can fail return a
 * pcflow_status; on failure pcflow_last_error() describes the problem for the
 * calling thread until that thread's next failing call. */
#ifndef PCFLOW_PCFLOW_H
#define PCFLOW_PCFLOW_H

#include <stddef.h>
#include <stdint.h>

#if defined(PCFLOW_BUILDING_LIBRARY)
#define PCFLOW_API __attribute__((visibility("default")))
#else
#define PCFLOW_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define PCFLOW_CYCLE_POINTS 32

typedef enum pcflow_status {
  PCFLOW_OK = 0,
  PCFLOW_ERR_INVALID_ARGUMENT = 1,
  PCFLOW_ERR_SEGMENTATION = 2,
  PCFLOW_ERR_INSUFFICIENT_DATA = 3,
  PCFLOW_ERR_IO = 4,
  PCFLOW_ERR_CONFIG = 5,
  PCFLOW_ERR_INTERNAL = 6
} pcflow_status;

typedef enum pcflow_mode { PCFLOW_MODE_CINE = 0, PCFLOW_MODE_EPI = 1 } pcflow_mode;

typedef struct pcflow_config pcflow_config;
typedef struct pcflow_series pcflow_series;
typedef struct pcflow_analysis pcflow_analysis;
typedef struct pcflow_validation pcflow_validation;
typedef struct pcflow_sweep pcflow_sweep;

typedef struct pcflow_series_info {
  pcflow_mode mode;
  size_t width;
  size_t height;
  size_t frames;
  double pixel_size_mm;
  double venc_mm_s;
  double noise_sigma_ref;
  uint64_t seed;
} pcflow_series_info;

typedef struct pcflow_analysis_summary {
  pcflow_mode mode;
  double mean_flow_mm3_s;
  double area_mm2;
  size_t samples;
  int n_cycles;          /* EPI only, 0 for CINE */
  double period_estimate_s; /* EPI only */
} pcflow_analysis_summary;

typedef struct pcflow_run_summary {
  double mean_flow_mm3_s;
  double sd_flow_mm3_s;
  double cv_percent; /* NaN with fewer than two repeats */
  double area_mm2;
  int in_flow_ci;
  int in_area_ci;
  int repeats;
} pcflow_run_summary;

typedef struct pcflow_bland_altman_result {
  double mean_diff;
  double sd_diff;
  double loa_low;
  double loa_high;
  int agreement; /* every difference inside [loa_low, loa_high] */
} pcflow_bland_altman_result;

typedef struct pcflow_sweep_record {
  double pixel_size_mm;
  pcflow_mode mode;
  int repeat;
  uint64_t seed;
  int ok;
  double area_mm2;
  double mean_flow_mm3_s;
} pcflow_sweep_record;

PCFLOW_API const char *pcflow_version(void);
PCFLOW_API const char *pcflow_last_error(void);
PCFLOW_API const char *pcflow_status_string(pcflow_status status);

/* Configuration */
PCFLOW_API pcflow_status pcflow_config_default(pcflow_config **out);
PCFLOW_API pcflow_status pcflow_config_load(const char *path, pcflow_config **out);
PCFLOW_API pcflow_status pcflow_config_write(const pcflow_config *config, const char *path);
PCFLOW_API pcflow_status pcflow_config_set_seed(pcflow_config *config, uint64_t base_seed);
PCFLOW_API pcflow_status pcflow_config_set_noiseless(pcflow_config *config, int noiseless);
PCFLOW_API pcflow_status pcflow_config_set_output_dir(pcflow_config *config, const char *dir);
PCFLOW_API pcflow_status pcflow_config_set_threads(pcflow_config *config, int threads);
PCFLOW_API pcflow_status pcflow_config_set_repeats(pcflow_config *config, int n_repeats);
/* Borrowed pointer, valid until the next change to or free of config. */
PCFLOW_API const char *pcflow_config_output_dir(const pcflow_config *config);
PCFLOW_API uint64_t pcflow_config_seed(const pcflow_config *config);
PCFLOW_API void pcflow_config_free(pcflow_config *config);

/* Acquisition */
PCFLOW_API pcflow_status pcflow_simulate(const pcflow_config *config, pcflow_mode mode, uint64_t seed,
                                         pcflow_series **out);
PCFLOW_API pcflow_status pcflow_series_save(const pcflow_series *series, const char *dir);
PCFLOW_API pcflow_status pcflow_series_load(const char *dir, pcflow_series **out);
PCFLOW_API pcflow_status pcflow_series_get_info(const pcflow_series *series, pcflow_series_info *info);
PCFLOW_API void pcflow_series_free(pcflow_series *series);

/* Single-series analysis: segmentation, calibration, flow curve, cycle */
PCFLOW_API pcflow_status pcflow_analyze(const pcflow_series *series, size_t vessel_tube, pcflow_analysis **out);
PCFLOW_API pcflow_status pcflow_analysis_get_summary(const pcflow_analysis *analysis,
                                                     pcflow_analysis_summary *summary);
/* Copies up to capacity flow samples; *count receives the full length. */
PCFLOW_API pcflow_status pcflow_analysis_get_curve(const pcflow_analysis *analysis, double *times, double *flows,
                                                   size_t capacity, size_t *count);
/* EPI only: the 32-point average cycle and its per-point SD. */
PCFLOW_API pcflow_status pcflow_analysis_get_cycle(const pcflow_analysis *analysis,
                                                   double flows[PCFLOW_CYCLE_POINTS],
                                                   double sds[PCFLOW_CYCLE_POINTS]);
PCFLOW_API pcflow_status pcflow_analysis_write(const pcflow_analysis *analysis, const char *dir);
PCFLOW_API void pcflow_analysis_free(pcflow_analysis *analysis);

/* Repeated-acquisition validation experiment */
PCFLOW_API pcflow_status pcflow_run_validation(const pcflow_config *config, pcflow_validation **out);
PCFLOW_API pcflow_status pcflow_validation_get_summary(const pcflow_validation *validation, pcflow_mode mode,
                                                       pcflow_run_summary *summary);
PCFLOW_API pcflow_status pcflow_validation_get_bland_altman(const pcflow_validation *validation,
                                                            pcflow_bland_altman_result *result);
PCFLOW_API pcflow_status pcflow_validation_get_curves(const pcflow_validation *validation,
                                                      double cine[PCFLOW_CYCLE_POINTS],
                                                      double epi[PCFLOW_CYCLE_POINTS],
                                                      double epi_sd[PCFLOW_CYCLE_POINTS]);
PCFLOW_API int pcflow_validation_gate(const pcflow_validation *validation);
PCFLOW_API pcflow_status pcflow_validation_write(const pcflow_validation *validation, const char *dir);
PCFLOW_API void pcflow_validation_free(pcflow_validation *validation);

/* Pixel-size sweep */
PCFLOW_API pcflow_status pcflow_run_sweep(const pcflow_config *config, pcflow_sweep **out);
PCFLOW_API size_t pcflow_sweep_record_count(const pcflow_sweep *sweep);
PCFLOW_API pcflow_status pcflow_sweep_get_record(const pcflow_sweep *sweep, size_t index,
                                                 pcflow_sweep_record *record);
PCFLOW_API int pcflow_sweep_gate(const pcflow_sweep *sweep);
PCFLOW_API pcflow_status pcflow_sweep_write(const pcflow_sweep *sweep, const char *dir);
PCFLOW_API void pcflow_sweep_free(pcflow_sweep *sweep);

/* Re-draw SVG figures from the CSVs in in_dir. */
PCFLOW_API pcflow_status pcflow_render(const char *in_dir, const char *out_dir);

/* Statistics on caller-owned arrays */
PCFLOW_API pcflow_status pcflow_bland_altman(const double *a, const double *b, size_t n,
                                             pcflow_bland_altman_result *result);
PCFLOW_API pcflow_status pcflow_coefficient_of_variation(const double *values, size_t n, double *cv_percent);

#ifdef __cplusplus
}
#endif

#endif
