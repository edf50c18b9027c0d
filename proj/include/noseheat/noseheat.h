/*
 * noseheat C API.
 *
 * Objects are opaque handles created by nh_*_create / nh_*_read / the
 * pipeline calls and released with the matching nh_*_free. Every fallible
 * call returns an nh_status; on failure the out-parameters are untouched and
 * nh_last_error() holds a message for the calling thread.
 */
#ifndef NOSEHEAT_H
#define NOSEHEAT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(NOSEHEAT_BUILDING_LIBRARY)
#    define NH_API __declspec(dllexport)
#  else
#    define NH_API __declspec(dllimport)
#  endif
#else
#  define NH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum nh_status {
  NH_OK = 0,
  NH_ERR_INVALID_ARGUMENT = 1,
  NH_ERR_IO = 2,
  NH_ERR_BAD_MAGIC = 3,
  NH_ERR_DIMENSION_MISMATCH = 4,
  NH_ERR_NON_MONOTONIC_TIME = 5,
  NH_ERR_OUT_OF_RANGE_TEMP = 6,
  NH_ERR_INVALID_SEQUENCE = 7,
  NH_ERR_SEED_OUT_OF_BOUNDS = 8,
  NH_ERR_EMPTY_ROI = 9,
  NH_ERR_EMPTY_SEQUENCE = 10,
  NH_ERR_LENGTH_MISMATCH = 11,
  NH_ERR_TOO_SHORT = 12,
  NH_ERR_ALL_OUTLIERS = 13,
  NH_ERR_RATE_TOO_LOW = 14,
  NH_ERR_CONSTANT_SIGNAL = 15,
  NH_ERR_CONSTANT_SERIES = 16,
  NH_ERR_ZERO_VARIANCE = 17,
  NH_ERR_INCOMPLETE_TABLE = 18,
  NH_ERR_DEGENERATE_VARIANCE = 19,
  NH_ERR_INVALID_SPEC = 20,
  NH_ERR_INTERNAL = 99
} nh_status;

NH_API const char* nh_version(void);
NH_API const char* nh_status_name(nh_status status);
/* Message of the most recent failure on this thread ("" if none). */
NH_API const char* nh_last_error(void);
/* Process exit code for a status: 0 ok, 1 usage, 2 io/format, 3 geometry,
 * 4 degenerate signal, 5 statistics table shape. */
NH_API int nh_exit_code(nh_status status);

/* ---- frames ------------------------------------------------------------ */

typedef struct nh_sequence nh_sequence;

NH_API nh_status nh_sequence_read(const char* path, nh_sequence** out);
NH_API nh_status nh_sequence_write(const nh_sequence* seq, const char* path);
NH_API nh_status nh_sequence_write_csv(const nh_sequence* seq, const char* dir);
NH_API void nh_sequence_free(nh_sequence* seq);
NH_API size_t nh_sequence_frame_count(const nh_sequence* seq);
NH_API size_t nh_sequence_width(const nh_sequence* seq);
NH_API size_t nh_sequence_height(const nh_sequence* seq);
NH_API float nh_sequence_rate(const nh_sequence* seq);
NH_API double nh_sequence_timestamp(const nh_sequence* seq, size_t frame);
/* Row-major temperatures of one frame; valid while seq lives. */
NH_API const float* nh_sequence_frame_data(const nh_sequence* seq, size_t frame);

/* ---- tracking ---------------------------------------------------------- */

typedef struct nh_roi {
  double center_x;
  double center_y;
  int width;
  int height;
} nh_roi;

typedef enum nh_template_update { NH_TEMPLATE_ANCHOR = 0, NH_TEMPLATE_BLEND = 1 } nh_template_update;

typedef struct nh_tracker_config {
  int max_step;
  double min_confidence;
  nh_template_update update;
  double blend_alpha;
} nh_tracker_config;

typedef struct nh_trajectory nh_trajectory;

NH_API nh_tracker_config nh_tracker_config_default(void);

/* ROI around the seed on frame 0; scale factors multiply the 9x9 small ROI. */
NH_API nh_status nh_select_large_roi(const nh_sequence* seq, double seed_x, double seed_y,
                                     double scale_w, double scale_h, nh_roi* out);
NH_API nh_status nh_track(const nh_sequence* seq, const nh_roi* initial,
                          const nh_tracker_config* cfg, nh_trajectory** out);
NH_API void nh_trajectory_free(nh_trajectory* traj);
NH_API size_t nh_trajectory_length(const nh_trajectory* traj);
NH_API nh_status nh_trajectory_at(const nh_trajectory* traj, size_t frame, nh_roi* roi,
                                  double* confidence, int* low_confidence);
NH_API nh_status nh_trajectory_write_csv(const nh_trajectory* traj, const nh_sequence* seq,
                                         const char* path);

/* ---- signals ----------------------------------------------------------- */

typedef struct nh_signal nh_signal;

typedef struct nh_outlier_config {
  double g;
  double window_fraction;
  double min_window_seconds;
} nh_outlier_config;

typedef struct nh_norm_range {
  double min;
  double max;
} nh_norm_range;

NH_API nh_outlier_config nh_outlier_config_default(void);

NH_API nh_status nh_signal_create(const double* samples, size_t n, double sample_rate,
                                  nh_signal** out);
NH_API nh_status nh_signal_extract(const nh_sequence* seq, const nh_trajectory* traj,
                                   nh_signal** out);
NH_API nh_status nh_signal_read_csv(const char* path, nh_signal** out);
NH_API nh_status nh_signal_write_csv(const nh_signal* sig, const char* path);
NH_API nh_status nh_signal_clone(const nh_signal* sig, nh_signal** out);
NH_API void nh_signal_free(nh_signal* sig);
NH_API size_t nh_signal_length(const nh_signal* sig);
NH_API const double* nh_signal_samples(const nh_signal* sig);
NH_API double nh_signal_rate(const nh_signal* sig);
NH_API int nh_signal_is_filtered(const nh_signal* sig);
NH_API int nh_signal_is_normalized(const nh_signal* sig);

/* removed_count and window_length may be NULL. */
NH_API nh_status nh_reject_outliers(const nh_signal* sig, const nh_outlier_config* cfg,
                                    nh_signal** out, size_t* removed_count,
                                    size_t* window_length);
NH_API nh_status nh_lowpass(const nh_signal* sig, double cutoff_hz, nh_signal** out);
NH_API nh_status nh_resample(const nh_signal* sig, size_t target_n, nh_signal** out);
NH_API nh_status nh_sample_range(const nh_signal* const* sigs, size_t count, nh_norm_range* out);
NH_API nh_status nh_normalize(const nh_signal* sig, nh_norm_range range, nh_signal** out);

/* ---- metrics ----------------------------------------------------------- */

#define NH_METRIC_COUNT 16

typedef struct nh_metric_set {
  double values[NH_METRIC_COUNT]; /* order of nh_metric_name(0..15) */
} nh_metric_set;

typedef struct nh_person_context {
  nh_norm_range original;
  nh_norm_range lowpassed;
} nh_person_context;

/* "TD", "STV", "SDSTV", "SDTV", "TD_n", ..., "SDTV_Ln"; NULL out of range. */
NH_API const char* nh_metric_name(size_t index);

NH_API nh_status nh_td(const nh_signal* sig, double* out);
NH_API nh_status nh_stv(const nh_signal* sig, double* slope, double* intercept,
                        double* residual_rms);
NH_API nh_status nh_sdstv(const nh_signal* sig, double* out);
NH_API nh_status nh_sdtv(const nh_signal* sig, double* out);
NH_API nh_status nh_person_context_compute(const nh_signal* const* sigs, size_t count,
                                           double cutoff_hz, nh_person_context* out);
NH_API nh_status nh_metric_set_compute(const nh_signal* nonfiltered,
                                       const nh_person_context* person, double cutoff_hz,
                                       nh_metric_set* out);
NH_API nh_status nh_psqi(const nh_signal* sig, double f_min, double f_max, double* out);

/* ---- statistics -------------------------------------------------------- */

typedef struct nh_anova_result {
  double F;
  int df_effect;
  int df_error;
  double p;
  double partial_eta_sq;
} nh_anova_result;

typedef struct nh_t_result {
  double t;
  int df;
  double p;
} nh_t_result;

NH_API nh_status nh_pearson(const double* x, const double* y, size_t n, double* r);
/* table is row-major: participants x conditions. */
NH_API nh_status nh_rm_anova(const double* table, size_t participants, size_t conditions,
                             nh_anova_result* out);
NH_API nh_status nh_paired_t(const double* x, const double* y, size_t n, nh_t_result* out);
NH_API nh_status nh_bonferroni(const double* p_values, size_t count, size_t m, double* out);

/* Session comparison: add one record per participant x session, then run. */
typedef struct nh_compare nh_compare;
typedef struct nh_report nh_report;

typedef struct nh_report_row {
  const char* metric;
  int has_anova; /* 0 when the error variance vanishes */
  nh_anova_result anova;
  const char* stars;
  size_t posthoc_count;
} nh_report_row;

typedef struct nh_posthoc {
  const char* session_a;
  const char* session_b;
  int has_test; /* 0 when the paired differences have no variance */
  nh_t_result test;
  double p_adjusted;
} nh_posthoc;

NH_API nh_status nh_compare_create(nh_compare** out);
NH_API void nh_compare_free(nh_compare* cmp);
/* self_report may be NULL. */
NH_API nh_status nh_compare_add(nh_compare* cmp, const char* participant, const char* session,
                                const nh_metric_set* metrics, const double* self_report);
/* Fixes the session order; otherwise sessions appear in first-added order. */
NH_API nh_status nh_compare_set_session_order(nh_compare* cmp, const char* const* sessions,
                                              size_t count);
NH_API nh_status nh_compare_run(const nh_compare* cmp, nh_report** out);
NH_API void nh_report_free(nh_report* report);
NH_API size_t nh_report_row_count(const nh_report* report);
NH_API nh_status nh_report_row_at(const nh_report* report, size_t row, nh_report_row* out);
NH_API nh_status nh_report_posthoc_at(const nh_report* report, size_t row, size_t index,
                                      nh_posthoc* out);

/* ---- synthetic data ---------------------------------------------------- */

typedef struct nh_signal_spec {
  double duration;
  double rate;
  double baseline;
  double drift_slope;
  double breathing_amp;
  double breathing_freq;
  double noise_sd;
  double spike_fraction;
  double spike_amp;
  uint64_t seed;
} nh_signal_spec;

typedef enum nh_preset {
  NH_PRESET_REST = 0,
  NH_PRESET_MATH_EASY = 1,
  NH_PRESET_MATH_HARD = 2,
  NH_PRESET_BREATHING_DOMINANT = 3
} nh_preset;

typedef struct nh_scene_spec {
  size_t width;
  size_t height;
  double duration;
  double rate;
  double background;
  double blob_peak;
  double blob_sigma;
  double blob_peak_slope;
  double blob_breathing_amp;
  double blob_breathing_freq;
  double start_x, start_y;
  double velocity_x, velocity_y;
  double wobble_x, wobble_y;
  double wobble_freq;
  double pixel_noise_sd;
  uint64_t seed;
} nh_scene_spec;

typedef struct nh_cohort_spec {
  size_t participants;
  double duration;
  double rate;
  double baseline_sd;
  double noise_scale_sd;
  double session_drift_sd;
  double session_noise_sd;
  uint64_t seed;
} nh_cohort_spec;

typedef struct nh_cohort nh_cohort;

NH_API nh_signal_spec nh_signal_spec_default(void);
NH_API nh_status nh_signal_spec_preset(nh_preset preset, uint64_t seed, nh_signal_spec* out);
NH_API nh_status nh_synth_signal(const nh_signal_spec* spec, nh_signal** out);

NH_API nh_scene_spec nh_scene_spec_default(void);
NH_API nh_status nh_synth_scene(const nh_scene_spec* spec, nh_sequence** out);
/* Ground-truth blob center and peak temperature at a frame. */
NH_API nh_status nh_scene_truth(const nh_scene_spec* spec, size_t frame, double* center_x,
                                double* center_y, double* peak_temp);

NH_API nh_cohort_spec nh_cohort_spec_default(void);
NH_API nh_status nh_synth_cohort(const nh_cohort_spec* spec, nh_cohort** out);
NH_API void nh_cohort_free(nh_cohort* cohort);
NH_API size_t nh_cohort_size(const nh_cohort* cohort);
/* Strings and the signal stay owned by the cohort. */
NH_API nh_status nh_cohort_entry(const nh_cohort* cohort, size_t index, const char** participant,
                                 const char** session, const nh_signal** signal);

#ifdef __cplusplus
}
#endif

#endif /* NOSEHEAT_H */
