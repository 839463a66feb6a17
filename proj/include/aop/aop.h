/*
 * C interface to the AoP measurement engine.
 *
 * Objects are opaque handles owned by the caller and released with the matching
 * *_free function. Every fallible call returns an aop_status; on failure the
 * message and pipeline stage of the last error on the calling thread are
 * available through aop_last_error_message() / aop_last_error_stage().
 * Strings returned through char** out-parameters are allocated by the library
 * and must be released with aop_string_free().
 */
#ifndef AOP_AOP_H
#define AOP_AOP_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(AOP_BUILDING_LIBRARY)
#    define AOP_API __declspec(dllexport)
#  else
#    define AOP_API __declspec(dllimport)
#  endif
#else
#  define AOP_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum aop_status {
    AOP_OK = 0,
    AOP_E_INVALID_INPUT = 1,
    AOP_E_FORMAT = 2,
    AOP_E_IO = 3,
    AOP_E_MISSING_STRUCTURE = 4,
    AOP_E_INSUFFICIENT_POINTS = 5,
    AOP_E_DEGENERATE_FIT = 6,
    AOP_E_DEGENERATE_AXIS = 7,
    AOP_E_POINT_NOT_EXTERIOR = 8,
    AOP_E_INVALID_TRIANGLE = 9,
    AOP_E_ANISOTROPIC_SPACING = 10,
    AOP_E_EMPTY_STRUCTURE = 11,
    AOP_E_INVALID_SPEC = 12,
    AOP_E_UNPAIRED = 13,
    AOP_E_INTERNAL = 99
} aop_status;

typedef enum aop_report_format { AOP_FORMAT_JSON = 0, AOP_FORMAT_CSV = 1 } aop_report_format;

typedef struct aop_mask aop_mask;     /* H x W labels {0 bg, 1 PS, 2 FH} */
typedef struct aop_conf aop_conf;     /* H x W confidence in (0,1) */
typedef struct aop_logits aop_logits; /* 3 x H x W class logits */

typedef struct aop_point {
    double x;
    double y;
} aop_point;

typedef struct aop_ellipse {
    double cx, cy, a, b, theta;
} aop_ellipse;

typedef struct aop_result {
    double aop_deg;
    double c_aop;
    aop_point p1; /* PS superior endpoint */
    aop_point p3; /* PS inferior endpoint (vertex) */
    aop_point p4; /* FH tangent point */
    double d13, d34, d14;
    aop_ellipse ellipse;
    size_t m_points;
} aop_result;

typedef struct aop_tta_config {
    double lambda_ent;
    double lambda_tv;
    double lambda_aop;
    double lr;
    int32_t steps;
    double epsilon;
    double fd_step;
    int32_t train_gamma; /* nonzero: group is updated */
    int32_t train_beta;
    int32_t train_mix;
} aop_tta_config;

AOP_API const char* aop_version(void);
AOP_API const char* aop_status_name(aop_status status);
/* Nonzero for failures of the geometric measurement pipeline. */
AOP_API int aop_status_is_geometric(aop_status status);
AOP_API const char* aop_last_error_message(void);
AOP_API const char* aop_last_error_stage(void);
AOP_API void aop_string_free(char* text);

/* Label masks */
AOP_API aop_status aop_mask_create(int32_t height, int32_t width, const uint8_t* labels,
                                   aop_mask** out);
AOP_API aop_status aop_mask_load_pgm(const char* path, aop_mask** out);
AOP_API aop_status aop_mask_save_pgm(const aop_mask* mask, const char* path);
AOP_API int32_t aop_mask_height(const aop_mask* mask);
AOP_API int32_t aop_mask_width(const aop_mask* mask);
AOP_API const uint8_t* aop_mask_data(const aop_mask* mask);
AOP_API void aop_mask_free(aop_mask* mask);

/* Confidence maps (clamped to [1e-6, 1 - 1e-6]) */
AOP_API aop_status aop_conf_create(int32_t height, int32_t width, const double* values,
                                   aop_conf** out);
AOP_API aop_status aop_conf_load_f32r(const char* path, aop_conf** out);
AOP_API aop_status aop_conf_save_f32r(const aop_conf* conf, const char* path);
AOP_API void aop_conf_free(aop_conf* conf);

/* Logit maps, channel-major then row-major */
AOP_API aop_status aop_logits_create(int32_t height, int32_t width, const double* values,
                                     aop_logits** out);
AOP_API aop_status aop_logits_load_f32r(const char* path, aop_logits** out);
AOP_API aop_status aop_logits_save_f32r(const aop_logits* logits, const char* path);
AOP_API aop_status aop_logits_argmax(const aop_logits* logits, aop_mask** out);
AOP_API void aop_logits_free(aop_logits* logits);

/* Measurement. Spacing is in mm per pixel; AoP requires row_mm == col_mm. */
AOP_API aop_status aop_measure(const aop_mask* mask, const aop_conf* conf, double row_mm,
                               double col_mm, aop_result* out);
AOP_API aop_status aop_result_to_json(const aop_result* result, char** json_out);
/* JSON of the result, or of {"error": {code, stage, message}} on a pipeline failure.
 * json_out is filled in both cases. */
AOP_API aop_status aop_measure_json(const aop_mask* mask, const aop_conf* conf, double row_mm,
                                    double col_mm, char** json_out);

/* Test-time adaptation */
AOP_API void aop_tta_config_default(aop_tta_config* config);
/* report_json: {"config", "pre", "post", "params_before", "params_after", "trace"}.
 * trace_jsonl (optional, may be NULL): one JSON record per step.
 * Returns a geometric status when the post-adaptation measurement fails (outputs still filled). */
AOP_API aop_status aop_adapt_json(const aop_logits* logits, const aop_conf* conf,
                                  const aop_tta_config* config, double row_mm, double col_mm,
                                  char** report_json, char** trace_jsonl);

/* Evaluation of paired case directories. Returns AOP_E_UNPAIRED (report still filled)
 * when a case exists on one side only. */
AOP_API aop_status aop_eval_dirs(const char* pred_dir, const char* gt_dir, double row_mm,
                                 double col_mm, aop_report_format format, char** report_out);

/* Writes n phantom case directories and manifest.json; noise_sigma > 0 corrupts the logits. */
AOP_API aop_status aop_phantom_write_suite(const char* out_dir, int32_t n, uint64_t base_seed,
                                           double noise_sigma, char** manifest_json);

/* SVG rendering. On a pipeline failure svg_out holds the regions only and the
 * geometric status is returned. */
AOP_API aop_status aop_render_svg(const aop_mask* mask, const aop_conf* conf, double row_mm,
                                  double col_mm, char** svg_out);

#ifdef __cplusplus
}
#endif

#endif /* AOP_AOP_H */
