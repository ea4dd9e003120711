#ifndef TSTG_H
#define TSTG_H

/* C interface of the TSTG library. Objects are opaque handles; every call
 * returns a status code and tstg_last_error() describes the most recent
 * failure on the calling thread. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(TSTG_BUILDING_DLL)
#define TSTG_API __declspec(dllexport)
#else
#define TSTG_API __declspec(dllimport)
#endif
#else
#define TSTG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tstg_status {
  TSTG_OK = 0,
  TSTG_ERROR_PARAMETER = 1,
  TSTG_ERROR_CONFIG = 2,
  TSTG_ERROR_DEGENERATE = 3,
  TSTG_ERROR_CONSISTENCY = 4,
  TSTG_ERROR_INTEGRATION = 5,
  TSTG_ERROR_UNSUPPORTED = 6,
  TSTG_ERROR_ACCURACY = 7,
  TSTG_ERROR_IO = 8,
  TSTG_ERROR_INTERNAL = 9
} tstg_status;

typedef struct tstg_config tstg_config;
typedef struct tstg_packet tstg_packet;
typedef struct tstg_frame tstg_frame;

TSTG_API const char *tstg_version(void);
/* Message of the last failed call on this thread; "" if none. */
TSTG_API const char *tstg_last_error(void);
/* Config errors: dotted field path and source line (0 if unknown). */
TSTG_API const char *tstg_last_error_path(void);
TSTG_API int tstg_last_error_line(void);

/* n <= 0 keeps the OpenMP default. */
TSTG_API tstg_status tstg_set_threads(int n);

TSTG_API tstg_status tstg_config_load(const char *path, tstg_config **out);
TSTG_API tstg_status tstg_config_parse(const char *text, tstg_config **out);
TSTG_API void tstg_config_free(tstg_config *cfg);
/* experiment may be NULL to keep the configured one. */
TSTG_API tstg_status tstg_config_set_experiment(tstg_config *cfg, const char *experiment);
TSTG_API tstg_status tstg_config_set_seed(tstg_config *cfg, uint64_t seed);
/* Effective configuration as JSON; the string lives until the next call on
 * this thread. */
TSTG_API tstg_status tstg_config_effective(const tstg_config *cfg, const char **json);

/* Runs the configured experiment and writes its files into out_dir. */
TSTG_API tstg_status tstg_run_experiment(const tstg_config *cfg, const char *out_dir);

/* Randomized property checks; failures receives the failure count. */
TSTG_API tstg_status tstg_selfcheck(uint64_t seed, int cases, int *checks, int *failures);

/* Packet with center (q, p), width C = (width_re + i width_im) and action.
 * width_re/width_im are d x d row-major. */
TSTG_API tstg_status tstg_packet_create(int d, double epsilon, const double *q, const double *p,
                                        const double *width_re, const double *width_im,
                                        double action, tstg_packet **out);
TSTG_API void tstg_packet_free(tstg_packet *packet);
/* <a|b> as (re, im). */
TSTG_API tstg_status tstg_packet_inner(const tstg_packet *a, const tstg_packet *b, double *re,
                                       double *im);
/* n points, x is n x d row-major, out is 2n interleaved (re, im). */
TSTG_API tstg_status tstg_packet_evaluate(const tstg_packet *packet, size_t n, const double *x,
                                          double *out);

/* Frame with shared scalar width (width_re + i width_im) Id, center z0 =
 * (center_q, center_p), half widths and counts of length 2d. */
TSTG_API tstg_status tstg_frame_create(int d, double epsilon, double width_re, double width_im,
                                       const double *center_q, const double *center_p,
                                       const double *half_widths, const int *counts,
                                       tstg_frame **out);
TSTG_API void tstg_frame_free(tstg_frame *frame);
TSTG_API size_t tstg_frame_size(const tstg_frame *frame);
/* out has 2K doubles, interleaved (re, im). */
TSTG_API tstg_status tstg_frame_analyze(const tstg_frame *frame, const tstg_packet *psi,
                                        double *out);
TSTG_API tstg_status tstg_save_coefficients(const tstg_frame *frame, const char *path,
                                            const double *coeffs);
TSTG_API tstg_status tstg_load_coefficients(const tstg_frame *frame, const char *path,
                                            double *coeffs);

#ifdef __cplusplus
}
#endif

#endif
