#ifndef BSLAB_H
#define BSLAB_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  define BSLAB_API __declspec(dllexport)
#else
#  define BSLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bslab_status {
    BSLAB_OK = 0,
    BSLAB_INVALID_CONFIG = 2,
    BSLAB_COMPUTE_ERROR = 3,
    BSLAB_IO_ERROR = 4,
    BSLAB_INVALID_HANDLE = 5
} bslab_status;

typedef struct bslab_model bslab_model;

/* Complex numbers cross the boundary as interleaved (re, im) doubles. */

BSLAB_API const char* bslab_version(void);

/* Message of the last failure on the calling thread ("" if none). */
BSLAB_API const char* bslab_last_error(void);
/* Library error code name of the last failure, e.g. "BoundaryZero". */
BSLAB_API const char* bslab_last_error_code(void);

BSLAB_API bslab_status bslab_model_from_json(const char* model_json, bslab_model** out);
BSLAB_API void bslab_model_free(bslab_model* model);
BSLAB_API size_t bslab_model_dim(const bslab_model* model);

/* T_z(H_s) for real coupling s and z = lambda + i y, written row-major into
   out (dim*dim complex entries). route: 0 direct, 1 identity. */
BSLAB_API bslab_status bslab_sandwich(const bslab_model* model, double s, double lambda, double y, int route,
                                      double* out);

/* Box is re_min, re_max, im_min, im_max. */
BSLAB_API bslab_status bslab_count_resonances(const bslab_model* model, double lambda, double y, const double box[4],
                                              int* count);

/* Writes up to capacity points as (re, im) pairs and their multiplicities;
   *found receives the total number located, which may exceed capacity. */
BSLAB_API bslab_status bslab_locate(const bslab_model* model, double lambda, double y, const double box[4],
                                    double* points, int* multiplicities, size_t capacity, size_t* found);

/* Runs one CLI command on a JSON config (object or batch array). out_dir may
   be NULL to use the config's "out" key. manifest_out, if not NULL, receives
   the manifest JSON (an array for batches); release it with bslab_string_free. */
BSLAB_API bslab_status bslab_run(const char* command, const char* config_json, const char* base_dir,
                                 const char* out_dir, int has_seed, uint64_t seed, int threads,
                                 char** manifest_out);

BSLAB_API void bslab_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
