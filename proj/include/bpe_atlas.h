/* bpe-atlas C interface.
 *
 * Handles are opaque. Every function returning bpe_status leaves a message
 * for the calling thread in bpe_last_error() when it fails. Strings handed
 * out through char** parameters are owned by the caller and released with
 * bpe_string_free.
 */
#ifndef BPE_ATLAS_H
#define BPE_ATLAS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#if defined(BPE_ATLAS_BUILD)
#define BPE_API __declspec(dllexport)
#else
#define BPE_API __declspec(dllimport)
#endif
#else
#define BPE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bpe_status {
  BPE_OK = 0,
  BPE_INVALID_ARGUMENT = 1,
  BPE_HORIZON_EXCEEDED = 2,
  BPE_NOT_LEFT_INVERTIBLE = 3,
  BPE_INFINITE_KERNEL = 4,
  BPE_DIVERGENT_SERIES = 5,
  BPE_PARSE_ERROR = 6,
  BPE_VALIDATION_ERROR = 7,
  BPE_IO_ERROR = 8,
  BPE_INTERNAL_ERROR = 9
} bpe_status;

typedef enum bpe_class {
  BPE_BOUNDED = 0,
  BPE_UNBOUNDED = 1,
  BPE_INCONCLUSIVE = 2
} bpe_class;

typedef struct bpe_config bpe_config;
typedef struct bpe_operator bpe_operator;

typedef struct bpe_complex {
  double re;
  double im;
} bpe_complex;

typedef struct bpe_radii_report {
  double r_dual_estimate;
  double r_dual_upper;
  double r_inner;
  double r_disc;
  double r_local_max;
} bpe_radii_report;

BPE_API const char* bpe_version(void);
BPE_API const char* bpe_status_string(bpe_status status);
/* Message of the last failure on this thread ("" when none). */
BPE_API const char* bpe_last_error(void);
BPE_API void bpe_string_free(char* s);

/* Configuration (JSON text, schema in the README). */
BPE_API bpe_status bpe_config_parse(const char* text, bpe_config** out);
BPE_API bpe_status bpe_config_default(bpe_config** out);
BPE_API void bpe_config_free(bpe_config* config);
BPE_API bpe_status bpe_config_to_json(const bpe_config* config, char** out);

/* Operators. */
BPE_API bpe_status bpe_operator_from_config(const bpe_config* config,
                                            bpe_operator** out);
BPE_API bpe_status bpe_operator_example1(uint32_t depth, bpe_operator** out);
/* base == NULL selects the example-1 weight rule for the first branch. */
BPE_API bpe_status bpe_operator_example2(uint32_t k, const double* base,
                                         size_t base_len, uint32_t depth,
                                         bpe_operator** out);
BPE_API bpe_status bpe_operator_classical(const double* weights, size_t len,
                                          uint32_t depth, bpe_operator** out);
BPE_API void bpe_operator_free(bpe_operator* op);
BPE_API size_t bpe_operator_kernel_dim(const bpe_operator* op);
BPE_API uint32_t bpe_operator_depth(const bpe_operator* op);

/* log2 B_n(w) for n = 0..N into out[0..N] (out must hold N + 1 values). */
BPE_API bpe_status bpe_b_n_log2(const bpe_operator* op, bpe_complex w,
                                uint32_t N, double* out);
/* Slope and class from log2 B_n values (count = N + 1 >= 33). */
BPE_API bpe_status bpe_classify(const double* log2_b, size_t count,
                                double tail_fraction, double slope_threshold,
                                double cap, double* slope, bpe_class* cls);
/* kappa(z, w) as a row-major d x d array. */
BPE_API bpe_status bpe_kernel_gram(const bpe_operator* op, bpe_complex z,
                                   bpe_complex w, uint32_t N,
                                   bpe_complex* out);
/* Smallest singular value of [<x_i, e_j>] over the accepted eigenvectors of
 * T* - conj(w) at the given truncation depth. */
BPE_API bpe_status bpe_gram_test(const bpe_operator* op, bpe_complex w,
                                 uint32_t depth, double* sigma_min,
                                 int* dimension_mismatch);
BPE_API bpe_status bpe_radii(const bpe_operator* op, uint32_t N,
                             uint32_t sphere_samples, uint64_t seed,
                             bpe_radii_report* out);

/* Subcommands. out_dir may be NULL (nothing written). json receives the
 * report. */
BPE_API bpe_status bpe_run_describe(const bpe_config* config,
                                    const char* out_dir, char** json);
BPE_API bpe_status bpe_run_radii(const bpe_config* config, const char* out_dir,
                                 char** json);
/* threads = 0 uses BPE_ATLAS_THREADS or the hardware count. */
BPE_API bpe_status bpe_run_scan(const bpe_config* config, const char* out_dir,
                                unsigned threads, char** json);
BPE_API bpe_status bpe_run_kernel(const bpe_config* config, const char* out_dir,
                                  char** json);
/* which = 1 or 2; all_pass receives 1 when every table row passes. */
BPE_API bpe_status bpe_run_verify(int which, const bpe_config* config,
                                  const char* out_dir, char** json,
                                  int* all_pass);

#ifdef __cplusplus
}
#endif

#endif /* BPE_ATLAS_H */
