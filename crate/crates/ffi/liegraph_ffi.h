#ifndef LIEGRAPH_FFI_H
#define LIEGRAPH_FFI_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LgFamily {
  LG_FAMILY_A = 0,
  LG_FAMILY_B = 1,
  LG_FAMILY_C = 2,
  LG_FAMILY_D = 3,
} LgFamily;

typedef enum LgStatus {
  LG_STATUS_OK = 0,
  LG_STATUS_NULL_POINTER = 1,
  LG_STATUS_INVALID_ARGUMENT = 2,
  LG_STATUS_UNSUPPORTED = 3,
  LG_STATUS_NUMERICAL = 4,
  LG_STATUS_BUFFER_TOO_SMALL = 5,
  LG_STATUS_PANIC = 6,
} LgStatus;

/**
 * Geometric graph handle.
 */
typedef struct LgGraph LgGraph;

/**
 * Root system handle.
 */
typedef struct LgRootSystem LgRootSystem;

/**
 * Spectrum handle, eigenvalues in descending order.
 */
typedef struct LgSpectrum LgSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated, truncated to fit)
 * and returns its full length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t lg_last_error(char *buf, size_t len);

/**
 * # Safety
 * `out` must be a valid pointer to a handle slot.
 */
enum LgStatus lg_root_system_new(enum LgFamily family, size_t n, struct LgRootSystem **out);

/**
 * # Safety
 * `rs` must come from `lg_root_system_new` and not be used afterwards.
 */
void lg_root_system_free(struct LgRootSystem *rs);

/**
 * # Safety
 * `rs` must be a live handle; `out` must be writable.
 */
enum LgStatus lg_root_system_rank(const struct LgRootSystem *rs, size_t *out);

/**
 * vol(𝔱/𝔱_ℤ) and vol(G) (Macdonald product).
 *
 * # Safety
 * `rs` must be a live handle; both outputs must be writable.
 */
enum LgStatus lg_volumes(const struct LgRootSystem *rs, double *vol_torus, double *vol_group);

/**
 * c_λ at level L for λ given in fundamental-weight coordinates.
 *
 * # Safety
 * `coords` must point to `len` integers; `out` must be writable.
 */
enum LgStatus lg_limiting_eigenvalue(const struct LgRootSystem *rs,
                                     const int64_t *coords,
                                     size_t len,
                                     double level,
                                     double *out);

/**
 * I_k for rank ≤ 2.
 *
 * # Safety
 * `rs` must be a live handle; `out` must be writable.
 */
enum LgStatus lg_one_vertex_integral(const struct LgRootSystem *rs, size_t k, double *out);

/**
 * Geometric graph on N Haar points of `space` ("su2", "so3", "s2", ...) at level L.
 *
 * # Safety
 * `space` must be a NUL-terminated string; `out` must be writable.
 */
enum LgStatus lg_graph_new(const char *space,
                           size_t n_points,
                           double level,
                           uint64_t seed,
                           struct LgGraph **out);

/**
 * # Safety
 * `g` must come from `lg_graph_new` and not be used afterwards.
 */
void lg_graph_free(struct LgGraph *g);

/**
 * # Safety
 * `g` must be a live handle; outputs must be writable.
 */
enum LgStatus lg_graph_size(const struct LgGraph *g, size_t *vertices, size_t *edges);

/**
 * # Safety
 * `g` must be a live handle; `out` must be writable.
 */
enum LgStatus lg_spectrum_from_graph(const struct LgGraph *g, struct LgSpectrum **out);

/**
 * Spectrum of a dense symmetric row-major n×n matrix.
 *
 * # Safety
 * `matrix` must point to n·n doubles; `out` must be writable.
 */
enum LgStatus lg_spectrum_from_matrix(const double *matrix, size_t n, struct LgSpectrum **out);

/**
 * # Safety
 * `s` must be a live handle; `out` must be writable.
 */
enum LgStatus lg_spectrum_len(const struct LgSpectrum *s, size_t *out);

/**
 * Copies the eigenvalues into `buf`, which must hold at least `lg_spectrum_len` values.
 *
 * # Safety
 * `buf` must point to `len` writable doubles.
 */
enum LgStatus lg_spectrum_copy(const struct LgSpectrum *s, double *buf, size_t len);

/**
 * # Safety
 * `s` must come from a `lg_spectrum_*` constructor and not be used afterwards.
 */
void lg_spectrum_free(struct LgSpectrum *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LIEGRAPH_FFI_H */
