#ifndef CIRCLE_RESPONSE_H
#define CIRCLE_RESPONSE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum CrStatus {
  CR_STATUS_OK = 0,
  CR_STATUS_NULL_POINTER = 1,
  CR_STATUS_INVALID_ARGUMENT = 2,
  CR_STATUS_NUMERICAL = 3,
  CR_STATUS_DEGENERATE = 4,
  CR_STATUS_VALIDATION = 5,
  CR_STATUS_PANIC = 6,
} CrStatus;

// Differentiation scheme used inside the response formulas.
typedef enum CrScheme {
  CR_SCHEME_CENTRAL_DIFFERENCE = 0,
  CR_SCHEME_SPECTRAL = 1,
} CrScheme;

// Opaque response context: assembled operator, invariant density, resolvent
// and, once requested, an isolated eigenvalue.
typedef struct CrContext CrContext;

// Opaque expanding circle map.
typedef struct CrMap CrMap;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of the calling thread into `buf` (NUL
// terminated, truncated to `cap`) and returns the full message length.
//
// # Safety
// `buf` must be null or point to `cap` writable bytes.
size_t cr_last_error_message(char *buf, size_t cap);

// Library version as a static NUL-terminated string.
const char *cr_version(void);

// Creates a preset map: `doubling`, `sticky2x`, `gapmap12`, `gapmap12-smooth`.
//
// # Safety
// `name` must be a NUL-terminated string; `out` must be writable.
enum CrStatus cr_map_preset(const char *name, struct CrMap **out);

// Creates a map from its JSON description.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum CrStatus cr_map_from_json(const char *json, struct CrMap **out);

// Releases a map; null is ignored.
//
// # Safety
// `map` must be null or a handle from `cr_map_*` not yet freed.
void cr_map_free(struct CrMap *map);

// `T(x) mod 1`.
//
// # Safety
// `map` must be a live handle; `out` must be writable.
enum CrStatus cr_map_evaluate(const struct CrMap *map, double x, double *out);

// `1/inf|T'|`, the essential spectral radius bound.
//
// # Safety
// `map` must be a live handle; `out` must be writable.
enum CrStatus cr_essential_bound(const struct CrMap *map, double *out);

// Assembles the `modes × modes` operator of `map` and its invariant density.
// The map is copied; the handle may be freed afterwards.
//
// # Safety
// `map` must be a live handle; `out` must be writable.
enum CrStatus cr_context_new(const struct CrMap *map,
                             size_t modes,
                             size_t fine_factor,
                             enum CrScheme scheme,
                             struct CrContext **out);

// Releases a context; null is ignored.
//
// # Safety
// `ctx` must be null or a handle from [`cr_context_new`] not yet freed.
void cr_context_free(struct CrContext *ctx);

// Locates the real isolated eigenvalue nearest `target` and stores it with
// its adjoint functional in the context; writes it to `lambda0`.
//
// # Safety
// `ctx` must be a live handle; `lambda0` must be writable.
enum CrStatus cr_context_set_eigenvalue(struct CrContext *ctx, double target, double *lambda0);

// Writes up to `cap` eigenvalues, largest modulus first, into `re`/`im` and
// their count into `written`.
//
// # Safety
// `ctx` must be a live handle; `re` and `im` must hold `cap` doubles.
enum CrStatus cr_spectrum(const struct CrContext *ctx,
                          double *re,
                          double *im,
                          size_t cap,
                          size_t *written);

// Invariant density at `x_j = j/len`.
//
// # Safety
// `ctx` must be a live handle; `out` must hold `len` doubles.
enum CrStatus cr_density_samples(const struct CrContext *ctx, double *out, size_t len);

// Optimal perturbation for the expectation of the observable given by
// `obs_len` samples at `x_j = j/obs_len`. Writes `Ṫ` at `x_j = j/tdot_len`
// and the optimal response to `objective`.
//
// # Safety
// `ctx` must be a live handle; `observable` must hold `obs_len` doubles and
// `tdot` must hold `tdot_len` doubles; `objective` must be writable.
enum CrStatus cr_optimize_expectation(const struct CrContext *ctx,
                                      const double *observable,
                                      size_t obs_len,
                                      double gamma,
                                      double *tdot,
                                      size_t tdot_len,
                                      double *objective);

// Optimal perturbation for the eigenvalue set by [`cr_context_set_eigenvalue`].
//
// # Safety
// `ctx` must be a live handle; `tdot` must hold `tdot_len` doubles;
// `objective` must be writable.
enum CrStatus cr_optimize_eigenvalue(const struct CrContext *ctx,
                                     double gamma,
                                     double *tdot,
                                     size_t tdot_len,
                                     double *objective);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CIRCLE_RESPONSE_H */
