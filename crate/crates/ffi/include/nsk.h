#ifndef NSK_H
#define NSK_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum {
  NSK_STATUS_OK = 0,
  NSK_STATUS_NULL_POINTER = 1,
  NSK_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Blow-up or vacuum.
   */
  NSK_STATUS_NUMERICAL = 3,
  NSK_STATUS_IO = 4,
  NSK_STATUS_PANIC = 5,
} NskStatus;

/**
 * Opaque fluid parameters.
 */
typedef struct NskParams NskParams;

/**
 * Opaque spectral state `(a, m)`.
 */
typedef struct NskState NskState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *nsk_version(void);

/**
 * Copies the calling thread's last error message into `buf` (truncated,
 * always NUL-terminated when `len > 0`). Returns the full message length.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null.
 */
uintptr_t nsk_last_error(char *buf, uintptr_t len);

/**
 * Gamma-law fluid (exponent 1.4, `rho* = 1`) with sound speed `gamma`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
NskStatus nsk_params_new(double mu, double lam, double kappa, double gamma, NskParams **out);

/**
 * # Safety
 * `p` must come from this library or be null.
 */
void nsk_params_free(NskParams *p);

/**
 * Roots of the characteristic polynomial at `xi` (length `d`), as
 * `(re+, im+, re-, im-)` in `out`.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
NskStatus nsk_eigenvalues(const NskParams *params, const double *xi, uintptr_t d, double *out);

/**
 * `G(t, xi)` row-major in `(a, m_1, .., m_d)` order; `re` and `im` hold `(d+1)^2` entries each.
 *
 * # Safety
 * Pointers must be valid for the stated lengths.
 */
NskStatus nsk_green_matrix(const NskParams *params,
                           double t,
                           const double *xi,
                           uintptr_t d,
                           double *re,
                           double *im);

/**
 * State from physical samples: `d + 1` blocks of `n^d` values (`a`, then `m_1..m_d`),
 * row-major with the last axis fastest, on the box `[0, L)^d`.
 *
 * # Safety
 * `samples` must hold `(d + 1) n^d` values; `out` must be valid.
 */
NskStatus nsk_state_from_samples(uintptr_t d,
                                 uintptr_t n,
                                 double box_len,
                                 const double *samples,
                                 NskState **out);

/**
 * Number of values written by [`nsk_state_to_samples`].
 *
 * # Safety
 * `state` must be valid.
 */
NskStatus nsk_state_sample_count(const NskState *state, uintptr_t *out);

/**
 * Physical samples in the layout of [`nsk_state_from_samples`].
 *
 * # Safety
 * `out` must hold `len` values.
 */
NskStatus nsk_state_to_samples(const NskState *state, double *out, uintptr_t len);

/**
 * # Safety
 * `state` and `out` must be valid.
 */
NskStatus nsk_state_time(const NskState *state, double *out);

/**
 * # Safety
 * `s` must come from this library or be null.
 */
void nsk_state_free(NskState *s);

/**
 * Exact linear flow `G(t) U`, as a new state.
 *
 * # Safety
 * Handles and `out` must be valid.
 */
NskStatus nsk_propagate(const NskState *state, const NskParams *params, double t, NskState **out);

/**
 * ETD2 run to `t_end`. On vacuum or blow-up the last valid state is still
 * stored in `out` and [`NskStatus::Numerical`] is returned.
 *
 * # Safety
 * Handles and `out` must be valid.
 */
NskStatus nsk_simulate(const NskState *state,
                       const NskParams *params,
                       double dt,
                       double t_end,
                       bool linear_only,
                       NskState **out);

/**
 * Besov norm of the whole state with the Euclidean modulus over components;
 * `p` and `sigma` may be `INFINITY`. `fourier` selects the Fourier-Besov flavor.
 *
 * # Safety
 * `state` and `out` must be valid.
 */
NskStatus nsk_besov_norm(const NskState *state,
                         double s,
                         double p,
                         double sigma,
                         bool fourier,
                         double *out);

/**
 * Decay exponent `d/2 (1 - 1/p) + s/2`.
 *
 * # Safety
 * `out` must be valid.
 */
NskStatus nsk_theoretical_exponent(uintptr_t d, double p, double s, double *out);

/**
 * # Safety
 * `path` must be a NUL-terminated string; handles must be valid.
 */
NskStatus nsk_snapshot_write(const char *path, const NskState *state, const NskParams *params);

/**
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be valid.
 */
NskStatus nsk_snapshot_read(const char *path, NskState **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NSK_H */
