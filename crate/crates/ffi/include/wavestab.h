#ifndef WAVESTAB_H
#define WAVESTAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. The numeric values match the CLI exit codes.
 */
typedef enum WsStatus {
  WS_STATUS_OK = 0,
  /**
   * Null pointer or otherwise malformed call.
   */
  WS_STATUS_INVALID_ARGUMENT = 1,
  /**
   * Input outside the supported domain.
   */
  WS_STATUS_DOMAIN = 2,
  /**
   * Any other library failure, including caught panics.
   */
  WS_STATUS_INTERNAL = 3,
} WsStatus;

/**
 * Opaque wave handle for one wavenumber `κ`. Caches the bubble coefficients.
 */
typedef struct WsWave WsWave;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null. Valid until the
 * next failing call on the same thread.
 */
const char *ws_last_error(void);

/**
 * Creates a wave handle. Free it with [`ws_wave_free`].
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
enum WsStatus ws_wave_new(double kappa, struct WsWave **out);

/**
 * # Safety
 * `wave` must be null or a handle from [`ws_wave_new`] not yet freed.
 */
void ws_wave_free(struct WsWave *wave);

/**
 * # Safety
 * `wave` must be a live handle; `out` valid for writes.
 */
enum WsStatus ws_wave_kappa(const struct WsWave *wave, double *out);

/**
 * The four roots `k₁..k₄` of the dispersion relation at `σ ≥ 0`. `k₁` and `k₃`
 * exist only below the critical frequency and are written as NaN above it.
 *
 * # Safety
 * `wave` must be a live handle; `out` valid for four writes.
 */
enum WsStatus ws_wave_dispersion_roots(const struct WsWave *wave, double sigma, double *out);

/**
 * `ind₁(κ)`.
 *
 * # Safety
 * `wave` must be a live handle; `out` valid for writes.
 */
enum WsStatus ws_wave_ind1(const struct WsWave *wave, double *out);

/**
 * `ind₂(κ)`.
 *
 * # Safety
 * `wave` must be a live handle; `out` valid for writes.
 */
enum WsStatus ws_wave_ind2(struct WsWave *wave, double *out);

/**
 * Largest real part on the leading-order bubble at amplitude `ε ∈ (0, 0.01]`,
 * and the Floquet offset `γ*` where it is attained. Both are zero when the
 * wave is stable there.
 *
 * # Safety
 * `wave` must be a live handle; `max_re` valid for writes; `gamma_star`
 * null or valid for writes.
 */
enum WsStatus ws_wave_bubble_max(struct WsWave *wave,
                                 double eps,
                                 double *max_re,
                                 double *gamma_star);

/**
 * The zero `κ₁` of `ind₁`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum WsStatus ws_find_kappa1(double *out);

/**
 * The threshold `κ₂` of the bubble index.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum WsStatus ws_find_kappa2(double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WAVESTAB_H */
