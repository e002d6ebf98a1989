#ifndef PINCH_H
#define PINCH_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status code returned by every fallible call.
 */
typedef enum PinchStatus {
  PINCH_STATUS_OK = 0,
  PINCH_STATUS_NULL_POINTER = 1,
  PINCH_STATUS_INVALID_ARGUMENT = 2,
  PINCH_STATUS_PIPELINE_ERROR = 3,
  PINCH_STATUS_PANIC = 4,
} PinchStatus;

/**
 * A finished certificate for one dimension.
 */
typedef struct PinchCertificate PinchCertificate;

/**
 * Root data of one polynomial from the family.
 */
typedef struct PinchSpectrum PinchSpectrum;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Certifies dimension `n`.
 *
 * `h == 0` selects the lattice refinement automatically, `budget == 0` uses
 * the default number of curvature restarts. With `paper_mode` the automatic
 * refinement is chosen against the coarser base-diameter estimate.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum PinchStatus pinch_certify(uint32_t n,
                               uint64_t h,
                               uint64_t budget,
                               uint64_t seed,
                               bool paper_mode,
                               struct PinchCertificate **out);

/**
 * The seed used when the caller has no preference.
 */
uint64_t pinch_default_seed(void);

/**
 * # Safety
 * `cert` must be null or a handle from [`pinch_certify`] not yet freed.
 */
void pinch_certificate_free(struct PinchCertificate *cert);

/**
 * # Safety
 * `cert` must be null or a live certificate handle.
 */
bool pinch_certificate_passes(const struct PinchCertificate *cert);

/**
 * # Safety
 * `cert` must be null or a live certificate handle.
 */
bool pinch_certificate_passes_paper_mode(const struct PinchCertificate *cert);

/**
 * Dimension, or 0 for a null handle.
 *
 * # Safety
 * `cert` must be null or a live certificate handle.
 */
uint32_t pinch_certificate_dim(const struct PinchCertificate *cert);

/**
 * # Safety
 * `cert` must be null or a live certificate handle.
 */
uint64_t pinch_certificate_h(const struct PinchCertificate *cert);

/**
 * `curv_bound · diam_upper²`, NaN for a null handle.
 *
 * # Safety
 * `cert` must be null or a live certificate handle.
 */
double pinch_certificate_product(const struct PinchCertificate *cert);

/**
 * # Safety
 * `cert` must be null or a live certificate handle.
 */
double pinch_certificate_target(const struct PinchCertificate *cert);

/**
 * # Safety
 * `cert` must be null or a live certificate handle.
 */
double pinch_certificate_lambda_max(const struct PinchCertificate *cert);

/**
 * # Safety
 * `cert` must be null or a live certificate handle.
 */
double pinch_certificate_curvature_bound(const struct PinchCertificate *cert);

/**
 * # Safety
 * `cert` must be null or a live certificate handle.
 */
double pinch_certificate_curvature_sampled(const struct PinchCertificate *cert);

/**
 * # Safety
 * `cert` must be null or a live certificate handle.
 */
double pinch_certificate_diam_upper(const struct PinchCertificate *cert);

/**
 * Canonical JSON for the certificate. Release with [`pinch_string_free`].
 * Returns null for a null handle.
 *
 * # Safety
 * `cert` must be null or a live certificate handle.
 */
char *pinch_certificate_to_json(const struct PinchCertificate *cert);

/**
 * Closed-form roots of `x^{2k} + sign·3x^k + 1`, times `(x - 1)` when `odd`.
 * `sign == 0` picks the default sign for `k`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum PinchStatus pinch_spectrum_closed_form(uint32_t k,
                                            int8_t sign,
                                            bool odd,
                                            struct PinchSpectrum **out);

/**
 * # Safety
 * `s` must be null or a handle from [`pinch_spectrum_closed_form`] not yet freed.
 */
void pinch_spectrum_free(struct PinchSpectrum *s);

/**
 * Polynomial degree, or 0 for a null handle.
 *
 * # Safety
 * `s` must be null or a live spectrum handle.
 */
size_t pinch_spectrum_dim(const struct PinchSpectrum *s);

/**
 * # Safety
 * `s` must be null or a live spectrum handle.
 */
double pinch_spectrum_lambda_max(const struct PinchSpectrum *s);

/**
 * Number of conjugate pairs.
 *
 * # Safety
 * `s` must be null or a live spectrum handle.
 */
size_t pinch_spectrum_pair_count(const struct PinchSpectrum *s);

/**
 * Writes `ln|z|` and `arg z` of pair `i`.
 *
 * # Safety
 * `s` must be null or a live spectrum handle; `lambda` and `phi` must be
 * null or valid for one write each.
 */
enum PinchStatus pinch_spectrum_pair(const struct PinchSpectrum *s,
                                     size_t i,
                                     double *lambda,
                                     double *phi);

/**
 * # Safety
 * `s` must be null or a live spectrum handle.
 */
char *pinch_spectrum_to_json(const struct PinchSpectrum *s);

/**
 * # Safety
 * `s` must be null or a string returned by this library and not yet freed.
 */
void pinch_string_free(char *s);

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next call into the library from the same thread.
 */
const char *pinch_last_error_message(void);

/**
 * Library version as a static string.
 */
const char *pinch_version(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PINCH_H */
