#ifndef ALIGNLAB_H
#define ALIGNLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum AlStatus {
  AL_OK = 0,
  AL_NULL_POINTER = 1,
  AL_INVALID_ARGUMENT = 2,
  AL_PARSE_ERROR = 3,
  AL_CAP_EXCEEDED = 4,
  AL_UNSUPPORTED = 5,
  AL_IO_ERROR = 6,
  AL_BUFFER_TOO_SMALL = 7,
  AL_INTERNAL_ERROR = 8,
} AlStatus;

/**
 * Parsed activation.
 */
typedef struct AlActivation AlActivation;

/**
 * Parsed Boolean function.
 */
typedef struct AlFunction AlFunction;

/**
 * Estimate with its standard error (0 for exact methods).
 */
typedef struct AlEstimate {
  double value;
  double std_error;
  uint64_t samples;
} AlEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`) and returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t al_last_error_message(char *buf, size_t len);

/**
 * Parses a function spec such as `maj:n=5` or `parity:S=1,2;n=8`.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AlStatus al_function_parse(const char *spec, struct AlFunction **out);

/**
 * # Safety
 * `f` must be null or a handle from [`al_function_parse`], freed once.
 */
void al_function_free(struct AlFunction *f);

/**
 * Number of input coordinates, or 0 for a null handle.
 *
 * # Safety
 * `f` must be null or a live handle.
 */
size_t al_function_n(const struct AlFunction *f);

/**
 * Evaluates at `x ∈ {±1}^n`.
 *
 * # Safety
 * `x` must point to `len` values; `out` must be valid.
 */
enum AlStatus al_function_eval(const struct AlFunction *f,
                               const int8_t *x,
                               size_t len,
                               int8_t *out);

/**
 * Writes `W^0..W^n` into `out`, which must hold `n + 1` values.
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum AlStatus al_function_degree_weights(const struct AlFunction *f, double *out, size_t len);

/**
 * Parses `relu`, `sign` or a `pwl:` spec.
 *
 * # Safety
 * `spec` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AlStatus al_activation_parse(const char *spec, struct AlActivation **out);

/**
 * # Safety
 * `a` must be null or a handle from [`al_activation_parse`], freed once.
 */
void al_activation_free(struct AlActivation *a);

/**
 * `Σ_v^(k)(0)`.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AlStatus al_smoothing_derivative(const struct AlActivation *a,
                                      double v,
                                      size_t k,
                                      double *out);

/**
 * Hermite coefficients `d_0..d_{k_max}`; `out` must hold `k_max + 1` values.
 *
 * # Safety
 * `out` must point to `len` writable doubles.
 */
enum AlStatus al_hermite_coeffs(const struct AlActivation *a,
                                size_t k_max,
                                double *out,
                                size_t len);

/**
 * Sets `*out` to 1 if no two consecutive smoothing derivatives up to
 * `max_order` vanish, else 0.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AlStatus al_is_expressive(const struct AlActivation *a,
                               size_t max_order,
                               double tol_rel,
                               int32_t *out);

/**
 * Exact correlation per init over the full cube (n ≤ 14), averaged over
 * `init_samples` initializations.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AlStatus al_inal_exact(const struct AlFunction *f,
                            const struct AlActivation *a,
                            size_t init_samples,
                            uint64_t seed,
                            bool bias,
                            struct AlEstimate *out);

/**
 * Unbiased paired Monte-Carlo INAL estimate.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AlStatus al_inal_mc_paired(const struct AlFunction *f,
                                const struct AlActivation *a,
                                size_t init_samples,
                                size_t inner_samples,
                                uint64_t seed,
                                bool bias,
                                struct AlEstimate *out);

/**
 * Deterministic INAL for ReLU and sign.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AlStatus al_inal_dual_kernel(const struct AlFunction *f,
                                  const struct AlActivation *a,
                                  bool bias,
                                  struct AlEstimate *out);

/**
 * `E[M_T G^ν]` for weights of variance `1/n`; `tau` holds `k` signs.
 * Writes the value and the `n`-free constant.
 *
 * # Safety
 * `tau` must point to `k` values; output pointers must be valid.
 */
enum AlStatus al_moment(size_t k,
                        size_t nu,
                        size_t n,
                        const int8_t *tau,
                        int8_t bias_sign,
                        double *out_value,
                        double *out_constant);

/**
 * `C(n,k)/C(N,k)`.
 *
 * # Safety
 * `out` must be valid.
 */
enum AlStatus al_survival_probability(size_t n, size_t big_n, size_t k, double *out);

/**
 * CP of the orbit of the `N`-extension, Monte Carlo over permutations.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AlStatus al_cp_spectral(const struct AlFunction *f,
                             size_t big_n,
                             size_t samples,
                             uint64_t seed,
                             struct AlEstimate *out);

/**
 * Exact CP by enumerating injections of the spectral support.
 *
 * # Safety
 * Pointers must be valid.
 */
enum AlStatus al_cp_exact(const struct AlFunction *f, size_t big_n, struct AlEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ALIGNLAB_H */
