#ifndef SKFLUCT_H
#define SKFLUCT_H

/* Generated by cbindgen from crates/ffi/src; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by all entry points.
 */
typedef enum SkStatus {
  SK_STATUS_OK = 0,
  SK_STATUS_NULL_POINTER = 1,
  SK_STATUS_INVALID_ARGUMENT = 2,
  SK_STATUS_CAPACITY = 3,
  SK_STATUS_SIZE_MISMATCH = 4,
  SK_STATUS_MISSING_AUX = 5,
  SK_STATUS_BUFFER_TOO_SMALL = 6,
  SK_STATUS_PANIC = 7,
} SkStatus;

/**
 * Disorder realization `g` (and optionally `g'`, `g''`).
 */
typedef struct SkDisorder SkDisorder;

/**
 * Exact Gibbs probabilities over all `2^n` configurations.
 */
typedef struct SkGibbsTable SkGibbsTable;

/**
 * Law of the Hamming distance between two independent replicas.
 */
typedef struct SkOverlapLaw SkOverlapLaw;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *sk_version(void);

/**
 * Largest `n` accepted by the exact routines.
 */
size_t sk_exact_cap(void);

/**
 * Copy the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len − 1` bytes). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
size_t sk_last_error_message(char *buf, size_t len);

/**
 * `ν(β) = −½ln(1 − β²) − β²/2` for `0 ≤ β < 1`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum SkStatus sk_nu(double beta, double *out);

/**
 * Sample the `stream_index`-th disorder of `seed` for `n` spins.
 *
 * # Safety
 * `out` must be a valid pointer; the handle it receives must be released
 * with [`sk_disorder_free`].
 */
enum SkStatus sk_disorder_sample(size_t n,
                                 uint64_t seed,
                                 uint64_t stream_index,
                                 bool with_aux,
                                 struct SkDisorder **out);

/**
 * Disorder from `n(n−1)/2` couplings in row-major upper-triangular order.
 *
 * # Safety
 * `couplings` must point to `len` readable values; `out` must be valid.
 */
enum SkStatus sk_disorder_from_couplings(size_t n,
                                         const double *couplings,
                                         size_t len,
                                         struct SkDisorder **out);

/**
 * # Safety
 * `d` must be null or a handle from this library not yet freed.
 */
void sk_disorder_free(struct SkDisorder *d);

/**
 * Number of spins.
 *
 * # Safety
 * `d` must be a live handle.
 */
size_t sk_disorder_n(const struct SkDisorder *d);

/**
 * Copy the couplings `g` into `buf`.
 *
 * # Safety
 * `d` must be a live handle; `buf` must hold `len` values.
 */
enum SkStatus sk_disorder_couplings(const struct SkDisorder *d, double *buf, size_t len);

/**
 * `ln Z` without storing a table.
 *
 * # Safety
 * `d` must be a live handle; `out` must be valid.
 */
enum SkStatus sk_log_partition(const struct SkDisorder *d, double beta, double *out);

/**
 * Gibbs table of `H_{N,β}`.
 *
 * # Safety
 * `d` must be a live handle; `out` must be valid. Free the result with
 * [`sk_gibbs_free`].
 */
enum SkStatus sk_gibbs_table(const struct SkDisorder *d, double beta, struct SkGibbsTable **out);

/**
 * The pair of interpolated tables at `(t, s)`; the disorder must carry
 * auxiliary couplings.
 *
 * # Safety
 * `d` must be a live handle; `out_a` and `out_b` must be valid.
 */
enum SkStatus sk_coupled_tables(const struct SkDisorder *d,
                                double beta,
                                double t,
                                double s,
                                struct SkGibbsTable **out_a,
                                struct SkGibbsTable **out_b);

/**
 * # Safety
 * `t` must be null or a handle from this library not yet freed.
 */
void sk_gibbs_free(struct SkGibbsTable *t);

/**
 * `ln Z` of the table.
 *
 * # Safety
 * `t` must be a live handle; `out` must be valid.
 */
enum SkStatus sk_gibbs_log_z(const struct SkGibbsTable *t, double *out);

/**
 * Number of entries, `2^n`.
 *
 * # Safety
 * `t` must be a live handle.
 */
size_t sk_gibbs_len(const struct SkGibbsTable *t);

/**
 * Copy the probabilities, indexed by configuration bits (bit `i` set means
 * spin `i` is `−1`).
 *
 * # Safety
 * `t` must be a live handle; `buf` must hold `len` values.
 */
enum SkStatus sk_gibbs_probs(const struct SkGibbsTable *t, double *buf, size_t len);

/**
 * Overlap law of independent draws from `a` and `b`.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be valid. Free the result
 * with [`sk_overlap_free`].
 */
enum SkStatus sk_overlap_law(const struct SkGibbsTable *a,
                             const struct SkGibbsTable *b,
                             struct SkOverlapLaw **out);

/**
 * # Safety
 * `law` must be null or a handle from this library not yet freed.
 */
void sk_overlap_free(struct SkOverlapLaw *law);

/**
 * `n + 1`, the number of Hamming weights.
 *
 * # Safety
 * `law` must be a live handle.
 */
size_t sk_overlap_len(const struct SkOverlapLaw *law);

/**
 * Copy `q[w]`, the probability of `w` disagreeing coordinates.
 *
 * # Safety
 * `law` must be a live handle; `buf` must hold `len` values.
 */
enum SkStatus sk_overlap_weights(const struct SkOverlapLaw *law, double *buf, size_t len);

/**
 * `⟨R^k⟩`.
 *
 * # Safety
 * `law` must be a live handle; `out` must be valid.
 */
enum SkStatus sk_overlap_moment(const struct SkOverlapLaw *law, uint32_t k, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SKFLUCT_H */
