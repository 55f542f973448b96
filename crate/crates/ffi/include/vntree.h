#ifndef VNTREE_H
#define VNTREE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Mantissa bits used by the analysis entry points.
#define VN_PRECISION_BITS 256

// Status codes returned by every fallible function.
typedef enum VnStatus {
  VN_STATUS_OK = 0,
  VN_STATUS_NULL_POINTER = 1,
  VN_STATUS_INVALID_ARGUMENT = 2,
  VN_STATUS_BAD_PROBABILITY = 3,
  VN_STATUS_ORDER_TOO_LARGE = 4,
  VN_STATUS_CORRUPT_CODEBOOK = 5,
  VN_STATUS_IO = 6,
  VN_STATUS_NOT_CONVERGED = 7,
  VN_STATUS_PANIC = 8,
} VnStatus;

// Immutable codebook of T_k, shareable between extractors.
typedef struct VnCodebook VnCodebook;

// Streaming decoder state. Holds its own reference to the codebook.
typedef struct VnExtractor VnExtractor;

// Counters of an extractor.
typedef struct VnReport {
  uint64_t bits_consumed;
  uint64_t bits_emitted;
  uint64_t restarts;
  // Bits read but not yet decoded.
  uint64_t buffered;
  // Sum of the depths of all emitted bits.
  uint64_t depth_sum;
} VnReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *vn_last_error(void);

// Library version as a static NUL-terminated string.
const char *vn_version(void);

// Builds the codebook of order `k`.
//
// # Safety
// `out` must be a valid pointer to writable storage.
enum VnStatus vn_codebook_build(uint32_t k, struct VnCodebook **out);

// Loads a codebook file written by `vntree build`.
//
// # Safety
// `path` must be a NUL-terminated string and `out` writable.
enum VnStatus vn_codebook_load(const char *path, struct VnCodebook **out);

// Number of codewords, or 0 for a null handle.
//
// # Safety
// `cb` must be null or a live handle.
size_t vn_codebook_len(const struct VnCodebook *cb);

// Tree height `2^k`, or 0 for a null handle.
//
// # Safety
// `cb` must be null or a live handle.
size_t vn_codebook_height(const struct VnCodebook *cb);

// # Safety
// `cb` must be null or a handle not yet freed.
void vn_codebook_free(struct VnCodebook *cb);

// Creates an extractor over `cb`. The codebook handle may be freed
// afterwards.
//
// # Safety
// `cb` must be a live handle and `out` writable.
enum VnStatus vn_extractor_new(const struct VnCodebook *cb, struct VnExtractor **out);

// Feeds `n` source bits (one per byte, 0 or 1) and writes emitted bits
// (1 for H, 0 for T) to `out`. Stops early once `out_cap` bits have been
// emitted; `*consumed` tells how many input bits were read.
//
// # Safety
// `bits` must point to `n` readable bytes, `out` to `out_cap` writable
// bytes, and `consumed`/`emitted` must be writable.
enum VnStatus vn_extractor_feed(struct VnExtractor *ex,
                                const uint8_t *bits,
                                size_t n,
                                uint8_t *out,
                                size_t out_cap,
                                size_t *consumed,
                                size_t *emitted);

// # Safety
// `ex` must be a live handle and `out` writable.
enum VnStatus vn_extractor_report(const struct VnExtractor *ex, struct VnReport *out);

// Drops any partial codeword and zeroes the counters.
//
// # Safety
// `ex` must be a live handle.
enum VnStatus vn_extractor_reset(struct VnExtractor *ex);

// # Safety
// `ex` must be null or a handle not yet freed.
void vn_extractor_free(struct VnExtractor *ex);

// `E(Y_k)` for `p` given as a decimal, `a/b`, `1/sqrt2` or `1-1/e`.
//
// # Safety
// `p` must be a NUL-terminated string and `out` writable.
enum VnStatus vn_expected_height(const char *p, uint32_t k, double *out);

// `lim E(Y_k)`, iterating until the increment drops below `tol`.
// `k_used` may be null.
//
// # Safety
// `p` must be a NUL-terminated string, `out` writable, `k_used` null or
// writable.
enum VnStatus vn_expected_height_limit(const char *p, double tol, double *out, uint32_t *k_used);

// `γ_k`, the probability that one pass through T_k emits a given label.
//
// # Safety
// `p` must be a NUL-terminated string and `out` writable.
enum VnStatus vn_gamma(const char *p, uint32_t k, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* VNTREE_H */
