#ifndef LOGVVMF_H
#define LOGVVMF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result codes.
typedef enum LogvvmfStatus {
  LOGVVMF_STATUS_OK = 0,
  // Null pointer, bad UTF-8, malformed JSON or out-of-range argument.
  LOGVVMF_STATUS_INVALID_ARGUMENT = 1,
  // Output buffer too small.
  LOGVVMF_STATUS_BUFFER_TOO_SMALL = 2,
  LOGVVMF_STATUS_NOT_UNIMODULAR = 3,
  // The representation data violates the group relations or block structure.
  LOGVVMF_STATUS_INVALID_REPRESENTATION = 4,
  // Any other domain error reported by the library.
  LOGVVMF_STATUS_DOMAIN = 5,
  // Internal panic caught at the boundary.
  LOGVVMF_STATUS_INTERNAL = 6,
} LogvvmfStatus;

// Opaque representation handle.
typedef struct LogvvmfRep LogvvmfRep;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` as a
// NUL-terminated string, truncating if needed. Returns the full message
// length in bytes, excluding the terminator.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t logvvmf_last_error(char *buf, size_t len);

// Library version as a static NUL-terminated string.
const char *logvvmf_version(void);

// The one-dimensional trivial representation.
struct LogvvmfRep *logvvmf_rep_trivial(void);

// The standard two-dimensional representation.
struct LogvvmfRep *logvvmf_rep_standard(void);

// Parses a representation from the JSON format read by the command line.
//
// # Safety
// `json` must be a valid NUL-terminated string and `out` a valid pointer.
enum LogvvmfStatus logvvmf_rep_from_json(const char *json, struct LogvvmfRep **out);

// Releases a handle. Null is ignored.
//
// # Safety
// `rep` must be null or come from this library and not be used afterwards.
void logvvmf_rep_free(struct LogvvmfRep *rep);

// Dimension of the representation, or 0 for a null handle.
//
// # Safety
// `rep` must be null or a live handle.
size_t logvvmf_rep_dim(const struct LogvvmfRep *rep);

// Canonical word `sign * T^shift * (S T^{l_v}) ... (S T^{l_0})` of
// `(a, b; c, d)`. Writes `(l_0, ..., l_v)` to `exponents` and the count to
// `out_len`; if the buffer is too small only the count is written.
//
// # Safety
// Output pointers must be valid; `exponents` must hold `cap` values.
enum LogvvmfStatus logvvmf_decompose(int64_t a,
                                     int64_t b,
                                     int64_t c,
                                     int64_t d,
                                     int32_t *sign,
                                     int64_t *shift,
                                     int64_t *exponents,
                                     size_t cap,
                                     size_t *out_len);

// `rho(a, b; c, d)` into `out` (`2 p^2` doubles).
//
// # Safety
// `rep` must be a live handle and `out` must hold `out_len` doubles.
enum LogvvmfStatus logvvmf_rep_eval(const struct LogvvmfRep *rep,
                                    int64_t a,
                                    int64_t b,
                                    int64_t c,
                                    int64_t d,
                                    double *out,
                                    size_t out_len);

// Truncated Poincare series `P(tau)` with one shift per Jordan block and one
// weight per column. `tail_bound` (may be null) receives the tail estimate.
//
// # Safety
// Pointers must be valid for the given lengths.
enum LogvvmfStatus logvvmf_poincare_eval(const struct LogvvmfRep *rep,
                                         const int64_t *nu,
                                         size_t nu_len,
                                         const int64_t *k,
                                         size_t k_len,
                                         uint64_t n_trunc,
                                         double tau_re,
                                         double tau_im,
                                         double *out,
                                         size_t out_len,
                                         double *tail_bound);

// `max |rho(g) P(tau) - P(g tau) J_k(g, tau)^{-1}|` for `g = (a, b; c, d)`.
//
// # Safety
// Pointers must be valid for the given lengths; `out` must be writable.
enum LogvvmfStatus logvvmf_modularity_residual(const struct LogvvmfRep *rep,
                                               const int64_t *nu,
                                               size_t nu_len,
                                               const int64_t *k,
                                               size_t k_len,
                                               uint64_t n_trunc,
                                               int64_t a,
                                               int64_t b,
                                               int64_t c,
                                               int64_t d,
                                               double tau_re,
                                               double tau_im,
                                               double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOGVVMF_H */
