#ifndef TCQ_H
#define TCQ_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum TcqStatus {
  TCQ_STATUS_OK = 0,
  TCQ_STATUS_NULL_POINTER = 1,
  TCQ_STATUS_INVALID_UTF8 = 2,
  // Graph text could not be parsed.
  TCQ_STATUS_PARSE = 3,
  // Graph is structurally invalid or not strongly connected and aperiodic.
  TCQ_STATUS_INVALID_GRAPH = 4,
  // Source distribution is malformed or does not match the graph alphabet.
  TCQ_STATUS_SOURCE = 5,
  // State enumeration or the chain solve failed.
  TCQ_STATUS_ANALYSIS = 6,
  // Rate-distortion computation failed.
  TCQ_STATUS_RATE_DISTORTION = 7,
  // Caller buffer too small; the required length was still reported.
  TCQ_STATUS_BUFFER_TOO_SMALL = 8,
  TCQ_STATUS_INVALID_ARGUMENT = 9,
  TCQ_STATUS_PANIC = 10,
} TcqStatus;

// Opaque labelled graph.
typedef struct TcqGraph TcqGraph;

// Opaque analysis result.
typedef struct TcqReport TcqReport;

// Monte Carlo estimate of the distortion.
typedef struct TcqSimResult {
  uint64_t n;
  uint64_t increments;
  double estimate;
  double std_error;
} TcqSimResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Length in bytes, including the terminating NUL, of the calling thread's last error message.
size_t tcq_last_error_length(void);

// Copies the calling thread's last error message into `buf`.
//
// Returns the number of bytes written including the NUL, or 0 if `buf` is
// null or shorter than [`tcq_last_error_length`]. The message is empty after
// a successful call.
//
// # Safety
// `buf` must be null or valid for `len` bytes.
size_t tcq_last_error(char *buf, size_t len);

// Parses a graph description and checks it is strongly connected and aperiodic.
//
// # Safety
// `text` must be a NUL-terminated string; `out` must be valid for a write.
enum TcqStatus tcq_graph_parse(const char *text, struct TcqGraph **out);

// The built-in order-3 binary de Bruijn example graph over `a b c d`.
//
// # Safety
// `out` must be valid for a write.
enum TcqStatus tcq_graph_example_debruijn8(struct TcqGraph **out);

// # Safety
// `g` must be null or a handle from this library not yet freed.
void tcq_graph_free(struct TcqGraph *g);

// # Safety
// `g` must be a live graph handle; `out` valid for a write.
enum TcqStatus tcq_graph_vertex_count(const struct TcqGraph *g, size_t *out);

// # Safety
// `g` must be a live graph handle; `out` valid for a write.
enum TcqStatus tcq_graph_alphabet_size(const struct TcqGraph *g, size_t *out);

// Exact asymptotic distortion of `g` under the memoryless source `source`
// (`"uniform"`, `"a:1/2,b:1/2"`, or null for uniform).
//
// # Safety
// `g` must be a live graph handle; `source` null or NUL-terminated; `out` valid for a write.
enum TcqStatus tcq_analyze(const struct TcqGraph *g, const char *source, struct TcqReport **out);

// # Safety
// `r` must be null or a handle from this library not yet freed.
void tcq_report_free(struct TcqReport *r);

// # Safety
// `r` must be a live report handle; `out` valid for a write.
enum TcqStatus tcq_report_state_count(const struct TcqReport *r, size_t *out);

// # Safety
// `r` must be a live report handle; `out` valid for a write.
enum TcqStatus tcq_report_k(const struct TcqReport *r, uint32_t *out);

// Number of closed classes; `unique` is true when there is exactly one.
//
// # Safety
// `r` must be a live report handle; `classes` and `unique` valid for writes.
enum TcqStatus tcq_report_classes(const struct TcqReport *r, size_t *classes, bool *unique);

// # Safety
// `r` must be a live report handle; `out` valid for a write.
enum TcqStatus tcq_report_distortion_f64(const struct TcqReport *r, double *out);

// The exact distortion as `"num/den"` in lowest terms.
//
// `needed` (may be null) always receives the buffer size required,
// including the NUL. Returns `TCQ_STATUS_BUFFER_TOO_SMALL` if `len` is short.
//
// # Safety
// `r` must be a live report handle; `buf` null or valid for `len` bytes.
enum TcqStatus tcq_report_distortion_string(const struct TcqReport *r,
                                            char *buf,
                                            size_t len,
                                            size_t *needed);

// Monte Carlo estimate over `n` samples. `workers == 0` runs the single
// sequential stream; otherwise batches restart from the zero vector and run
// on `workers` threads (the result does not depend on `workers`).
//
// # Safety
// `g` must be a live graph handle; `source` null or NUL-terminated; `out` valid for a write.
enum TcqStatus tcq_simulate(const struct TcqGraph *g,
                            const char *source,
                            uint64_t n,
                            uint64_t seed,
                            size_t workers,
                            struct TcqSimResult *out);

// Distortion-rate function of the equiprobable source on `alphabet_size`
// symbols at `rate` bits per symbol.
//
// # Safety
// `out` must be valid for a write.
enum TcqStatus tcq_rd_uniform(size_t alphabet_size, double rate, double tol, double *out);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* TCQ_H */
