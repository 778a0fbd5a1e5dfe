#ifndef PAREDLAB_H
#define PAREDLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Working precision (bits) for maps built through this interface.
#define PL_PRECISION 128

// Status codes. Validation, numerical and size-limit failures share the
// command-line exit codes.
typedef enum PlStatus {
  PL_STATUS_OK = 0,
  PL_STATUS_NULL_ARGUMENT = 1,
  PL_STATUS_VALIDATION = 2,
  PL_STATUS_NUMERICAL = 3,
  PL_STATUS_SIZE_LIMIT = 4,
  PL_STATUS_BUFFER_TOO_SMALL = 5,
  PL_STATUS_PANIC = 6,
} PlStatus;

// Plane graph handle.
typedef struct PlGraph PlGraph;

// Anti-Blaschke product handle.
typedef struct PlMap PlMap;

// Traced path handle.
typedef struct PlTrace PlTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread; valid until the next call
// that fails. Never null.
const char *paredlab_last_error(void);

// # Safety
// `s` must come from this library or be null.
void paredlab_string_free(char *s);

// Parses a plane graph from its JSON wire format.
//
// # Safety
// `json` must be a NUL-terminated string; `graph` must be writable.
enum PlStatus paredlab_graph_from_json(const char *json, struct PlGraph **graph);

// Built-in graph by name: `C<n>`, `K4`, `C4+chord`, `nsb`, `sb2`.
//
// # Safety
// `name` must be a NUL-terminated string; `graph` must be writable.
enum PlStatus paredlab_graph_fixture(const char *name, struct PlGraph **graph);

// # Safety
// `graph` must come from this library or be null.
void paredlab_graph_free(struct PlGraph *graph);

// # Safety
// `graph` must be a live handle; outputs must be writable.
enum PlStatus paredlab_graph_counts(const struct PlGraph *graph,
                                    size_t *vertices,
                                    size_t *edges,
                                    size_t *faces);

// JSON wire format of the graph, owned by the caller.
//
// # Safety
// `graph` must be a live handle; `json` must be writable.
enum PlStatus paredlab_graph_to_json(const struct PlGraph *graph, char **json);

// Sets `bounded` to 1 when the deformation space is bounded, 0 otherwise.
//
// # Safety
// `graph` must be a live handle; `bounded` must be writable.
enum PlStatus paredlab_graph_verdict(const struct PlGraph *graph, int32_t *bounded);

// Whether `gamma` bifurcates into `gamma2`, and the number of embedding
// classes `N(Γ ↪ Γ′)`.
//
// # Safety
// Both handles must be live; outputs must be writable.
enum PlStatus paredlab_graph_bifurcates(const struct PlGraph *gamma,
                                        const struct PlGraph *gamma2,
                                        int32_t *bifurcates,
                                        size_t *classes);

// Number of plane graph classes in the atlas on `n` vertices.
//
// # Safety
// `count` must be writable.
enum PlStatus paredlab_atlas_count(size_t n, size_t *count);

// Pullback lamination from generators `"a:b,c:d"`, as JSON owned by the caller.
//
// # Safety
// `gens` must be a NUL-terminated string; `json` must be writable.
enum PlStatus paredlab_lamination_json(size_t d, const char *gens, size_t depth, char **json);

// Normalized map with a zero at the origin and at each `(re, im)` pair of
// `zeros` (`2 * count` doubles).
//
// # Safety
// `zeros` must hold `2 * count` doubles (or be null when `count` is 0);
// `map` must be writable.
enum PlStatus paredlab_map_new(const double *zeros, size_t count, struct PlMap **map);

// # Safety
// `map` must come from this library or be null.
void paredlab_map_free(struct PlMap *map);

// # Safety
// `map` must be a live handle.
size_t paredlab_map_degree(const struct PlMap *map);

// Boundary fixed points in turns, labels `0..=d`; `buf` holds `d + 1` doubles.
//
// # Safety
// `map` must be a live handle; `buf` must hold `cap` doubles.
enum PlStatus paredlab_map_fixed_points(const struct PlMap *map, double *buf, size_t cap);

// Log-multipliers at the fixed points, labels `0..=d`.
//
// # Safety
// `map` must be a live handle; `buf` must hold `cap` doubles.
enum PlStatus paredlab_map_multipliers(const struct PlMap *map, double *buf, size_t cap);

// Largest hyperbolic displacement of a critical point.
//
// # Safety
// `map` must be a live handle; `value` must be writable.
enum PlStatus paredlab_map_critical_displacement(const struct PlMap *map, double *value);

// Traces period-`period` points around `turns` turns of `e^{2πiθ} z̄^d`
// sampled at `steps` points.
//
// # Safety
// `trace` must be writable.
enum PlStatus paredlab_rotation_trace(size_t d,
                                      int64_t turns,
                                      size_t steps,
                                      size_t period,
                                      struct PlTrace **trace);

// `a` followed by `b` as a new handle.
//
// # Safety
// Both handles must be live; `trace` must be writable.
enum PlStatus paredlab_trace_compose(const struct PlTrace *a,
                                     const struct PlTrace *b,
                                     struct PlTrace **trace);

// # Safety
// `trace` must come from this library or be null.
void paredlab_trace_free(struct PlTrace *trace);

// Piece permutation in one-line notation; `buf` holds `d + 1` entries.
//
// # Safety
// `trace` must be a live handle; `buf` must hold `cap` entries.
enum PlStatus paredlab_trace_permutation(const struct PlTrace *trace, size_t *buf, size_t cap);

// Braid word as signed generator indices. `len` receives the word length
// even when `cap` is too small, so callers can size the buffer.
//
// # Safety
// `trace` must be a live handle; `buf` must hold `cap` entries; `len` must
// be writable.
enum PlStatus paredlab_trace_braid(const struct PlTrace *trace,
                                   int32_t *buf,
                                   size_t cap,
                                   size_t *len);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PAREDLAB_H */
