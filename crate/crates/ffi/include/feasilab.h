#ifndef FEASILAB_H
#define FEASILAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Status codes returned by every fallible entry point.
typedef enum FlStatus {
  FL_STATUS_OK = 0,
  FL_STATUS_NULL_POINTER = 1,
  // Malformed JSON, unknown scenario, bad argument or set description.
  FL_STATUS_INVALID_INPUT = 2,
  FL_STATUS_DIMENSION_MISMATCH = 3,
  // An iterative routine did not settle within its budget.
  FL_STATUS_NON_CONVERGENT = 4,
  FL_STATUS_UNBOUNDED = 5,
  // A numerical self-check or a precondition failed.
  FL_STATUS_VALIDATION_FAILED = 6,
  FL_STATUS_IO = 7,
  // A Rust panic was caught at the boundary.
  FL_STATUS_PANIC = 8,
} FlStatus;

// Opaque couple `(A, B)` with its displacement vector and nearest sets.
typedef struct FlCouple FlCouple;

// Opaque closed convex set.
typedef struct FlSet FlSet;

// Opaque alternating-projection trace.
typedef struct FlTrace FlTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message for the last failure on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *fl_last_error(void);

// Frees a string returned by this library.
//
// # Safety
// `s` must come from this library and not have been freed.
void fl_string_free(char *s);

// Builds a set from its JSON description, e.g.
// `{"type":"ball","center":[0,0],"radius":1}`.
//
// # Safety
// `json` must be a NUL-terminated string; `out_set` a valid pointer.
enum FlStatus fl_set_from_json(const char *json, struct FlSet **out_set);

// # Safety
// `set` must come from [`fl_set_from_json`] and not have been freed.
void fl_set_free(struct FlSet *set);

// Ambient dimension, or 0 for a null handle.
//
// # Safety
// `set` must be null or a live handle.
size_t fl_set_dim(const struct FlSet *set);

// Nearest point of `set` to `x`, written to `out_point` (both of length `dim`).
//
// # Safety
// Pointers must be valid for `dim` doubles; `set` a live handle.
enum FlStatus fl_set_project(const struct FlSet *set,
                             const double *x,
                             size_t dim,
                             double *out_point);

// # Safety
// `x` must be valid for `dim` doubles; `set` a live handle.
enum FlStatus fl_set_dist(const struct FlSet *set, const double *x, size_t dim, double *out_dist);

// # Safety
// `x` must be valid for `dim` doubles; `set` a live handle.
enum FlStatus fl_set_contains(const struct FlSet *set,
                              const double *x,
                              size_t dim,
                              double tol,
                              bool *out_inside);

// Localized Hausdorff gap `h_N(A, B)`. `out_exact` is set when the value is
// exact rather than a sampled lower bound.
//
// # Safety
// `a`, `b` must be live handles; out-pointers valid.
enum FlStatus fl_aw_gap(const struct FlSet *a,
                        const struct FlSet *b,
                        uint32_t n,
                        size_t samples,
                        uint64_t seed,
                        double *out_gap,
                        bool *out_exact);

// Builds the couple `(A, B)`: displacement vector and nearest sets.
// `e_analytic` (nullable) supplies the nearest set `E` in closed form; it
// is checked against the couple's identities. Without it `E` is resolved
// by Dykstra's algorithm, which is slow when `A` and `B − v` only touch
// tangentially.
//
// # Safety
// `a`, `b` must be live handles, `e_analytic` null or live; `out_couple` valid.
enum FlStatus fl_couple_new(const struct FlSet *a,
                            const struct FlSet *b,
                            const struct FlSet *e_analytic,
                            struct FlCouple **out_couple);

// # Safety
// `couple` must come from [`fl_couple_new`] and not have been freed.
void fl_couple_free(struct FlCouple *couple);

// # Safety
// `couple` must be null or a live handle.
size_t fl_couple_dim(const struct FlCouple *couple);

// Displacement vector `v` (length `dim`) and `d(A, B) = ‖v‖`.
//
// # Safety
// `out_v` must be valid for `dim` doubles; `out_dist` may be null.
enum FlStatus fl_couple_displacement(const struct FlCouple *couple,
                                     double *out_v,
                                     size_t dim,
                                     double *out_dist);

// Distance from `x` to `E`, the points of `A` nearest to `B`.
//
// # Safety
// `x` must be valid for `dim` doubles.
enum FlStatus fl_couple_dist_to_e(const struct FlCouple *couple,
                                  const double *x,
                                  size_t dim,
                                  double *out_dist);

// Alternating projections from `c0` for at most `cap` rounds.
//
// # Safety
// `c0` must be valid for `dim` doubles; `out_trace` valid.
enum FlStatus fl_run_ap(const struct FlCouple *couple,
                        const double *c0,
                        size_t dim,
                        uint64_t cap,
                        double tol,
                        struct FlTrace **out_trace);

// # Safety
// `trace` must come from [`fl_run_ap`] and not have been freed.
void fl_trace_free(struct FlTrace *trace);

// Number of recorded rounds, or 0 for a null handle.
//
// # Safety
// `trace` must be null or a live handle.
size_t fl_trace_len(const struct FlTrace *trace);

// 0 converged, 1 iteration cap reached, 2 diverged; -1 for a null handle.
//
// # Safety
// `trace` must be null or a live handle.
int32_t fl_trace_status(const struct FlTrace *trace);

// Round `index`: the iterate in `A` (`out_a`), in `B` (`out_b`) and the
// distance of the former to `E`. Any out-pointer may be null.
//
// # Safety
// Non-null buffers must be valid for `dim` doubles.
enum FlStatus fl_trace_record(const struct FlTrace *trace,
                              size_t index,
                              double *out_a,
                              double *out_b,
                              size_t dim,
                              double *out_dist_e);

// Writes the trace as CSV to `path`.
//
// # Safety
// `path` must be a NUL-terminated string.
enum FlStatus fl_trace_write_csv(const struct FlTrace *trace, const char *path);

// Runs a bundled scenario, writing its artifacts under `out_dir`.
// `iterations == 0` keeps the scenario's default. On success `out_report`
// receives the JSON run report (free with [`fl_string_free`]); a scenario
// whose expectations fail still returns `Ok` with `"passed": false`.
//
// # Safety
// String arguments must be NUL-terminated; `out_report` valid.
enum FlStatus fl_run_scenario(const char *name,
                              const char *out_dir,
                              uint64_t iterations,
                              char **out_report);

// `η = √(1 − 1/K²)` for `K >= 1`.
//
// # Safety
// `out_eta` must be valid.
enum FlStatus fl_contraction_factor(double k, double *out_eta);

// Euclidean modulus of convexity on `[0, 2]`.
//
// # Safety
// `out_delta` must be valid.
enum FlStatus fl_modulus_of_convexity(double eta, double *out_delta);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FEASILAB_H */
