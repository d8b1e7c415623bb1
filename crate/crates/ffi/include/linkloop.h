/* C interface to the linkloop feedback-loop simulator. */

#pragma once

/* Generated with cbindgen:0.27.0 */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes for every fallible entry point.
 */
typedef enum LinkloopStatus {
  LINKLOOP_STATUS_OK = 0,
  LINKLOOP_STATUS_NULL_POINTER = 1,
  LINKLOOP_STATUS_INVALID_ARGUMENT = 2,
  LINKLOOP_STATUS_RUNTIME_ERROR = 3,
  LINKLOOP_STATUS_INDEX_OUT_OF_RANGE = 4,
  /**
   * The requested metric is undefined at that iteration.
   */
  LINKLOOP_STATUS_MISSING_VALUE = 5,
} LinkloopStatus;

/**
 * Opaque handle to a labeled directed graph.
 */
typedef struct LinkloopGraph LinkloopGraph;

/**
 * Opaque handle to a finished simulation run.
 */
typedef struct LinkloopResult LinkloopResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the most recent error on this thread. The pointer stays
 * valid until the next failing call on the same thread; do not free it.
 */
const char *linkloop_last_error_message(void);

/**
 * Library version as a static string; do not free.
 */
const char *linkloop_version(void);

/**
 * Frees a string allocated by this library.
 *
 * # Safety
 * `s` must be a pointer previously returned by a `linkloop_*` function
 * that transfers string ownership, and must not have been freed already.
 */
void linkloop_string_free(char *s);

/**
 * Generates a network for one of the named presets G0..G4.
 *
 * # Safety
 * `preset` must be a valid NUL-terminated string and `out` a valid
 * pointer to receive the handle.
 */
enum LinkloopStatus linkloop_graph_generate_preset(const char *preset,
                                                   uintptr_t n,
                                                   double avg_out_degree,
                                                   uint64_t seed,
                                                   struct LinkloopGraph **out);

/**
 * Generates a network with explicit share and homophily targets.
 *
 * # Safety
 * `out` must be a valid pointer to receive the handle.
 */
enum LinkloopStatus linkloop_graph_generate(uintptr_t n,
                                            double avg_out_degree,
                                            double s_m,
                                            double h_m,
                                            double h_maj,
                                            uint64_t seed,
                                            struct LinkloopGraph **out);

/**
 * Loads a graph from an edge-list file and a label file.
 *
 * # Safety
 * Both paths must be valid NUL-terminated strings; `out` must be a valid
 * pointer to receive the handle.
 */
enum LinkloopStatus linkloop_graph_load(const char *edges_path,
                                        const char *labels_path,
                                        struct LinkloopGraph **out);

/**
 * Writes the graph in canonical edge-list plus label-file form.
 *
 * # Safety
 * `graph` must be a live handle; both paths must be valid strings.
 */
enum LinkloopStatus linkloop_graph_save(const struct LinkloopGraph *graph,
                                        const char *edges_path,
                                        const char *labels_path);

/**
 * Node count of a graph handle; 0 for a null handle.
 *
 * # Safety
 * `graph` must be a live handle or null.
 */
uintptr_t linkloop_graph_node_count(const struct LinkloopGraph *graph);

/**
 * Edge count of a graph handle; 0 for a null handle.
 *
 * # Safety
 * `graph` must be a live handle or null.
 */
uintptr_t linkloop_graph_edge_count(const struct LinkloopGraph *graph);

/**
 * Measured minority share and per-group homophily of the graph.
 *
 * # Safety
 * `graph` must be a live handle; out-pointers must be valid or null
 * (null out-pointers are skipped).
 */
enum LinkloopStatus linkloop_graph_stats(const struct LinkloopGraph *graph,
                                         double *out_s_m,
                                         double *out_h_m,
                                         double *out_h_maj);

/**
 * Releases a graph handle.
 *
 * # Safety
 * `graph` must be a handle from this library, not yet freed, or null.
 */
void linkloop_graph_free(struct LinkloopGraph *graph);

/**
 * Runs the feedback-loop simulation on a copy of `graph`.
 *
 * `config_text` uses the same `key=value` grammar as the CLI config file
 * (pass an empty string or null for all defaults); `seed` overrides any
 * seed given there.
 *
 * # Safety
 * `graph` must be a live handle; `config_text` must be null or a valid
 * NUL-terminated string; `out` must be a valid pointer.
 */
enum LinkloopStatus linkloop_simulate(const struct LinkloopGraph *graph,
                                      const char *config_text,
                                      uint64_t seed,
                                      struct LinkloopResult **out);

/**
 * Number of iteration records in a result; 0 for a null handle.
 *
 * # Safety
 * `result` must be a live handle or null.
 */
uintptr_t linkloop_result_iterations(const struct LinkloopResult *result);

/**
 * Reads one metric at iteration `t` (1-based) by its CSV column name
 * (e.g. "e_min", "gini_maj", "h_m", "edges_added").
 *
 * # Safety
 * `result` must be a live handle, `name` a valid string, `out` a valid
 * pointer.
 */
enum LinkloopStatus linkloop_result_metric(const struct LinkloopResult *result,
                                           uintptr_t t,
                                           const char *name,
                                           double *out);

/**
 * Final minority share of recommendation slots, convenience accessor.
 *
 * # Safety
 * `result` must be a live handle; `out` a valid pointer.
 */
enum LinkloopStatus linkloop_result_final_exposure(const struct LinkloopResult *result,
                                                   double *out);

/**
 * Renders the full per-iteration metrics table as CSV. Free the returned
 * string with [`linkloop_string_free`].
 *
 * # Safety
 * `result` must be a live handle.
 */
char *linkloop_result_metrics_csv(const struct LinkloopResult *result);

/**
 * Final graph of the run as a new graph handle.
 *
 * # Safety
 * `result` must be a live handle; `out` a valid pointer.
 */
enum LinkloopStatus linkloop_result_final_graph(const struct LinkloopResult *result,
                                                struct LinkloopGraph **out);

/**
 * Releases a result handle.
 *
 * # Safety
 * `result` must be a handle from this library, not yet freed, or null.
 */
void linkloop_result_free(struct LinkloopResult *result);

/**
 * Label code used for the majority group in label files.
 */
uint8_t linkloop_group_majority_code(void);

/**
 * Label code used for the minority group in label files.
 */
uint8_t linkloop_group_minority_code(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus
