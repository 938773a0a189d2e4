#ifndef NETDESIGN_H
#define NETDESIGN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  ND_STATUS_OK = 0,
  ND_STATUS_NULL_POINTER = 1,
  ND_STATUS_INVALID_INPUT = 2,
  ND_STATUS_PARSE = 3,
  ND_STATUS_INVALID_PARAMETER = 4,
  ND_STATUS_NOT_CONNECTED = 5,
  ND_STATUS_GENERATION = 6,
  ND_STATUS_SEARCH = 7,
  ND_STATUS_IO = 8,
  ND_STATUS_BUFFER_TOO_SMALL = 9,
  ND_STATUS_PANIC = 10,
} NdStatus;

enum NdRouting
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  ND_ROUTING_SPR = 0,
  ND_ROUTING_EFR = 1,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum NdRouting NdRouting;
#else
typedef uint32_t NdRouting;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

enum NdScheme
#if defined(__cplusplus) || __STDC_VERSION__ >= 202311L
  : uint32_t
#endif // defined(__cplusplus) || __STDC_VERSION__ >= 202311L
 {
  ND_SCHEME_UNIFORM = 0,
  ND_SCHEME_DEGREE = 1,
  ND_SCHEME_BETWEENNESS = 2,
  ND_SCHEME_EFFECTIVE_BETWEENNESS = 3,
};
#ifndef __cplusplus
#if __STDC_VERSION__ >= 202311L
typedef enum NdScheme NdScheme;
#else
typedef uint32_t NdScheme;
#endif // __STDC_VERSION__ >= 202311L
#endif // __cplusplus

/**
 * Opaque graph handle.
 */
typedef struct NdGraph NdGraph;

/**
 * Opaque effective-betweenness profile handle.
 */
typedef struct NdProfile NdProfile;

/**
 * Analytic evaluation of one capability/routing design.
 */
typedef struct {
  double rc_analytic;
  double c_max;
  size_t argmin_node;
} NdEvaluation;

/**
 * Window layout for the order-parameter measurement.
 */
typedef struct {
  size_t warmup;
  size_t delta_t;
  size_t windows;
} NdEtaConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *nd_version(void);

/**
 * Message of the last failed call on this thread, or NULL. The pointer
 * stays valid until the next call into the library on the same thread.
 */
const char *nd_last_error_message(void);

/**
 * Generates a benchmark topology (`"ring"`, `"lattice"`, `"ws"`, `"er"`,
 * `"ba"`, `"pa"`, `"hot"`) with `n` nodes.
 *
 * # Safety
 * `family` must be a NUL-terminated string; `out` must be writable.
 */
NdStatus nd_graph_generate(const char *family, size_t n, uint64_t seed, NdGraph **out);

/**
 * Parses a whitespace-separated edge list (`#` starts a comment line).
 *
 * # Safety
 * `edge_list` must be a NUL-terminated string; `out` must be writable.
 */
NdStatus nd_graph_from_edge_list(const char *edge_list, NdGraph **out);

/**
 * Builds a graph on `n` nodes from `edge_count` pairs stored flat in
 * `pairs` (`u0, v0, u1, v1, ...`).
 *
 * # Safety
 * `pairs` must hold `2 * edge_count` values; `out` must be writable.
 */
NdStatus nd_graph_from_edges(size_t n, const uint32_t *pairs, size_t edge_count, NdGraph **out);

/**
 * Releases a graph. NULL is ignored.
 *
 * # Safety
 * `graph` must come from this library and not be used afterwards.
 */
void nd_graph_free(NdGraph *graph);

/**
 * Node count, 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t nd_graph_node_count(const NdGraph *graph);

/**
 * Edge count, 0 for NULL.
 *
 * # Safety
 * `graph` must be NULL or a live handle.
 */
size_t nd_graph_edge_count(const NdGraph *graph);

/**
 * Copies node degrees into `out`, which must hold `node_count` values.
 *
 * # Safety
 * `graph` must be a live handle; `out` must hold `len` values.
 */
NdStatus nd_graph_degrees(const NdGraph *graph, uint32_t *out, size_t len);

/**
 * Diameter and average shortest path length of a connected graph.
 *
 * # Safety
 * `graph` must be a live handle; both outputs must be writable.
 */
NdStatus nd_graph_metrics(const NdGraph *graph, uint32_t *diameter, double *avg_path_length);

/**
 * Serialises a graph as an edge list. Release the string with
 * [`nd_string_free`].
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
NdStatus nd_graph_to_edge_list(const NdGraph *graph, char **out);

/**
 * Releases a string returned by this library. NULL is ignored.
 *
 * # Safety
 * `s` must come from this library and not be used afterwards.
 */
void nd_string_free(char *s);

/**
 * Effective betweenness of every node under a routing algorithm.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
NdStatus nd_profile_compute(const NdGraph *graph, uint32_t routing_code, NdProfile **out);

/**
 * Releases a profile. NULL is ignored.
 *
 * # Safety
 * `profile` must come from this library and not be used afterwards.
 */
void nd_profile_free(NdProfile *profile);

/**
 * Number of nodes covered, 0 for NULL.
 *
 * # Safety
 * `profile` must be NULL or a live handle.
 */
size_t nd_profile_node_count(const NdProfile *profile);

/**
 * Largest betweenness value, NaN for NULL.
 *
 * # Safety
 * `profile` must be NULL or a live handle.
 */
double nd_profile_b_max(const NdProfile *profile);

/**
 * Average candidate-path length, NaN for NULL.
 *
 * # Safety
 * `profile` must be NULL or a live handle.
 */
double nd_profile_avg_path_length(const NdProfile *profile);

/**
 * Copies per-node betweenness into `out`.
 *
 * # Safety
 * `profile` must be a live handle; `out` must hold `len` values.
 */
NdStatus nd_profile_values(const NdProfile *profile, double *out, size_t len);

/**
 * Analytic critical rate and `C_max` of a design. BC capabilities come
 * from shortest-path betweenness, EBC from the evaluated routing.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
NdStatus nd_evaluate(const NdGraph *graph,
                     uint32_t scheme_code,
                     uint32_t routing_code,
                     NdEvaluation *out);

/**
 * Order parameter of a design at generation rate `rate`. `config` may be
 * NULL for the defaults (1000 warm-up steps, 10 windows of 100 steps).
 *
 * # Safety
 * `graph` must be a live handle; `config` NULL or readable; `eta` writable.
 */
NdStatus nd_measure_eta(const NdGraph *graph,
                        uint32_t scheme_code,
                        uint32_t routing_code,
                        double rate,
                        const NdEtaConfig *config,
                        uint64_t seed,
                        double *eta);

/**
 * Simulated critical rate by bisection over `[1, 4 R_c]` around the analytic
 * rate, three runs per decision. Either output may be NULL.
 *
 * # Safety
 * `graph` must be a live handle; non-NULL outputs must be writable.
 */
NdStatus nd_estimate_rc(const NdGraph *graph,
                        uint32_t scheme_code,
                        uint32_t routing_code,
                        uint64_t seed,
                        double *rc_sim,
                        double *rc_analytic);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NETDESIGN_H */
