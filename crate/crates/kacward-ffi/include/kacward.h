#ifndef KACWARD_H
#define KACWARD_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define KW_OK 0

#define KW_ERR_NULL -1

#define KW_ERR_INPUT -2

#define KW_ERR_NUMERICAL -3

#define KW_ERR_PANIC -4

/**
 * Opaque graph handle.
 */
typedef struct KwGraph KwGraph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Static description of a status code.
 */
const char *kw_status_message(int32_t status);

/**
 * Builds a plane graph from vertex coordinates and edges given as vertex
 * index pairs.
 *
 * # Safety
 * `xs`, `ys` must hold `n_vertices` values; `us`, `vs`, `weights` must hold
 * `n_edges` values; `out` must be writable.
 */
int32_t kw_graph_new(size_t n_vertices,
                     const double *xs,
                     const double *ys,
                     size_t n_edges,
                     const uint32_t *us,
                     const uint32_t *vs,
                     const double *weights,
                     struct KwGraph **out);

/**
 * Builds a graph from the JSON schema used by the command-line tool.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
int32_t kw_graph_from_json(const char *json, struct KwGraph **out);

/**
 * Square-lattice torus with uniform weight.
 *
 * # Safety
 * `out` must be writable.
 */
int32_t kw_graph_torus(size_t width, size_t height, double weight, struct KwGraph **out);

/**
 * # Safety
 * `graph` must come from a constructor above and not be freed twice.
 */
void kw_graph_free(struct KwGraph *graph);

/**
 * # Safety
 * `graph` must be a live handle; the out-pointers must be writable.
 */
int32_t kw_graph_size(const struct KwGraph *graph,
                      size_t *n_vertices,
                      size_t *n_edges,
                      size_t *n_faces);

/**
 * Face containing the point `(x, y)`.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
int32_t kw_face_at_point(const struct KwGraph *graph, double x, double y, size_t *out);

/**
 * Ising partition function `|Pf K̂|`.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
int32_t kw_partition(const struct KwGraph *graph, double *out);

/**
 * Spin correlation of `n` inner faces.
 *
 * # Safety
 * `faces` must hold `n` values (or be null with `n == 0`); `graph` must be a
 * live handle; `out` must be writable.
 */
int32_t kw_spin_correlation(const struct KwGraph *graph,
                            const size_t *faces,
                            size_t n,
                            double *out);

/**
 * Pfaffian minor of `K̂⁻¹` at `n` oriented edges (`2k` and `2k+1` for edge `k`).
 *
 * # Safety
 * `labels` must hold `n` values; `graph` must be a live handle; `out` must
 * be writable.
 */
int32_t kw_fermion_pfaffian(const struct KwGraph *graph,
                            const size_t *labels,
                            size_t n,
                            double *out);

/**
 * Double-Ising partition function.
 *
 * # Safety
 * `graph` must be a live handle; `out` must be writable.
 */
int32_t kw_double_partition(const struct KwGraph *graph, double *out);

/**
 * Torus partition functions: all even subgraphs (`high`) and the
 * null-homologous ones (`low`).
 *
 * # Safety
 * `graph` must be a live handle; `high` and `low` must be writable.
 */
int32_t kw_torus_partition(const struct KwGraph *graph, double *high, double *low);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* KACWARD_H */
