#ifndef NETCONC_H
#define NETCONC_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum NcStatus {
  NC_STATUS_OK = 0,
  NC_STATUS_NULL_POINTER = 1,
  NC_STATUS_INVALID_UTF8 = 2,
  NC_STATUS_PANIC = 3,
  NC_STATUS_INPUT = 10,
  NC_STATUS_SPEC = 11,
  NC_STATUS_UNSUPPORTED = 12,
  NC_STATUS_DEGENERATE = 13,
  NC_STATUS_Q_MISMATCH = 14,
  NC_STATUS_TOO_LARGE = 15,
  NC_STATUS_INFEASIBLE = 16,
  NC_STATUS_INVALID_MOVE_KIND = 17,
  NC_STATUS_CONFIG = 18,
  NC_STATUS_IO = 19,
  NC_STATUS_JSON = 20,
  NC_STATUS_BUFFER_TOO_SMALL = 21,
} NcStatus;

typedef struct NcGraph NcGraph;
typedef struct NcFunctional NcFunctional;

/* Message for the last failed call on this thread. */
const char *nc_last_error(void);

const char *nc_version(void);

/* edges holds 2 * n_edges node indices, pairwise. */
NcStatus nc_graph_from_edges(size_t n, const size_t *edges, size_t n_edges, NcGraph **out_graph);

void nc_graph_free(NcGraph *g);

size_t nc_graph_node_count(const NcGraph *g);

size_t nc_graph_edge_count(const NcGraph *g);

NcStatus nc_graph_degree(const NcGraph *g, size_t node, size_t *out_degree);

NcStatus nc_graph_has_edge(const NcGraph *g, size_t i, size_t j, int32_t *out_present);

NcStatus nc_graph_flip_edge(const NcGraph *g, size_t i, size_t j, NcGraph **out_graph);

NcStatus nc_graph_load(const char *path, NcGraph **out_graph);

NcStatus nc_graph_save(const NcGraph *g, const char *path);

NcStatus nc_ensemble_sample(const char *spec_json, uint64_t index, NcGraph **out_graph);

NcStatus nc_functional_from_json(const char *json, NcFunctional **out_functional);

void nc_functional_free(NcFunctional *f);

size_t nc_functional_q(const NcFunctional *f);

NcStatus nc_evaluate(const NcFunctional *f,
                     const NcGraph *g,
                     const size_t *labels,
                     size_t n,
                     double *out_value);

NcStatus nc_move_delta(const NcFunctional *f,
                       const NcGraph *g,
                       const size_t *labels,
                       size_t n,
                       size_t node,
                       size_t new_label,
                       double *out_delta);

/* constraint_json may be NULL (unconstrained). */
NcStatus nc_optimize_exhaustive(const NcFunctional *f,
                                const NcGraph *g,
                                const char *constraint_json,
                                size_t *labels_out,
                                size_t capacity,
                                double *value_out);

/* schedule_json may be NULL (default schedule). */
NcStatus nc_optimize_sa(const NcFunctional *f,
                        const NcGraph *g,
                        const char *constraint_json,
                        const char *schedule_json,
                        uint64_t seed,
                        size_t *labels_out,
                        size_t capacity,
                        double *value_out);

NcStatus nc_bound_eval(const char *spec_json, double t, double *out_raw, double *out_clamped);

NcStatus nc_gamma_star(double j, size_t n1, size_t n2, size_t m12, double *out_gamma);

#ifdef __cplusplus
}
#endif

#endif
