#ifndef GLIDE_H
#define GLIDE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum GlideStatus {
  GLIDE_STATUS_OK = 0,
  GLIDE_STATUS_NULL_POINTER = 1,
  GLIDE_STATUS_INVALID_ARGUMENT = 2,
  GLIDE_STATUS_PARSE = 3,
  GLIDE_STATUS_IO = 4,
  GLIDE_STATUS_RUN_FAILURE = 5,
  GLIDE_STATUS_PANIC = 6,
} GlideStatus;

// Opaque run configuration.
typedef struct GlideConfigHandle GlideConfigHandle;

// Opaque categorical dataset.
typedef struct GlideDataset GlideDataset;

// Opaque directed acyclic graph.
typedef struct GlideGraph GlideGraph;

// Opaque discovery result.
typedef struct GlideRun GlideRun;

// Structural comparison of a predicted graph against the truth.
typedef struct GlideMetrics {
  size_t shd;
  double spurious_rate;
  double tpr;
  size_t missing;
  size_t extra;
  size_t reversed;
  size_t predicted_edges;
  size_t true_edges;
} GlideMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. Valid until the next call.
const char *glide_last_error(void);

// Library version string (static storage).
const char *glide_version(void);

// Releases a string returned by this library. NULL is ignored.
//
// # Safety
// `s` must come from this library and not have been freed.
void glide_string_free(char *s);

// Default configuration.
struct GlideConfigHandle *glide_config_new(void);

// Configuration from a JSON object; missing fields take defaults.
//
// # Safety
// `json` must be a NUL-terminated string; `out` must be writable.
enum GlideStatus glide_config_from_json(const char *json, struct GlideConfigHandle **out);

// Sets the number of environments per family.
//
// # Safety
// `cfg` must be a live handle.
enum GlideStatus glide_config_set_m(struct GlideConfigHandle *cfg, size_t m);

// Sets the retention floor of every prior.
//
// # Safety
// `cfg` must be a live handle.
enum GlideStatus glide_config_set_gamma(struct GlideConfigHandle *cfg, double gamma);

// Sets the seed of every random stream.
//
// # Safety
// `cfg` must be a live handle.
enum GlideStatus glide_config_set_seed(struct GlideConfigHandle *cfg, uint64_t seed);

// Configuration as JSON; release with `glide_string_free`.
//
// # Safety
// `cfg` must be a live handle.
enum GlideStatus glide_config_to_json(const struct GlideConfigHandle *cfg, char **out);

// # Safety
// `cfg` must be NULL or a handle not yet freed.
void glide_config_free(struct GlideConfigHandle *cfg);

// Categorical dataset from row-major category codes (`n_rows * n_vars` values).
// `names` may be NULL, giving `X0, X1, ...`.
//
// # Safety
// `codes` must hold `n_rows * n_vars` values; `names`, if not NULL, `n_vars` strings.
enum GlideStatus glide_dataset_from_codes(const uint32_t *codes,
                                          size_t n_rows,
                                          size_t n_vars,
                                          const char *const *names,
                                          struct GlideDataset **out);

// Dataset from row-major reals discretized into `bins` equal-width bins per column.
//
// # Safety
// As for `glide_dataset_from_codes`, with `values` holding `n_rows * n_vars` reals.
enum GlideStatus glide_dataset_from_continuous(const double *values,
                                               size_t n_rows,
                                               size_t n_vars,
                                               const char *const *names,
                                               size_t bins,
                                               struct GlideDataset **out);

// Categorical dataset from a CSV file with a header row of names.
//
// # Safety
// `path` must be a NUL-terminated string; `out` must be writable.
enum GlideStatus glide_dataset_from_csv(const char *path, struct GlideDataset **out);

// Number of rows, or 0 for NULL.
//
// # Safety
// `ds` must be NULL or a live handle.
size_t glide_dataset_rows(const struct GlideDataset *ds);

// Number of variables, or 0 for NULL.
//
// # Safety
// `ds` must be NULL or a live handle.
size_t glide_dataset_vars(const struct GlideDataset *ds);

// # Safety
// `ds` must be NULL or a handle not yet freed.
void glide_dataset_free(struct GlideDataset *ds);

// Learns a graph; `cfg` may be NULL for defaults.
//
// # Safety
// `ds` must be a live handle; `cfg` NULL or live; `out` writable.
enum GlideStatus glide_discover(const struct GlideDataset *ds,
                                const struct GlideConfigHandle *cfg,
                                struct GlideRun **out);

// Number of learned edges, or 0 for NULL.
//
// # Safety
// `run` must be NULL or a live handle.
size_t glide_run_edge_count(const struct GlideRun *run);

// Copies up to `capacity` learned edges as (parent, child) column indices;
// `written` receives the number copied.
//
// # Safety
// `parents` and `children` must hold `capacity` values; `written` must be writable.
enum GlideStatus glide_run_edges(const struct GlideRun *run,
                                 size_t *parents,
                                 size_t *children,
                                 size_t capacity,
                                 size_t *written);

// Full run report as JSON; release with `glide_string_free`.
//
// # Safety
// `run` must be a live handle; `out` writable.
enum GlideStatus glide_run_report_json(const struct GlideRun *run, char **out);

// Copy of the learned graph.
//
// # Safety
// `run` must be a live handle; `out` writable.
enum GlideStatus glide_run_graph(const struct GlideRun *run, struct GlideGraph **out);

// # Safety
// `run` must be NULL or a handle not yet freed.
void glide_run_free(struct GlideRun *run);

// Graph from edge-list text (`# nodes: A,B` header, then `parent<TAB>child` lines).
//
// # Safety
// `text` must be a NUL-terminated string; `out` writable.
enum GlideStatus glide_graph_from_edge_list(const char *text, struct GlideGraph **out);

// Edge-list text of a graph; release with `glide_string_free`.
//
// # Safety
// `g` must be a live handle; `out` writable.
enum GlideStatus glide_graph_to_edge_list(const struct GlideGraph *g, char **out);

// # Safety
// `g` must be NULL or a handle not yet freed.
void glide_graph_free(struct GlideGraph *g);

// Compares `pred` against `truth`; nodes are matched by name.
//
// # Safety
// Both graphs must be live handles; `out` writable.
enum GlideStatus glide_eval(const struct GlideGraph *pred,
                            const struct GlideGraph *truth,
                            struct GlideMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GLIDE_H */
