#ifndef IMVERDE_H
#define IMVERDE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum ImvStatus {
  IMV_STATUS_OK = 0,
  IMV_STATUS_NULL_POINTER = 1,
  IMV_STATUS_INVALID_INPUT = 2,
  IMV_STATUS_IO = 3,
  IMV_STATUS_NUMERIC = 4,
  IMV_STATUS_PANIC = 5,
  IMV_STATUS_BUFFER_TOO_SMALL = 6,
} ImvStatus;

typedef enum ImvVisiting {
  IMV_VISITING_CONSTANT = 0,
  IMV_VISITING_LINEAR = 1,
  IMV_VISITING_EXPONENTIAL = 2,
} ImvVisiting;

/**
 * Opaque graph handle.
 */
typedef struct ImvGraph ImvGraph;

/**
 * Opaque trained-model handle.
 */
typedef struct ImvModel ImvModel;

/**
 * Training settings. Fill with [`imv_train_options_default`] and adjust.
 */
typedef struct ImvTrainOptions {
  uintptr_t dim;
  uintptr_t negatives;
  uintptr_t hidden;
  uintptr_t iters_unsup;
  uintptr_t iters_sup;
  uintptr_t batch_size;
  uintptr_t walk_length;
  uintptr_t window;
  double alpha;
  double jump_prob;
  double lambda;
  double lr_unsup;
  double lr_sup;
} ImvTrainOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length in bytes.
 *
 * # Safety
 * `buf` must be null or point to `len` writable bytes.
 */
uintptr_t imv_last_error(char *buf, uintptr_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *imv_version(void);

/**
 * Builds a graph from `m` edges `(src[k], dst[k])`. `weights` may be null
 * for unit weights.
 *
 * # Safety
 * `src` and `dst` must hold `m` elements, `weights` null or `m` elements;
 * `out` must be writable.
 */
enum ImvStatus imv_graph_from_edges(uintptr_t n,
                                    const uintptr_t *src,
                                    const uintptr_t *dst,
                                    const double *weights,
                                    uintptr_t m,
                                    bool directed,
                                    struct ImvGraph **out);

/**
 * The labeled karate-club graph.
 *
 * # Safety
 * `out` must be writable.
 */
enum ImvStatus imv_graph_karate(struct ImvGraph **out);

/**
 * Reads a whitespace edge list (`src dst [weight]` per line).
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum ImvStatus imv_graph_load_edge_list(const char *path,
                                        bool directed,
                                        bool weighted,
                                        struct ImvGraph **out);

/**
 * Replaces node labels. `labels[v] < 0` marks `v` unlabeled.
 *
 * # Safety
 * `graph` must be a live handle and `labels` must hold `n` elements.
 */
enum ImvStatus imv_graph_set_labels(struct ImvGraph *graph, const int64_t *labels, uintptr_t n);

/**
 * # Safety
 * `graph` must be a live handle; outputs must be writable.
 */
enum ImvStatus imv_graph_size(const struct ImvGraph *graph, uintptr_t *nodes, uintptr_t *edges);

/**
 * # Safety
 * `graph` must be null or a handle from this library, not yet freed.
 */
void imv_graph_free(struct ImvGraph *graph);

/**
 * One reweighted walk of `length` steps from `start`, written to `path`
 * (`length + 1` nodes including the start).
 *
 * # Safety
 * `graph` must be a live handle and `path` must hold `path_len` elements.
 */
enum ImvStatus imv_walk(const struct ImvGraph *graph,
                        enum ImvVisiting kind,
                        double alpha,
                        uintptr_t start,
                        uintptr_t length,
                        uint64_t seed,
                        uintptr_t *path,
                        uintptr_t path_len);

/**
 * Defaults: d 50, k 10, alpha 0.7, r 0.2, walk length 10.
 *
 * # Safety
 * `out` must be writable.
 */
enum ImvStatus imv_train_options_default(struct ImvTrainOptions *out);

/**
 * Trains on a labeled graph. Nodes in `labeled` supply training labels,
 * nodes in `test` are held out; all others are unlabeled.
 *
 * # Safety
 * `graph` must be a live handle, `labeled`/`test` must hold the given
 * counts, `options` must be null (defaults) or valid, `out` writable.
 */
enum ImvStatus imv_train(const struct ImvGraph *graph,
                         const uintptr_t *labeled,
                         uintptr_t n_labeled,
                         const uintptr_t *test,
                         uintptr_t n_test,
                         uintptr_t minority_class,
                         const struct ImvTrainOptions *options,
                         uint64_t seed,
                         struct ImvModel **out);

/**
 * # Safety
 * `model` must be a live handle; outputs must be writable.
 */
enum ImvStatus imv_model_shape(const struct ImvModel *model,
                               uintptr_t *nodes,
                               uintptr_t *dim,
                               uintptr_t *classes);

/**
 * Copies the embedding of `node` into `out` (`len >= dim`).
 *
 * # Safety
 * `model` must be a live handle and `out` must hold `len` elements.
 */
enum ImvStatus imv_model_embedding(const struct ImvModel *model,
                                   uintptr_t node,
                                   double *out,
                                   uintptr_t len);

/**
 * Class probabilities for `node` of the graph the model was trained on.
 *
 * # Safety
 * Handles must be live and `out` must hold `len` elements.
 */
enum ImvStatus imv_model_predict(const struct ImvModel *model,
                                 const struct ImvGraph *graph,
                                 uintptr_t node,
                                 double *out,
                                 uintptr_t len);

/**
 * # Safety
 * `model` must be null or a handle from this library, not yet freed.
 */
void imv_model_free(struct ImvModel *model);

/**
 * Mann-Whitney ROC AUC. `labels[i] != 0` marks a positive.
 *
 * # Safety
 * `scores` and `labels` must hold `n` elements; `out` must be writable.
 */
enum ImvStatus imv_roc_auc(const double *scores, const uint8_t *labels, uintptr_t n, double *out);

/**
 * Rank-based average precision; ties keep input order.
 *
 * # Safety
 * `scores` and `labels` must hold `n` elements; `out` must be writable.
 */
enum ImvStatus imv_average_precision(const double *scores,
                                     const uint8_t *labels,
                                     uintptr_t n,
                                     double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IMVERDE_H */
