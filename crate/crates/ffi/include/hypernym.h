#ifndef HYPERNYM_H
#define HYPERNYM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HypStatus {
  HYP_STATUS_OK = 0,
  HYP_STATUS_NULL_ARGUMENT = 1,
  HYP_STATUS_INVALID_UTF8 = 2,
  HYP_STATUS_IO = 3,
  HYP_STATUS_PARSE = 4,
  HYP_STATUS_CONFIG = 5,
  HYP_STATUS_DATA = 6,
  HYP_STATUS_BUFFER_TOO_SMALL = 7,
  HYP_STATUS_PANIC = 8,
  HYP_STATUS_INTERNAL = 9,
} HypStatus;

/**
 * Ranking measure for [`hyp_rank_labels`].
 */
typedef enum HypMeasure {
  HYP_MEASURE_COSINE = 0,
  HYP_MEASURE_L1 = 1,
  HYP_MEASURE_L2 = 2,
} HypMeasure;

/**
 * Label set plus NUL-terminated copies of the identifiers.
 */
typedef struct HypLabels HypLabels;

typedef struct HypModel HypModel;

/**
 * Tokenizer, stopword filter and stemmer.
 */
typedef struct HypPipeline HypPipeline;

typedef struct HypTable HypTable;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null. The pointer
 * stays valid until the next call into this library on the same thread.
 */
const char *hyp_last_error(void);

/**
 * Release a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed already.
 */
void hyp_string_free(char *s);

/**
 * Pipeline with the bundled English stopword list, or with the list in
 * `stopwords_path` when it is non-null.
 *
 * # Safety
 * `stopwords_path` is null or a NUL-terminated string; `out` is writable.
 */
enum HypStatus hyp_pipeline_new(const char *stopwords_path, struct HypPipeline **out);

/**
 * # Safety
 * `p` is null or a pipeline from [`hyp_pipeline_new`].
 */
void hyp_pipeline_free(struct HypPipeline *p);

/**
 * Normalized tokens of `input`, joined by single spaces. Free the result
 * with [`hyp_string_free`].
 *
 * # Safety
 * Pointers must be valid; `input` is NUL-terminated.
 */
enum HypStatus hyp_normalize(const struct HypPipeline *p, const char *input, char **out);

/**
 * Load a word2vec text file.
 *
 * # Safety
 * `path` is NUL-terminated; `out` is writable.
 */
enum HypStatus hyp_table_load(const char *path, struct HypTable **out);

/**
 * # Safety
 * `t` is null or a table from [`hyp_table_load`].
 */
void hyp_table_free(struct HypTable *t);

/**
 * Vector width, 0 for a null handle.
 *
 * # Safety
 * `t` is null or a live table.
 */
size_t hyp_table_dim(const struct HypTable *t);

/**
 * Number of rows, 0 for a null handle.
 *
 * # Safety
 * `t` is null or a live table.
 */
size_t hyp_table_len(const struct HypTable *t);

/**
 * Copy the row for `token` into `vector` (capacity `cap`). `found` is set
 * to false and `vector` left untouched when the token has no row.
 *
 * # Safety
 * Pointers must be valid; `vector` holds `cap` doubles.
 */
enum HypStatus hyp_table_lookup(const struct HypTable *t,
                                const char *token,
                                double *vector,
                                size_t cap,
                                bool *found);

/**
 * Term vector: the mean of its in-vocabulary token rows. With `external`
 * set, a pre-composed row keyed by the term is preferred. `coverage`
 * receives the fraction of tokens found and may be null.
 *
 * # Safety
 * Pointers must be valid; `vector` holds `cap` doubles.
 */
enum HypStatus hyp_embed_term(const struct HypTable *t,
                              const struct HypPipeline *p,
                              const char *term,
                              bool external,
                              double *vector,
                              size_t cap,
                              double *coverage);

/**
 * Load labels, one per line.
 *
 * # Safety
 * Pointers must be valid; `path` is NUL-terminated.
 */
enum HypStatus hyp_labels_load(const struct HypPipeline *p,
                               const char *path,
                               struct HypLabels **out);

/**
 * # Safety
 * `l` is null or a label set from [`hyp_labels_load`].
 */
void hyp_labels_free(struct HypLabels *l);

/**
 * # Safety
 * `l` is null or a live label set.
 */
size_t hyp_labels_len(const struct HypLabels *l);

/**
 * Identifier of label `index`, owned by the label set; null when out of
 * range.
 *
 * # Safety
 * `l` is null or a live label set.
 */
const char *hyp_labels_id(const struct HypLabels *l, size_t index);

/**
 * Number of labels literally contained in `term`. 1 puts the term in the
 * rule-decided subset; `matched` (may be null) then receives its label.
 *
 * # Safety
 * Pointers must be valid; `term` is NUL-terminated.
 */
enum HypStatus hyp_labels_match(const struct HypLabels *l,
                                const struct HypPipeline *p,
                                const char *term,
                                size_t *count,
                                size_t *matched);

/**
 * Rank every label by `measure` between the term vector and the label
 * vectors, best first. `order` and `scores` (may be null) hold `cap`
 * entries, at least the number of labels. Distances are reported negated.
 *
 * # Safety
 * Pointers must be valid; buffers hold `cap` entries.
 */
enum HypStatus hyp_rank_labels(const struct HypTable *t,
                               const struct HypLabels *l,
                               const double *term_vector,
                               size_t dim,
                               enum HypMeasure measure,
                               size_t *order,
                               double *scores,
                               size_t cap);

/**
 * Load a trained classifier file.
 *
 * # Safety
 * `path` is NUL-terminated; `out` is writable.
 */
enum HypStatus hyp_model_load(const char *path, struct HypModel **out);

/**
 * # Safety
 * `m` is null or a model from [`hyp_model_load`].
 */
void hyp_model_free(struct HypModel *m);

/**
 * # Safety
 * `m` is null or a live model.
 */
size_t hyp_model_dim(const struct HypModel *m);

/**
 * # Safety
 * `m` is null or a live model.
 */
size_t hyp_model_num_labels(const struct HypModel *m);

/**
 * Rank the model's labels for feature vector `x`, best first.
 *
 * # Safety
 * Pointers must be valid; buffers hold `cap` entries.
 */
enum HypStatus hyp_model_rank(const struct HypModel *m,
                              const double *x,
                              size_t dim,
                              size_t *order,
                              double *scores,
                              size_t cap);

/**
 * Cosine similarity of two vectors of length `len`; 0 when either is the
 * zero vector.
 *
 * # Safety
 * `a` and `b` hold `len` doubles; `out` is writable.
 */
enum HypStatus hyp_cosine_similarity(const double *a, const double *b, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERNYM_H */
