#include <stdio.h>
#include <string.h>

#include "hypernym.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        HypStatus s_ = (call);                                             \
        if (s_ != HYP_STATUS_OK) {                                         \
            fprintf(stderr, "%s -> %d: %s\n", #call, (int)s_, hyp_last_error()); \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(int argc, char **argv) {
    if (argc != 3) {
        fprintf(stderr, "usage: smoke EMBEDDINGS LABELS\n");
        return 2;
    }
    HypPipeline *p = NULL;
    HypTable *t = NULL;
    HypLabels *l = NULL;
    CHECK(hyp_pipeline_new(NULL, &p));
    CHECK(hyp_table_load(argv[1], &t));
    CHECK(hyp_labels_load(p, argv[2], &l));

    char *norm = NULL;
    CHECK(hyp_normalize(p, "The Covered Bonds", &norm));
    printf("normalized %s\n", norm);
    hyp_string_free(norm);

    size_t dim = hyp_table_dim(t), k = hyp_labels_len(l);
    double v[1024];
    size_t order[64];
    double scores[64];
    double coverage = 0.0;
    if (dim > 1024 || k > 64) return 1;
    CHECK(hyp_embed_term(t, p, "Debenture Maturity", true, v, dim, &coverage));
    CHECK(hyp_rank_labels(t, l, v, dim, HYP_MEASURE_COSINE, order, scores, k));
    printf("dim %zu labels %zu coverage %.1f top %s\n", dim, k, coverage, hyp_labels_id(l, order[0]));

    size_t count = 0, matched = 0;
    CHECK(hyp_labels_match(l, p, "Covered Bond", &count, &matched));
    printf("matches %zu %s\n", count, hyp_labels_id(l, matched));

    HypTable *missing = NULL;
    HypStatus s = hyp_table_load("/nonexistent.txt", &missing);
    printf("missing status %d\n", (int)s);

    hyp_labels_free(l);
    hyp_table_free(t);
    hyp_pipeline_free(p);
    return 0;
}
