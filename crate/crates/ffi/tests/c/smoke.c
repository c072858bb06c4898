#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "efdd.h"

#define CHECK(call)                                                        \
    do {                                                                   \
        EfddStatus s_ = (call);                                            \
        if (s_ != EFDD_STATUS_OK) {                                        \
            fprintf(stderr, "%s: %d %s\n", #call, (int)s_, efdd_last_error()); \
            return 1;                                                      \
        }                                                                  \
    } while (0)

int main(int argc, char **argv) {
    if (argc != 3) {
        return 2;
    }
    EfddMatrix *m = NULL;
    EfddRanking *r = NULL;
    EfddTree *t = NULL;
    CHECK(efdd_matrix_from_traces(argv[1], &m));
    CHECK(efdd_localize(m, "tarantula", 2, "line", NULL, &r));
    char *loc = efdd_ranking_location(r, 0);
    double score = 0, rank = 0;
    CHECK(efdd_ranking_entry(r, 0, &score, &rank));
    printf("%s %.4f %.1f\n", loc, score, rank);
    efdd_string_free(loc);

    CHECK(efdd_tree_train(m, 0, 2, &t));
    CHECK(efdd_tree_save(t, argv[2]));
    size_t n = efdd_matrix_run_count(m);
    EfddVerdict *v = malloc(n * sizeof *v);
    CHECK(efdd_tree_predict(t, m, v, n));
    for (size_t i = 0; i < n; i++) {
        putchar(v[i] == EFDD_VERDICT_FAIL ? 'F' : 'P');
    }
    putchar('\n');
    free(v);

    if (efdd_localize(m, "bogus", 2, NULL, NULL, &r) != EFDD_STATUS_INVALID_ARGUMENT) {
        return 3;
    }
    printf("%s\n", efdd_last_error());

    efdd_tree_free(t);
    efdd_ranking_free(r);
    efdd_matrix_free(m);
    return 0;
}
