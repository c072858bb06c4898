#ifndef EFDD_H
#define EFDD_H

#include <stddef.h>
#include <stdint.h>

/*
 Result of a fallible call. Values 3 to 7 match the command-line exit codes.
 */
typedef enum EfddStatus {
  EFDD_STATUS_OK = 0,
  EFDD_STATUS_NULL_POINTER = 1,
  EFDD_STATUS_INVALID_UTF8 = 2,
  EFDD_STATUS_IO = 3,
  EFDD_STATUS_FORMAT = 4,
  EFDD_STATUS_INSUFFICIENT_LABELS = 5,
  EFDD_STATUS_CONSISTENCY = 6,
  EFDD_STATUS_INVALID_ARGUMENT = 7,
  EFDD_STATUS_BUFFER_TOO_SMALL = 8,
  EFDD_STATUS_PANIC = 9,
} EfddStatus;

typedef enum EfddVerdict {
  EFDD_VERDICT_PASS = 0,
  EFDD_VERDICT_FAIL = 1,
} EfddVerdict;

/*
 Labelled feature matrix.
 */
typedef struct EfddMatrix EfddMatrix;

/*
 Ranked list of suspicious lines.
 */
typedef struct EfddRanking EfddRanking;

/*
 Trained decision tree.
 */
typedef struct EfddTree EfddTree;

/*
 Message of the last failed call on this thread, or null. The pointer stays
 valid until the next failing call on the same thread.
 */
const char *efdd_last_error(void);

/*
 Releases a string returned by this library. Null is ignored.

 # Safety
 `s` must come from this library and must not be used afterwards.
 */
void efdd_string_free(char *s);

/*
 Reads every `*.trace` file in `dir` and extracts the feature matrix.

 # Safety
 `dir` must be a NUL-terminated string and `out` a writable pointer.
 */
enum EfddStatus efdd_matrix_from_traces(const char *dir, struct EfddMatrix **out);

/*
 Loads a feature matrix CSV.

 # Safety
 `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum EfddStatus efdd_matrix_from_csv(const char *path, struct EfddMatrix **out);

/*
 Writes the matrix as CSV.

 # Safety
 `matrix` must be a live handle and `path` a NUL-terminated string.
 */
enum EfddStatus efdd_matrix_save_csv(const struct EfddMatrix *matrix, const char *path);

/*
 Number of runs, or 0 for a null handle.

 # Safety
 `matrix` must be null or a live handle.
 */
uintptr_t efdd_matrix_run_count(const struct EfddMatrix *matrix);

/*
 Number of features, or 0 for a null handle.

 # Safety
 `matrix` must be null or a live handle.
 */
uintptr_t efdd_matrix_feature_count(const struct EfddMatrix *matrix);

/*
 # Safety
 `matrix` must be null or a handle that is not used afterwards.
 */
void efdd_matrix_free(struct EfddMatrix *matrix);

/*
 Ranks source lines by suspiciousness.

 `metric` is one of tarantula, ochiai, dstar, naish2, gp13. `dstar_exponent`
 applies to dstar only. `classes` is a comma-separated class list and
 `aggregator` one of max, mean, median; null selects all classes and max.

 # Safety
 String arguments must be null or NUL-terminated, `matrix` a live handle and
 `out` a writable pointer.
 */
enum EfddStatus efdd_localize(const struct EfddMatrix *matrix,
                              const char *metric,
                              uint32_t dstar_exponent,
                              const char *classes,
                              const char *aggregator,
                              struct EfddRanking **out);

/*
 Number of ranked lines, or 0 for a null handle.

 # Safety
 `ranking` must be null or a live handle.
 */
uintptr_t efdd_ranking_len(const struct EfddRanking *ranking);

/*
 Score and average rank of entry `index`, in listed order.

 # Safety
 `ranking` must be a live handle; `score` and `rank` writable pointers.
 */
enum EfddStatus efdd_ranking_entry(const struct EfddRanking *ranking,
                                   uintptr_t index,
                                   double *score,
                                   double *rank);

/*
 `file:line` of entry `index` as a new string, or null when out of range.
 Release it with [`efdd_string_free`].

 # Safety
 `ranking` must be null or a live handle.
 */
char *efdd_ranking_location(const struct EfddRanking *ranking, uintptr_t index);

/*
 Writes the ranking as CSV.

 # Safety
 `ranking` must be a live handle and `path` a NUL-terminated string.
 */
enum EfddStatus efdd_ranking_save_csv(const struct EfddRanking *ranking, const char *path);

/*
 # Safety
 `ranking` must be null or a handle that is not used afterwards.
 */
void efdd_ranking_free(struct EfddRanking *ranking);

/*
 Trains a tree. `max_depth` 0 means unbounded.

 # Safety
 `matrix` must be a live handle and `out` a writable pointer.
 */
enum EfddStatus efdd_tree_train(const struct EfddMatrix *matrix,
                                uintptr_t max_depth,
                                uintptr_t min_samples_split,
                                struct EfddTree **out);

/*
 # Safety
 `tree` must be a live handle and `path` a NUL-terminated string.
 */
enum EfddStatus efdd_tree_save(const struct EfddTree *tree, const char *path);

/*
 # Safety
 `path` must be a NUL-terminated string and `out` a writable pointer.
 */
enum EfddStatus efdd_tree_load(const char *path, struct EfddTree **out);

/*
 Predicts a verdict for every run of `matrix`. Features the tree was not
 trained on are dropped and missing ones take their default value.
 `verdicts` must hold at least `capacity` entries, and `capacity` must be
 at least the run count.

 # Safety
 `tree` and `matrix` must be live handles; `verdicts` must point to
 `capacity` writable elements.
 */
enum EfddStatus efdd_tree_predict(const struct EfddTree *tree,
                                  const struct EfddMatrix *matrix,
                                  enum EfddVerdict *verdicts,
                                  uintptr_t capacity);

/*
 Renders the failure paths as text. `source_root`, when not null, is used
 to quote source lines. Release the result with [`efdd_string_free`].

 # Safety
 `tree` must be a live handle, `source_root` null or NUL-terminated, `out`
 a writable pointer.
 */
enum EfddStatus efdd_tree_diagnosis(const struct EfddTree *tree,
                                    const char *source_root,
                                    char **out);

/*
 Graphviz rendering of the tree. Release the result with
 [`efdd_string_free`].

 # Safety
 `tree` must be a live handle and `out` a writable pointer.
 */
enum EfddStatus efdd_tree_dot(const struct EfddTree *tree, char **out);

/*
 # Safety
 `tree` must be null or a handle that is not used afterwards.
 */
void efdd_tree_free(struct EfddTree *tree);

#endif  /* EFDD_H */
