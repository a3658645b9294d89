#ifndef HICOMP_H
#define HICOMP_H

/* Generated by cbindgen from crates/ffi; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define HICOMP_MODEL_SEQUENCE 0

#define HICOMP_MODEL_CLASSIFICATION 1

#define HICOMP_FAMILY_CAUCHY 1

#define HICOMP_FAMILY_GAUSSIAN 2

typedef enum HicompStatus {
  HICOMP_STATUS_OK = 0,
  HICOMP_STATUS_NULL_POINTER = 1,
  HICOMP_STATUS_INVALID_ARGUMENT = 2,
  HICOMP_STATUS_IO = 3,
  HICOMP_STATUS_PARSE = 4,
  HICOMP_STATUS_CONFIG = 5,
  HICOMP_STATUS_NUMERICAL = 6,
  HICOMP_STATUS_PANIC = 7,
} HicompStatus;

typedef struct HicompChain HicompChain;

typedef struct HicompDataset HicompDataset;

typedef struct HicompGrouping HicompGrouping;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after success.
 * The pointer stays valid until the next hicomp call on the same thread.
 */
const char *hicomp_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hicomp_version(void);

/**
 * Reads a dataset file. `order < 0` keeps the full history (sequence) or
 * uses the number of features (classification).
 */
enum HicompStatus hicomp_dataset_load(const char *path,
                                      uint32_t model,
                                      int64_t order,
                                      struct HicompDataset **out);

void hicomp_dataset_free(struct HicompDataset *data);

/**
 * Number of cases, or 0 for a null handle.
 */
size_t hicomp_dataset_n_cases(const struct HicompDataset *data);

/**
 * Number of response classes, or 0 for a null handle.
 */
size_t hicomp_dataset_n_classes(const struct HicompDataset *data);

enum HicompStatus hicomp_grouping_build(const struct HicompDataset *data,
                                        struct HicompGrouping **out);

void hicomp_grouping_free(struct HicompGrouping *grouping);

size_t hicomp_grouping_n_groups(const struct HicompGrouping *grouping);

/**
 * Number of distinct patterns expressed by the training data.
 */
uint64_t hicomp_grouping_n_original(const struct HicompGrouping *grouping);

/**
 * Runs the sampler with the default prior for `family`.
 */
enum HicompStatus hicomp_train(const struct HicompDataset *data,
                               const struct HicompGrouping *grouping,
                               uint32_t family,
                               size_t iterations,
                               size_t burn_in,
                               size_t thin,
                               uint64_t seed,
                               struct HicompChain **out);

void hicomp_chain_free(struct HicompChain *chain);

/**
 * Number of retained samples.
 */
size_t hicomp_chain_len(const struct HicompChain *chain);

/**
 * Writes class probabilities for every test case, row-major, into
 * `probs` which must hold `n_cases * n_classes` values.
 */
enum HicompStatus hicomp_predict(const struct HicompGrouping *grouping,
                                 const struct HicompChain *chain,
                                 const struct HicompDataset *test,
                                 uint64_t seed,
                                 double *probs,
                                 size_t probs_len);

enum HicompStatus hicomp_cauchy_split_cdf(double x,
                                          double s,
                                          double sigma1,
                                          double sigma2,
                                          double *out);

/**
 * One draw of the part of `s` with width `sigma1`.
 */
enum HicompStatus hicomp_split_sample(uint32_t family,
                                      double s,
                                      double sigma1,
                                      double sigma2,
                                      uint64_t seed,
                                      double *out);

enum HicompStatus hicomp_inverse_gamma_quantile(double shape,
                                                double rate,
                                                double prob,
                                                double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HICOMP_H */
