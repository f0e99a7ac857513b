#ifndef CAA_H
#define CAA_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CaaStatus {
  CAA_STATUS_OK = 0,
  CAA_STATUS_NULL_POINTER = 1,
  CAA_STATUS_INVALID_UTF8 = 2,
  CAA_STATUS_IO = 3,
  CAA_STATUS_FORMAT = 4,
  CAA_STATUS_INVALID_ARGUMENT = 5,
  CAA_STATUS_INSUFFICIENT_DATA = 6,
  CAA_STATUS_OUT_OF_RANGE = 7,
  CAA_STATUS_PANIC = 8,
  CAA_STATUS_OTHER = 9,
} CaaStatus;

typedef enum CaaMetric {
  CAA_METRIC_INTERVAL = 0,
  CAA_METRIC_NOMINAL = 1,
} CaaMetric;

typedef struct CaaFeatureFile CaaFeatureFile;

/**
 * Annotated lexicons, one per (language, dimension).
 */
typedef struct CaaLexiconSet CaaLexiconSet;

typedef struct CaaModel CaaModel;

/**
 * Result of a two-sided paired t-test.
 */
typedef struct CaaTTest {
  size_t n;
  double mean_diff;
  double t;
  double df;
  double p;
  /**
   * Nonzero when all differences are equal.
   */
  uint8_t zero_variance;
} CaaTTest;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failure on this thread, or null after a success.
 * Valid until the next call into the library on the same thread.
 */
const char *caa_last_error_message(void);

/**
 * Reads an annotation CSV into one lexicon per (language, dimension).
 */
enum CaaStatus caa_lexicon_set_ingest(const char *path, struct CaaLexiconSet **out);

/**
 * Removes outlier annotators in place. `removed_fraction` may be null.
 */
enum CaaStatus caa_lexicon_set_filter(struct CaaLexiconSet *set, double *removed_fraction);

/**
 * Aggregates judgements and assigns ternary labels, in place.
 */
enum CaaStatus caa_lexicon_set_aggregate(struct CaaLexiconSet *set);

/**
 * Number of lexicons, 0 for null.
 */
size_t caa_lexicon_set_len(const struct CaaLexiconSet *set);

/**
 * Index of the lexicon for `language` (e.g. "en") and `dimension`
 * ("power", "agency", "sent_subj", "sent_obj").
 */
enum CaaStatus caa_lexicon_set_find(const struct CaaLexiconSet *set,
                                    const char *language,
                                    const char *dimension,
                                    size_t *index);

/**
 * Number of instances in lexicon `index`.
 */
enum CaaStatus caa_lexicon_instance_count(const struct CaaLexiconSet *set,
                                          size_t index,
                                          size_t *out);

enum CaaStatus caa_lexicon_alpha(const struct CaaLexiconSet *set,
                                 size_t index,
                                 enum CaaMetric metric,
                                 double *out);

/**
 * Pairwise agreement; with `lenient` nonzero, neutral-versus-polar pairs
 * count as agreeing.
 */
enum CaaStatus caa_lexicon_pairwise(const struct CaaLexiconSet *set,
                                    size_t index,
                                    uint8_t lenient,
                                    double *out);

/**
 * Percentage of instances whose label differs from their verb's label.
 * The set must be aggregated first.
 */
enum CaaStatus caa_lexicon_context_loss(const struct CaaLexiconSet *set, size_t index, double *out);

void caa_lexicon_set_free(struct CaaLexiconSet *set);

enum CaaStatus caa_model_load(const char *path, struct CaaModel **out);

/**
 * Feature dimension the model expects, 0 for null.
 */
size_t caa_model_dim(const struct CaaModel *model);

/**
 * Predicts a label in {-1, 0, 1} for one feature vector of length
 * `len`. `probabilities`, when not null, receives 3 values ordered
 * negative, neutral, positive.
 */
enum CaaStatus caa_model_predict(const struct CaaModel *model,
                                 const float *features,
                                 size_t len,
                                 int8_t *label,
                                 double *probabilities);

void caa_model_free(struct CaaModel *model);

enum CaaStatus caa_feature_file_read(const char *path, struct CaaFeatureFile **out);

/**
 * Number of records, 0 for null.
 */
size_t caa_feature_file_len(const struct CaaFeatureFile *file);

/**
 * Vector length, 0 for null.
 */
size_t caa_feature_file_dim(const struct CaaFeatureFile *file);

/**
 * Borrowed key of record `index`, valid while the handle lives.
 */
enum CaaStatus caa_feature_file_key(const struct CaaFeatureFile *file,
                                    size_t index,
                                    const char **out);

/**
 * Borrowed vector of record `index` (`dim` floats), valid while the handle
 * lives.
 */
enum CaaStatus caa_feature_file_vector(const struct CaaFeatureFile *file,
                                       size_t index,
                                       const float **out);

void caa_feature_file_free(struct CaaFeatureFile *file);

/**
 * Paired t-test of `a[i] - b[i]` over `n` pairs.
 */
enum CaaStatus caa_paired_ttest(const double *a, const double *b, size_t n, struct CaaTTest *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CAA_H */
