/* Generated by cbindgen from the emoscreen-ffi crate. Do not edit. */

#ifndef EMOSCREEN_H
#define EMOSCREEN_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum EsStatus {
  ES_STATUS_OK = 0,
  ES_STATUS_NULL_POINTER = 1,
  ES_STATUS_INVALID_ARGUMENT = 2,
  ES_STATUS_IO = 3,
  ES_STATUS_FORMAT = 4,
  ES_STATUS_BUFFER_TOO_SMALL = 5,
  ES_STATUS_INTERNAL = 6,
  ES_STATUS_PANIC = 7,
} EsStatus;

/**
 * Built-in synthetic cohort presets.
 */
typedef enum EsPreset {
  ES_PRESET_HIGH_SEPARATION = 0,
  ES_PRESET_MEDIUM_NOISE = 1,
} EsPreset;

/**
 * Opaque cohort of participants with evolution matrices.
 */
typedef struct EsCohort EsCohort;

/**
 * Opaque trained classifier.
 */
typedef struct EsModel EsModel;

/**
 * MAC counts of one convolution layer.
 */
typedef struct EsLayerCost {
  uint64_t standard_macs;
  uint64_t depthwise_macs;
  uint64_t pointwise_macs;
  uint64_t separable_macs;
  double ratio;
} EsLayerCost;

/**
 * A detected face box in pixels.
 */
typedef struct EsBox {
  uint32_t x;
  uint32_t y;
  uint32_t w;
  uint32_t h;
  double score;
} EsBox;

/**
 * Per-group split sizes.
 */
typedef struct EsSplit {
  size_t train_healthy;
  size_t train_impaired;
  size_t test_healthy;
  size_t test_impaired;
  uint64_t seed;
} EsSplit;

/**
 * Test accuracy (%) and confusion counts of one classifier.
 * `confusion[t * 2 + p]` counts participants of true group `t` predicted
 * as `p` (0 healthy, 1 impaired).
 */
typedef struct EsClassifierResult {
  double accuracy;
  size_t correct;
  size_t total;
  size_t confusion[4];
} EsClassifierResult;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * NUL-terminated library version. The pointer is static.
 */
const char *es_version(void);

/**
 * Copies the calling thread's last error message into `buf`. `needed`
 * (may be null) receives the size required including the terminator.
 * An empty string means the last call succeeded.
 *
 * # Safety
 * `buf` must be null or hold `cap` writable bytes; `needed` must be null or
 * writable.
 */
enum EsStatus es_last_error(char *buf, size_t cap, size_t *needed);

/**
 * Standard against depthwise-separable cost for a `k x k` layer mapping
 * `c_in` to `c_out` channels at `h_out x w_out` output positions.
 *
 * # Safety
 * `out` must be null or writable.
 */
enum EsStatus es_layer_cost(uint64_t k,
                            uint64_t c_in,
                            uint64_t c_out,
                            uint64_t h_out,
                            uint64_t w_out,
                            struct EsLayerCost *out);

/**
 * Closed-form ratio `1/c_out + 1/k^2`.
 *
 * # Safety
 * `out` must be null or writable.
 */
enum EsStatus es_cost_ratio(uint64_t k, uint64_t c_out, double *out);

/**
 * Runs the built-in cascade over an 8-bit grayscale image (row-major,
 * `stride` bytes per row). Writes up to `cap` boxes, largest first, and
 * the total found to `count`.
 *
 * # Safety
 * `pixels` must hold `stride * height` bytes; `boxes` must be null (with
 * `cap` 0) or hold `cap` writable entries; `count` must be writable.
 */
enum EsStatus es_detect_faces(const uint8_t *pixels,
                              uint32_t width,
                              uint32_t height,
                              uint32_t stride,
                              struct EsBox *boxes,
                              size_t cap,
                              size_t *count);

/**
 * Loads a model file written by `train-emotion` or `train-mci`.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
enum EsStatus es_model_load(const char *path, struct EsModel **out);

/**
 * Releases a model. Null is ignored.
 *
 * # Safety
 * `model` must be null or a handle from [`es_model_load`] not yet freed.
 */
void es_model_free(struct EsModel *model);

/**
 * Number of classes and expected feature length.
 *
 * # Safety
 * `model` must be a live handle; outputs must be null or writable.
 */
enum EsStatus es_model_info(const struct EsModel *model, size_t *n_classes, size_t *dim);

/**
 * Copies the name of class `index` into `buf`.
 *
 * # Safety
 * `model` must be a live handle; `buf` must be null or hold `cap` bytes;
 * `needed` must be null or writable.
 */
enum EsStatus es_model_class_name(const struct EsModel *model,
                                  size_t index,
                                  char *buf,
                                  size_t cap,
                                  size_t *needed);

/**
 * Predicts the class index of one feature vector.
 *
 * # Safety
 * `model` must be a live handle; `features` must hold `len` values;
 * `class_index` must be writable.
 */
enum EsStatus es_model_predict(const struct EsModel *model,
                               const double *features,
                               size_t len,
                               size_t *class_index);

/**
 * Per-class scores summing to one, written to `scores[0..n_classes]`.
 *
 * # Safety
 * `model` must be a live handle; `features` must hold `len` values;
 * `scores` must hold `cap` writable values.
 */
enum EsStatus es_model_scores(const struct EsModel *model,
                              const double *features,
                              size_t len,
                              double *scores,
                              size_t cap);

/**
 * Generates a 61-participant synthetic cohort.
 *
 * # Safety
 * `out` must be writable.
 */
enum EsStatus es_cohort_synth(enum EsPreset preset, uint64_t seed, struct EsCohort **out);

/**
 * Creates an empty cohort to fill with [`es_cohort_add`].
 */
struct EsCohort *es_cohort_new(void);

/**
 * Adds a participant. `columns` holds `n_frames` distributions of six
 * values each, ordered happy, neutral, sad, angry, surprise, other.
 * `moca` assigns the group (25..=30 healthy, 20..=24 impaired).
 *
 * # Safety
 * `cohort` must be a live handle; `id` NUL-terminated; `columns` must hold
 * `6 * n_frames` values.
 */
enum EsStatus es_cohort_add(struct EsCohort *cohort,
                            const char *id,
                            int32_t moca,
                            const double *columns,
                            size_t n_frames);

/**
 * Participant counts of both groups.
 *
 * # Safety
 * `cohort` must be a live handle; outputs must be writable.
 */
enum EsStatus es_cohort_counts(const struct EsCohort *cohort, size_t *healthy, size_t *impaired);

/**
 * Releases a cohort. Null is ignored.
 *
 * # Safety
 * `cohort` must be null or a live handle.
 */
void es_cohort_free(struct EsCohort *cohort);

/**
 * Trains LDA, SVM, KNN and decision tree on the training split with a
 * `window`-frame feature window chosen from training data only, and
 * scores them on the test split. `results[0..4]` follow that order.
 *
 * # Safety
 * `cohort` must be a live handle; `split` readable; `results` must hold
 * four writable entries.
 */
enum EsStatus es_cohort_evaluate(const struct EsCohort *cohort,
                                 const struct EsSplit *split,
                                 size_t window,
                                 struct EsClassifierResult *results);

/**
 * Index of `name` in the emotion order used by [`es_cohort_add`], or -1.
 *
 * # Safety
 * `name` must be null or NUL-terminated.
 */
int32_t es_emotion_index(const char *name);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EMOSCREEN_H */
