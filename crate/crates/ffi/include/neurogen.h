#ifndef NEUROGEN_H
#define NEUROGEN_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NgStatus {
  NG_STATUS_OK = 0,
  NG_STATUS_NULL_POINTER = 1,
  NG_STATUS_INVALID_ARGUMENT = 2,
  NG_STATUS_INVALID_CONFIG = 3,
  NG_STATUS_DATA = 4,
  NG_STATUS_IO = 5,
  NG_STATUS_CODEC = 6,
  NG_STATUS_INTERNAL = 7,
  NG_STATUS_BUFFER_TOO_SMALL = 8,
  NG_STATUS_PANIC = 9,
} NgStatus;

/**
 * Opaque dataset handle.
 */
typedef struct NgDataset NgDataset;

/**
 * Opaque handle to a network with fixed weights.
 */
typedef struct NgNetwork NgNetwork;

/**
 * Opaque handle to a finished training run.
 */
typedef struct NgTrainingResult NgTrainingResult;

/**
 * Plain-data mirror of the GA configuration.
 */
typedef struct NgGaConfig {
  size_t population_size;
  size_t max_generations;
  double crossover_prob;
  double mutation_prob;
  double init_low;
  double init_high;
  /**
   * 2 or 3.
   */
  uint32_t protected_bits;
  double target_sse;
  size_t elite_count;
  uint64_t rng_seed;
} NgGaConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *ng_last_error_message(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not be freed twice.
 */
void ng_string_free(char *s);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum NgStatus ng_ga_config_default(struct NgGaConfig *out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum NgStatus ng_encode_gene(float value, uint32_t *out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum NgStatus ng_decode_gene(uint32_t bits, float *out);

/**
 * # Safety
 * `out` must be a valid pointer.
 */
enum NgStatus ng_dataset_bundled(struct NgDataset **out);

/**
 * Loads a raw-sample CSV (concentration columns then response columns).
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum NgStatus ng_dataset_load(const char *path, struct NgDataset **out);

/**
 * # Safety
 * `dataset` must be a valid handle and `out` a valid pointer.
 */
enum NgStatus ng_dataset_len(const struct NgDataset *dataset, size_t *out);

/**
 * # Safety
 * `dataset` must be null or a handle from this library, freed once.
 */
void ng_dataset_free(struct NgDataset *dataset);

/**
 * Converts a network output to ppm with the dataset's concentration maximum.
 *
 * # Safety
 * `dataset` must be a valid handle and `out` a valid pointer.
 */
enum NgStatus ng_denormalize(const struct NgDataset *dataset, double network_output, double *out);

/**
 * Trains a 5-`hidden`-5 network on every sample of `dataset`.
 *
 * # Safety
 * `dataset` and `config` must be valid, `out` a valid pointer.
 */
enum NgStatus ng_train(const struct NgDataset *dataset,
                       size_t hidden,
                       const struct NgGaConfig *config,
                       struct NgTrainingResult **out);

/**
 * # Safety
 * `result` must be a valid handle and `out` a valid pointer.
 */
enum NgStatus ng_result_best_sse(const struct NgTrainingResult *result, double *out);

/**
 * Number of generations run (the SSE history has one more entry).
 *
 * # Safety
 * `result` must be a valid handle and `out` a valid pointer.
 */
enum NgStatus ng_result_generations(const struct NgTrainingResult *result, size_t *out);

/**
 * # Safety
 * `result` must be valid; `buf` must hold `cap` doubles; `len_out` valid.
 */
enum NgStatus ng_result_history(const struct NgTrainingResult *result,
                                double *buf,
                                size_t cap,
                                size_t *len_out);

/**
 * # Safety
 * `result` must be valid; `buf` must hold `cap` doubles; `len_out` valid.
 */
enum NgStatus ng_result_weights(const struct NgTrainingResult *result,
                                double *buf,
                                size_t cap,
                                size_t *len_out);

/**
 * Serializes the run as the same JSON document the CLI writes. Release the
 * string with [`ng_string_free`].
 *
 * # Safety
 * `result` must be a valid handle and `out` a valid pointer.
 */
enum NgStatus ng_result_to_json(const struct NgTrainingResult *result, char **out);

/**
 * Builds a network from the best weights of a run.
 *
 * # Safety
 * `result` must be a valid handle and `out` a valid pointer.
 */
enum NgStatus ng_result_network(const struct NgTrainingResult *result, struct NgNetwork **out);

/**
 * # Safety
 * `result` must be null or a handle from this library, freed once.
 */
void ng_result_free(struct NgTrainingResult *result);

/**
 * Creates a network from layer sizes and a flat weight list in the library's
 * order: layer by layer, one group per destination neuron, bias last.
 *
 * # Safety
 * `layers` must hold `n_layers` values and `weights` `n_weights` values.
 */
enum NgStatus ng_network_new(const size_t *layers,
                             size_t n_layers,
                             const double *weights,
                             size_t n_weights,
                             struct NgNetwork **out);

/**
 * Number of weights a network with these layer sizes needs.
 *
 * # Safety
 * `layers` must hold `n_layers` values and `out` must be valid.
 */
enum NgStatus ng_weight_count(const size_t *layers, size_t n_layers, size_t *out);

/**
 * # Safety
 * `network` must be valid; `input` holds `n_input` values; `output` has
 * room for `cap` values; `len_out` must be valid.
 */
enum NgStatus ng_network_forward(const struct NgNetwork *network,
                                 const double *input,
                                 size_t n_input,
                                 double *output,
                                 size_t cap,
                                 size_t *len_out);

/**
 * # Safety
 * `network` must be null or a handle from this library, freed once.
 */
void ng_network_free(struct NgNetwork *network);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NEUROGEN_H */
