#ifndef SATRECONF_H
#define SATRECONF_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Qualitative value of one state, passed to [`sr_reconf`] as a byte.
 */
typedef enum SrQual {
  SR_QUAL_LOW = 0,
  SR_QUAL_OK = 1,
  SR_QUAL_HIGH = 2,
} SrQual;

typedef enum SrStatus {
  SR_STATUS_OK = 0,
  SR_STATUS_NULL_POINTER = 1,
  SR_STATUS_INVALID_ARGUMENT = 2,
  SR_STATUS_SCHEMA_ERROR = 3,
  SR_STATUS_MODEL_ERROR = 4,
  SR_STATUS_SCENARIO_ERROR = 5,
  SR_STATUS_NUMERIC_ERROR = 6,
  SR_STATUS_BUFFER_TOO_SMALL = 7,
  SR_STATUS_INTERNAL_ERROR = 8,
} SrStatus;

typedef enum SrSystemKind {
  SR_SYSTEM_KIND_TWO_TANK = 0,
  SR_SYSTEM_KIND_THREE_TANK = 1,
} SrSystemKind;

/**
 * A plant together with its system model.
 */
typedef struct SrSystem SrSystem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next call on this thread.
 */
const char *sr_last_error(void);

/**
 * Builds a plant with its shipped system model.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum SrStatus sr_system_new(enum SrSystemKind kind_, struct SrSystem **out);

/**
 * Builds a plant with the system model in `model_toml`; null selects the
 * shipped model.
 *
 * # Safety
 * `model_toml` is null or a NUL-terminated string; `out` must be writable.
 */
enum SrStatus sr_system_new_with_model(enum SrSystemKind kind_,
                                       const char *model_toml,
                                       struct SrSystem **out);

/**
 * # Safety
 * `sys` is null or a handle from `sr_system_new*` not yet freed.
 */
void sr_system_free(struct SrSystem *sys);

/**
 * Number of continuous states; 0 for a null handle.
 *
 * # Safety
 * `sys` is null or a live handle.
 */
size_t sr_system_num_states(const struct SrSystem *sys);

/**
 * Number of binary inputs, exchange flags included; 0 for a null handle.
 *
 * # Safety
 * `sys` is null or a live handle.
 */
size_t sr_system_num_inputs(const struct SrSystem *sys);

/**
 * Copies the id of state `index` into `buf` (NUL-terminated).
 *
 * # Safety
 * `sys` is a live handle; `buf` points to `len` writable bytes.
 */
enum SrStatus sr_system_state_id(const struct SrSystem *sys, size_t index, char *buf, size_t len);

/**
 * Copies the id of input `index` into `buf` (NUL-terminated).
 *
 * # Safety
 * `sys` is a live handle; `buf` points to `len` writable bytes.
 */
enum SrStatus sr_system_input_id(const struct SrSystem *sys, size_t index, char *buf, size_t len);

/**
 * Writes the nominal initial inputs (0/1) into `out`, which holds `len` bytes.
 *
 * # Safety
 * `sys` is a live handle; `out` points to `len` writable bytes.
 */
enum SrStatus sr_system_initial_inputs(const struct SrSystem *sys, uint8_t *out, size_t len);

/**
 * Minimal-cardinality reconfiguration.
 *
 * `qual` holds one [`SrQual`] value per state (as a byte) and `inputs` one 0/1 byte per input,
 * both in declaration order. On success `*found` is 1, `out_inputs` holds
 * the new assignment and `*flips` the number of changed inputs; when no
 * reconfiguration exists `*found` is 0 and the status is still `Ok`.
 *
 * # Safety
 * All pointers are valid for the given lengths; `out_inputs` has `num_inputs`
 * writable bytes; `found` and `flips` are writable.
 */
enum SrStatus sr_reconf(const struct SrSystem *sys,
                        const uint8_t *qual,
                        size_t num_states,
                        const uint8_t *inputs,
                        size_t num_inputs,
                        uint8_t *out_inputs,
                        int32_t *found,
                        size_t *flips);

/**
 * Runs a suite document and returns the results CSV in `*out_csv`; release
 * it with [`sr_string_free`].
 *
 * # Safety
 * `sys` is a live handle; `suite_toml` is NUL-terminated; `out_csv` is writable.
 */
enum SrStatus sr_run_suite(const struct SrSystem *sys, const char *suite_toml, char **out_csv);

/**
 * # Safety
 * `s` is null or a string returned by this library, not yet freed.
 */
void sr_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SATRECONF_H */
