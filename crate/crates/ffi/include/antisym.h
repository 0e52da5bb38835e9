#ifndef ANTISYM_H
#define ANTISYM_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes.
 */
typedef enum AntisymStatus {
  ANTISYM_STATUS_OK = 0,
  ANTISYM_STATUS_NULL_POINTER = 1,
  ANTISYM_STATUS_INVALID_ARGUMENT = 2,
  ANTISYM_STATUS_LAYOUT = 3,
  ANTISYM_STATUS_PARSE = 4,
  ANTISYM_STATUS_NOT_ORTHOGONAL = 5,
  ANTISYM_STATUS_QUBIT_CAP = 6,
  ANTISYM_STATUS_SYNTHESIS = 7,
  ANTISYM_STATUS_IO = 8,
  ANTISYM_STATUS_UTF8 = 9,
  ANTISYM_STATUS_PANIC = 10,
} AntisymStatus;

/**
 * Variant selector for [`antisym_build`].
 */
typedef enum AntisymVariant {
  ANTISYM_VARIANT_RECURSIVE = 0,
  ANTISYM_VARIANT_MEASUREMENT = 1,
} AntisymVariant;

/**
 * Opaque circuit.
 */
typedef struct AntisymCircuit AntisymCircuit;

/**
 * Opaque set of single-particle orbitals.
 */
typedef struct AntisymOrbitals AntisymOrbitals;

/**
 * Gate tallies, mirroring the Rust `GateCounts`.
 */
typedef struct AntisymGateCounts {
  size_t clifford;
  size_t t_like;
  size_t rotations;
  size_t measurements;
  size_t resets;
  size_t two_qubit;
  size_t other;
} AntisymGateCounts;

/**
 * Results of checking a circuit against its orbitals.
 */
typedef struct AntisymVerifyReport {
  size_t branches;
  double overlap;
  double fidelity;
  double ancilla_zero_probability;
} AntisymVerifyReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread; empty if none. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *antisym_last_error(void);

/**
 * Library version as a static string.
 */
const char *antisym_version(void);

/**
 * Orbitals `|r⟩` for each of `n` integers.
 *
 * # Safety
 * `values` must point to `n` readable integers; `out` must be writable.
 */
enum AntisymStatus antisym_orbitals_from_integers(size_t eta,
                                                  const size_t *values,
                                                  size_t n,
                                                  struct AntisymOrbitals **out);

/**
 * Orbitals from interleaved `(re, im)` amplitudes, `2^eta` per orbital.
 *
 * # Safety
 * `re_im` must point to `2 · n · 2^eta` readable doubles; `out` must be
 * writable.
 */
enum AntisymStatus antisym_orbitals_from_amplitudes(size_t eta,
                                                    const double *re_im,
                                                    size_t n,
                                                    struct AntisymOrbitals **out);

/**
 * Seeded random orthonormal orbitals.
 *
 * # Safety
 * `out` must be writable.
 */
enum AntisymStatus antisym_orbitals_random(size_t n,
                                           size_t eta,
                                           uint64_t seed,
                                           struct AntisymOrbitals **out);

/**
 * # Safety
 * `o` must be null or a handle from this library not yet freed.
 */
void antisym_orbitals_free(struct AntisymOrbitals *o);

/**
 * Antisymmetrizing circuit for `orbitals`; `variant` takes an
 * [`AntisymVariant`] value.
 *
 * # Safety
 * `orbitals` must be a live handle; `out` must be writable.
 */
enum AntisymStatus antisym_build(const struct AntisymOrbitals *orbitals,
                                 uint32_t variant,
                                 bool reuse_ancillas,
                                 struct AntisymCircuit **out);

/**
 * Clifford+T lowering with default options; rotations are kept.
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum AntisymStatus antisym_circuit_lower(const struct AntisymCircuit *c,
                                         struct AntisymCircuit **out);

/**
 * Parses the text circuit format.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum AntisymStatus antisym_circuit_from_text(const char *text, struct AntisymCircuit **out);

/**
 * Serializes to the text format; free the result with
 * [`antisym_string_free`].
 *
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum AntisymStatus antisym_circuit_to_text(const struct AntisymCircuit *c, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library not yet freed.
 */
void antisym_string_free(char *s);

/**
 * # Safety
 * `c` must be a live handle; `out` must be writable.
 */
enum AntisymStatus antisym_circuit_counts(const struct AntisymCircuit *c,
                                          struct AntisymGateCounts *out);

/**
 * Total qubit count of the circuit, or 0 for a null handle.
 *
 * # Safety
 * `c` must be null or a live handle.
 */
size_t antisym_circuit_qubits(const struct AntisymCircuit *c);

/**
 * # Safety
 * `c` must be null or a handle from this library not yet freed.
 */
void antisym_circuit_free(struct AntisymCircuit *c);

/**
 * Ideal simulation of `c` compared with the antisymmetrized orbitals.
 *
 * # Safety
 * Both handles must be live; `out` must be writable.
 */
enum AntisymStatus antisym_verify(const struct AntisymCircuit *c,
                                  const struct AntisymOrbitals *orbitals,
                                  struct AntisymVerifyReport *out);

/**
 * Sorting-network comparator count for `n ≥ 2` keys.
 *
 * # Safety
 * `out` must be writable.
 */
enum AntisymStatus antisym_n_comp(uint64_t n, uint64_t *out);

uint64_t antisym_n_ctrl(uint64_t n);

/**
 * # Safety
 * `out` must be writable.
 */
enum AntisymStatus antisym_avg_phase_corrections(uint64_t n, double *out);

/**
 * Clifford+T approximation of `Ry(theta)` within `epsilon`.
 *
 * # Safety
 * The three output pointers must be writable.
 */
enum AntisymStatus antisym_synthesize_ry(double theta,
                                         double epsilon,
                                         size_t *t_count,
                                         size_t *total_count,
                                         double *error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* ANTISYM_H */
