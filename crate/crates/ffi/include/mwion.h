#ifndef MWION_H
#define MWION_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define MWION_LEVEL_LOWER 0

#define MWION_LEVEL_UPPER 1

#define MWION_CONVENTION_MEAN_FORCE 0

#define MWION_CONVENTION_ION_IN_LOWER_STATE 1

typedef enum MwionStatus {
  MWION_STATUS_OK = 0,
  MWION_STATUS_NULL_POINTER = 1,
  MWION_STATUS_INVALID_UTF8 = 2,
  MWION_STATUS_CONFIG_ERROR = 3,
  MWION_STATUS_INVALID_ARGUMENT = 4,
  MWION_STATUS_NUMERICAL_ERROR = 5,
  MWION_STATUS_IO = 6,
  MWION_STATUS_PANIC = 7,
} MwionStatus;

/**
 * Equilibrium positions and normal modes of a chain.
 */
typedef struct MwionChain MwionChain;

/**
 * Trap configuration plus optional drive settings.
 */
typedef struct MwionConfig MwionConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. Valid until the
 * next failing call on the same thread.
 */
const char *mwion_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mwion_version(void);

/**
 * Parses a TOML or JSON configuration document.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` must be writable.
 */
enum MwionStatus mwion_config_from_str(const char *text, struct MwionConfig **out);

/**
 * ¹⁷¹Yb⁺ chain. Frequencies in rad/s; `omega_r <= 0` selects the default
 * radial frequency.
 *
 * # Safety
 * `out` must be writable.
 */
enum MwionStatus mwion_config_yb171(size_t n_ions,
                                    double omega_z,
                                    double omega_r,
                                    double gradient_b,
                                    double offset_b0,
                                    struct MwionConfig **out);

/**
 * # Safety
 * `cfg` must come from this library and not be used afterwards.
 */
void mwion_config_free(struct MwionConfig *cfg);

/**
 * Number of ions, or 0 for NULL.
 *
 * # Safety
 * `cfg` must be NULL or a live handle.
 */
size_t mwion_config_n_ions(const struct MwionConfig *cfg);

/**
 * Copy of the configuration with a different gradient.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
enum MwionStatus mwion_config_with_gradient(const struct MwionConfig *cfg,
                                            double gradient_b,
                                            struct MwionConfig **out);

/**
 * Solves equilibrium positions and normal modes without extra forces.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
enum MwionStatus mwion_chain_solve(const struct MwionConfig *cfg, struct MwionChain **out);

/**
 * # Safety
 * `chain` must come from this library and not be used afterwards.
 */
void mwion_chain_free(struct MwionChain *chain);

/**
 * # Safety
 * `chain` must be NULL or a live handle.
 */
size_t mwion_chain_n_ions(const struct MwionChain *chain);

/**
 * Equilibrium positions in m, ascending.
 *
 * # Safety
 * `chain` must be a live handle; `out` must hold `len` doubles.
 */
enum MwionStatus mwion_chain_positions(const struct MwionChain *chain, double *out, size_t len);

/**
 * Axial mode frequencies in rad/s, ascending.
 *
 * # Safety
 * `chain` must be a live handle; `out` must hold `len` doubles.
 */
enum MwionStatus mwion_chain_mode_frequencies(const struct MwionChain *chain,
                                              double *out,
                                              size_t len);

/**
 * Normalized eigenvector of `mode`, one component per ion.
 *
 * # Safety
 * `chain` must be a live handle; `out` must hold `len` doubles.
 */
enum MwionStatus mwion_chain_mode_vector(const struct MwionChain *chain,
                                         size_t mode,
                                         double *out,
                                         size_t len);

/**
 * Smallest gradient (T/m) separating neighbouring resonances by the
 * highest mode frequency.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
enum MwionStatus mwion_required_gradient(const struct MwionConfig *cfg, double *out);

/**
 * Spin–phonon coupling ε_c of `ion` to `mode`.
 *
 * # Safety
 * `cfg` and `chain` must be live handles; `out` must be writable.
 */
enum MwionStatus mwion_epsilon_c(const struct MwionConfig *cfg,
                                 const struct MwionChain *chain,
                                 size_t ion,
                                 size_t mode,
                                 double *out);

/**
 * Lamb–Dicke parameter η of `ion` in `mode` for a drive at `drive_frequency`
 * (rad/s) incident at `incidence_angle` (rad) to the trap axis.
 *
 * # Safety
 * `cfg` and `chain` must be live handles; `out` must be writable.
 */
enum MwionStatus mwion_lamb_dicke(const struct MwionConfig *cfg,
                                  const struct MwionChain *chain,
                                  size_t ion,
                                  size_t mode,
                                  double drive_frequency,
                                  double incidence_angle,
                                  double *out);

/**
 * Dimensionless field derivative κ = −(∂E/∂B)/μ_B of a qubit level at
 * field `field` (T). `level` is `MWION_LEVEL_LOWER` or `MWION_LEVEL_UPPER`.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
enum MwionStatus mwion_kappa(const struct MwionConfig *cfg,
                             double field,
                             uint32_t level,
                             double *out);

/**
 * 1 − f = (41/120)(σ/Ω_R)².
 *
 * # Safety
 * `out` must be writable.
 */
enum MwionStatus mwion_gate_error_closed_form(double sigma, double rabi_frequency, double *out);

/**
 * Mean frequency spread σ (rad/s) over the internal states of the other
 * ions, with the default sampling rules and the given seed.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable.
 */
enum MwionStatus mwion_frequency_spread(const struct MwionConfig *cfg,
                                        uint64_t seed,
                                        uint32_t convention_code,
                                        double *out);

/**
 * Full design report as JSON.
 *
 * # Safety
 * `cfg` must be a live handle; `out` must be writable. Free the result with
 * [`mwion_string_free`].
 */
enum MwionStatus mwion_design_report_json(const struct MwionConfig *cfg,
                                          uint64_t seed,
                                          bool with_fidelity,
                                          char **out);

/**
 * Reference table as CSV (computed vs reference with relative deviation).
 *
 * # Safety
 * `out` must be writable. Free the result with [`mwion_string_free`].
 */
enum MwionStatus mwion_table1_csv(bool with_fidelity, uint64_t seed, char **out);

/**
 * # Safety
 * `s` must be NULL or a string returned by this library.
 */
void mwion_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MWION_H */
