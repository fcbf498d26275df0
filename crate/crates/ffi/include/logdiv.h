#ifndef LOGDIV_H
#define LOGDIV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every call.
 */
typedef enum LogdivStatus {
  LOGDIV_STATUS_OK = 0,
  /**
   * A required pointer argument was NULL.
   */
  LOGDIV_STATUS_NULL_POINTER = 1,
  /**
   * Malformed JSON, unknown names, bad parameters or dimension mismatch.
   */
  LOGDIV_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Domain violation or numerical failure.
   */
  LOGDIV_STATUS_NUMERICAL = 3,
  /**
   * The library panicked; the handle involved should be freed.
   */
  LOGDIV_STATUS_PANIC = 4,
} LogdivStatus;

/**
 * A discrete F(±α) family.
 */
typedef struct LogdivFamily LogdivFamily;

/**
 * A potential together with its alpha-conjugate.
 */
typedef struct LogdivPotential LogdivPotential;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message, NUL-terminated and
 * truncated to `len - 1` bytes, into `buf`. Returns the full message length
 * in bytes (without the terminator); `buf` may be NULL to query it.
 *
 * # Safety
 * `buf` must be NULL or point to `len` writable bytes.
 */
size_t logdiv_last_error(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *logdiv_version(void);

/**
 * Builds a potential from a JSON declaration such as
 * `{"name": "simplex-F-alpha", "dim": 2, "alpha": 1.0, "sign": "concave"}`.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum LogdivStatus logdiv_potential_from_json(const char *json, struct LogdivPotential **out);

/**
 * Releases a potential; NULL is ignored.
 *
 * # Safety
 * `handle` must be NULL or come from [`logdiv_potential_from_json`] and not
 * have been freed.
 */
void logdiv_potential_free(struct LogdivPotential *handle);

/**
 * Chart dimension of the potential, or 0 for NULL.
 *
 * # Safety
 * `handle` must be NULL or a live potential.
 */
size_t logdiv_potential_dim(const struct LogdivPotential *handle);

/**
 * `D[xi : xi_prime]`.
 *
 * # Safety
 * `handle` must be live; `xi` and `xi_prime` must point to `dim` doubles and
 * `out` to one writable double.
 */
enum LogdivStatus logdiv_divergence(const struct LogdivPotential *handle,
                                    const double *xi,
                                    const double *xi_prime,
                                    size_t dim,
                                    double *out);

/**
 * Dual coordinates `eta = D^(alpha) phi(xi)`.
 *
 * # Safety
 * `handle` must be live; `xi` and `eta_out` must point to `dim` doubles.
 */
enum LogdivStatus logdiv_dual_point(const struct LogdivPotential *handle,
                                    const double *xi,
                                    size_t dim,
                                    double *eta_out);

/**
 * Alpha-conjugate `psi(eta)`; the primal point is written to `xi_out`
 * unless it is NULL.
 *
 * # Safety
 * `handle` must be live; `eta` must point to `dim` doubles, `xi_out` must be
 * NULL or point to `dim` writable doubles and `psi_out` to one.
 */
enum LogdivStatus logdiv_conjugate(const struct LogdivPotential *handle,
                                   const double *eta,
                                   size_t dim,
                                   double *xi_out,
                                   double *psi_out);

/**
 * Generalized Fenchel gap at `(xi, eta)`.
 *
 * # Safety
 * As [`logdiv_divergence`], with `eta` in place of `xi_prime`.
 */
enum LogdivStatus logdiv_fenchel_gap(const struct LogdivPotential *handle,
                                     const double *xi,
                                     const double *eta,
                                     size_t dim,
                                     double *out);

/**
 * `max |R - k B|` at `xi` for the predicted curvature `k = -s alpha`.
 *
 * # Safety
 * `handle` must be live; `xi` must point to `dim` doubles and `out` to one.
 */
enum LogdivStatus logdiv_curvature_residual(const struct LogdivPotential *handle,
                                            const double *xi,
                                            size_t dim,
                                            double *out);

/**
 * Builds a family from a JSON declaration with keys `sample_points`, `mu`,
 * `h`, `alpha` and `family_sign` (`"+"` or `"-"`).
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a writable pointer.
 */
enum LogdivStatus logdiv_family_from_json(const char *json, struct LogdivFamily **out);

/**
 * Releases a family; NULL is ignored.
 *
 * # Safety
 * `handle` must be NULL or come from [`logdiv_family_from_json`] and not
 * have been freed.
 */
void logdiv_family_free(struct LogdivFamily *handle);

/**
 * Parameter dimension of the family, or 0 for NULL.
 *
 * # Safety
 * `handle` must be NULL or a live family.
 */
size_t logdiv_family_dim(const struct LogdivFamily *handle);

/**
 * Density of the family at `xi` on its sample points; `p_out` must hold
 * `logdiv_family_sample_points` doubles.
 *
 * # Safety
 * `handle` must be live; `xi` must point to `dim` doubles and `p_out` to the
 * family's sample-point count of writable doubles.
 */
enum LogdivStatus logdiv_family_density(const struct LogdivFamily *handle,
                                        const double *xi,
                                        size_t dim,
                                        double *p_out);

/**
 * Number of sample points of the family, or 0 for NULL.
 *
 * # Safety
 * `handle` must be NULL or a live family.
 */
size_t logdiv_family_sample_points(const struct LogdivFamily *handle);

/**
 * Both sides of the divergence/Rényi identity at `(xi, xi_prime)`.
 *
 * # Safety
 * `handle` must be live; `xi` and `xi_prime` must point to `dim` doubles and
 * `lhs_out`, `rhs_out` to one writable double each.
 */
enum LogdivStatus logdiv_family_renyi_check(const struct LogdivFamily *handle,
                                            const double *xi,
                                            const double *xi_prime,
                                            size_t dim,
                                            double *lhs_out,
                                            double *rhs_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LOGDIV_H */
