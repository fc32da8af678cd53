#ifndef DERHAM_H
#define DERHAM_H

/* Generated by cbindgen from the derham-capi crate; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of every fallible call in this API.
 */
typedef enum {
  /**
   * The call succeeded.
   */
  DRH_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  DRH_STATUS_NULL_POINTER = 1,
  /**
   * An argument was structurally invalid (wrong length, bad role, …).
   */
  DRH_STATUS_INVALID_ARGUMENT = 2,
  /**
   * The computation itself failed.
   */
  DRH_STATUS_RUNTIME_ERROR = 3,
} DrhStatus;

/**
 * Which interpolation operator family to apply.
 */
typedef enum {
  /**
   * The plain local quasi-interpolant.
   */
  DRH_OPERATOR_PLAIN = 0,
  /**
   * The endpoint-interpolating variant whose patchwise interpolants glue.
   */
  DRH_OPERATOR_ENDPOINT = 1,
} DrhOperator;

/**
 * A graded family of tensor-product spline spaces on one patch.
 */
typedef struct DrhComplex DrhComplex;

/**
 * A coefficient vector in one role of a complex.
 */
typedef struct DrhField DrhField;

/**
 * Callback sampling one component of a reference-coordinate function:
 * `x` points to the 3 reference coordinates (trailing entries are 0 below
 * the parametric dimension).
 */
typedef double (*DrhScalarFn)(size_t component, const double *x, void *user_data);

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * The library version as a static NUL-terminated string.
 */
const char *drh_version(void);

/**
 * The message of the most recent failure on this thread, or null if no
 * failure has occurred. The pointer stays valid until the next failing
 * call on the same thread.
 */
const char *drh_last_error(void);

/**
 * Builds the complex on open-uniform knots: `degrees` and `elements` are
 * arrays of length `dim` (one entry per parametric axis).
 *
 * # Safety
 * `degrees` and `elements` must point to `dim` readable entries; `out`
 * must be a valid destination for one pointer.
 */
DrhStatus drh_complex_create(size_t dim,
                             const size_t *degrees,
                             const size_t *elements,
                             DrhComplex **out);

/**
 * Builds the complex on the dyadic refinement of `cx`'s knots (every
 * element of every axis is halved).
 *
 * # Safety
 * `cx` must be a live handle from this API; `out` must be valid.
 */
DrhStatus drh_complex_refine(const DrhComplex *cx, DrhComplex **out);

/**
 * Releases a complex handle; null is ignored.
 *
 * # Safety
 * `cx` must be null or a pointer obtained from this API and not yet freed.
 */
void drh_complex_free(DrhComplex *cx);

/**
 * The parametric dimension of the complex (0 when `cx` is null).
 *
 * # Safety
 * `cx` must be null or a live handle.
 */
size_t drh_complex_dim(const DrhComplex *cx);

/**
 * Writes the total coefficient count of one role's space to `out`.
 *
 * # Safety
 * `cx` must be a live handle; `out` must be valid for one `size_t`.
 */
DrhStatus drh_complex_role_dim(const DrhComplex *cx, size_t role, size_t *out);

/**
 * Wraps `len` coefficients (components concatenated in order) as a field
 * of the given role.
 *
 * # Safety
 * `cx` must be a live handle, `coeffs` must point to `len` readable
 * doubles, and `out` must be valid.
 */
DrhStatus drh_field_create(const DrhComplex *cx,
                           size_t role,
                           const double *coeffs,
                           size_t len,
                           DrhField **out);

/**
 * Releases a field handle; null is ignored.
 *
 * # Safety
 * `field` must be null or a pointer obtained from this API and not freed.
 */
void drh_field_free(DrhField *field);

/**
 * The role of the field's space (0 when `field` is null).
 *
 * # Safety
 * `field` must be null or a live handle.
 */
size_t drh_field_role(const DrhField *field);

/**
 * The number of vector components of the field (0 when `field` is null).
 *
 * # Safety
 * `field` must be null or a live handle.
 */
size_t drh_field_num_components(const DrhField *field);

/**
 * The total coefficient count of the field (0 when `field` is null).
 *
 * # Safety
 * `field` must be null or a live handle.
 */
size_t drh_field_len(const DrhField *field);

/**
 * Copies the field's coefficients (components concatenated) into `out`,
 * which must hold exactly `len == drh_field_len` doubles.
 *
 * # Safety
 * `field` must be a live handle and `out` writable for `len` doubles.
 */
DrhStatus drh_field_coeffs(const DrhField *field, double *out, size_t len);

/**
 * Evaluates every component of the field at the reference point `x`
 * (`x_len` coordinates in `[0,1]`, one per parametric axis). `out` must
 * hold `drh_field_num_components` doubles.
 *
 * # Safety
 * All pointers must be live; `x` readable for `x_len` doubles and `out`
 * writable for `out_len` doubles.
 */
DrhStatus drh_field_eval(const DrhField *field,
                         const double *x,
                         size_t x_len,
                         double *out,
                         size_t out_len);

/**
 * Applies the complex's outgoing derivative to the field: the rotated
 * gradient and divergence in 2D; gradient, curl, and divergence in 3D.
 * The top role has no outgoing derivative.
 *
 * # Safety
 * `field` must be a live handle and `out` valid for one pointer.
 */
DrhStatus drh_field_derivative(const DrhField *field, DrhField **out);

/**
 * Writes the maximum absolute coefficient of the field to `out`.
 *
 * # Safety
 * `field` must be a live handle and `out` writable for one double.
 */
DrhStatus drh_field_max_abs(const DrhField *field, double *out);

/**
 * Interpolates a componentwise reference-coordinate function into the
 * given role using the plain or endpoint-interpolating operator family.
 * `f` receives the component index, a pointer to 3 reference coordinates,
 * and `user_data`.
 *
 * # Safety
 * `cx` must be a live handle, `f` a valid callback for the duration of the
 * call, and `out` valid for one pointer.
 */
DrhStatus drh_interpolate(const DrhComplex *cx,
                          size_t role,
                          DrhOperator operator_,
                          DrhScalarFn f,
                          void *user_data,
                          DrhField **out);

/**
 * Runs a convergence study from a JSON configuration (the same schema the
 * command-line `study` subcommand reads) and returns the JSON summary —
 * records, observed rates, and pass flags — through `out_summary`.
 * Release the string with [`drh_string_free`].
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out_summary` valid
 * for one pointer.
 */
DrhStatus drh_study_run(const char *config_json, char **out_summary);

/**
 * Returns the built-in geometry catalog as a JSON array of names through
 * `out_names`. Release the string with [`drh_string_free`].
 *
 * # Safety
 * `out_names` must be valid for one pointer.
 */
DrhStatus drh_catalog_json(char **out_names);

/**
 * Releases a string returned by this API; null is ignored.
 *
 * # Safety
 * `s` must be null or a string obtained from this API and not yet freed.
 */
void drh_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DERHAM_H */
