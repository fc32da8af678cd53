#include "derham.h"
#include <stdio.h>
#include <string.h>

static double wave(size_t component, const double *x, void *user_data) {
    (void)component; (void)user_data;
    return 0.5 * x[0] - 0.25 * x[1] + 0.125;
}

int main(void) {
    int failures = 0;
    printf("library version %s\n", drh_version());

    size_t degrees[2] = {2, 2}, elements[2] = {4, 4};
    DrhComplex *cx = NULL;
    if (drh_complex_create(2, degrees, elements, &cx) != DRH_STATUS_OK) {
        fprintf(stderr, "create: %s\n", drh_last_error());
        return 1;
    }

    /* Interpolate an affine function, differentiate twice: identically zero. */
    DrhField *f = NULL;
    if (drh_interpolate(cx, 0, DRH_OPERATOR_ENDPOINT, wave, NULL, &f) != DRH_STATUS_OK) {
        fprintf(stderr, "interpolate: %s\n", drh_last_error());
        return 1;
    }
    DrhField *curl = NULL, *div = NULL;
    drh_field_derivative(f, &curl);
    drh_field_derivative(curl, &div);
    double residual = -1.0;
    drh_field_max_abs(div, &residual);
    printf("max |div curl f| (interpolated coeffs) = %.3e\n", residual);
    if (residual > 1e-13) failures++;

    /* With dyadic coefficients the cancellation is bit-exact. */
    size_t n = 0;
    drh_complex_role_dim(cx, 0, &n);
    double dyadic[64];
    for (size_t i = 0; i < n && i < 64; i++)
        dyadic[i] = ((double)(i * 37 % 97) - 48.0) / 64.0;
    DrhField *g = NULL, *gc = NULL, *gd = NULL;
    drh_field_create(cx, 0, dyadic, n, &g);
    drh_field_derivative(g, &gc);
    drh_field_derivative(gc, &gd);
    double exact_residual = -1.0;
    drh_field_max_abs(gd, &exact_residual);
    printf("max |div curl g| (dyadic coeffs)       = %.3e\n", exact_residual);
    if (exact_residual != 0.0) failures++;
    drh_field_free(gd); drh_field_free(gc); drh_field_free(g);

    /* Affine functions are reproduced pointwise by the interpolant. */
    double x[2] = {0.375, 0.8125}, value = 0.0;
    drh_field_eval(f, x, 2, &value, 1);
    double exact = wave(0, x, NULL);
    printf("interpolant(0.375, 0.8125) = %.12f (exact %.12f)\n", value, exact);
    if (value - exact > 1e-12 || exact - value > 1e-12) failures++;

    /* Error contract: a bad role sets a readable message. */
    DrhField *bad = NULL;
    double one = 1.0;
    DrhStatus s = drh_field_create(cx, 9, &one, 1, &bad);
    if (s != DRH_STATUS_INVALID_ARGUMENT || strlen(drh_last_error()) == 0) failures++;
    else printf("expected failure: %s\n", drh_last_error());

    /* Run a study through the ABI. */
    const char *config =
        "{\"geometry\":\"flat-square\",\"role\":1,\"degrees\":[2,2],"
        "\"levels\":4,\"solution\":\"trig\",\"norms\":[\"L2\",\"Hdiv\"],"
        "\"projector\":\"tilde-interpolant\"}";
    char *summary = NULL;
    if (drh_study_run(config, &summary) != DRH_STATUS_OK) {
        fprintf(stderr, "study: %s\n", drh_last_error());
        failures++;
    } else {
        if (strstr(summary, "\"pass\":true") == NULL) failures++;
        printf("study summary reports pass: %s\n",
               strstr(summary, "\"pass\":true") ? "yes" : "no");
        drh_string_free(summary);
    }

    drh_field_free(div);
    drh_field_free(curl);
    drh_field_free(f);
    drh_complex_free(cx);
    printf(failures ? "C DRIVE: FAIL (%d)\n" : "C DRIVE: PASS\n", failures);
    return failures ? 1 : 0;
}
