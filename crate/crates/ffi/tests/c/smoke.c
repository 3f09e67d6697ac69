#include <math.h>
#include <stdio.h>
#include "lcdiff.h"

#define CHECK(cond)                                                   \
    do {                                                              \
        if (!(cond)) {                                                \
            char msg[256];                                            \
            lcdiff_last_error(msg, sizeof msg);                       \
            fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond, msg); \
            return 1;                                                 \
        }                                                             \
    } while (0)

int main(void) {
    double k0 = 0.0;
    CHECK(lcdiff_bessel_k0(1.0, &k0) == LCDIFF_OK);
    CHECK(fabs(k0 - 0.4210244382407083) < 1e-15);
    CHECK(lcdiff_bessel_k0(-1.0, &k0) == LCDIFF_ERR_DOMAIN);

    lcdiff_grid *product = NULL;
    lcdiff_grid *difference = NULL;
    CHECK(lcdiff_grid_discretize(LCDIFF_LAW_NORMAL_PRODUCT, 12.0, 1024, &product) == LCDIFF_OK);
    CHECK(lcdiff_self_difference_quadrature(LCDIFF_LAW_NORMAL_PRODUCT, 12.0, 1024, 1e-11, &difference) == LCDIFF_OK);
    CHECK(lcdiff_grid_len(difference) == 2048);

    lcdiff_verdict v;
    CHECK(lcdiff_check_log_concavity(product, 1e-9, &v) == LCDIFF_OK);
    CHECK(!v.holds && v.has_witness);
    CHECK(lcdiff_check_log_concavity(difference, 1e-9, &v) == LCDIFF_OK);
    CHECK(v.holds);

    lcdiff_grid_free(product);
    lcdiff_grid_free(difference);
    puts("ok");
    return 0;
}
