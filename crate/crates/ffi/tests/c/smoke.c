#include <stdio.h>
#include <math.h>
#include "alignlab.h"

int main(void) {
    AlFunction *f = NULL;
    AlActivation *a = NULL;
    if (al_function_parse("parity:S=1;n=4", &f) != AL_OK) return 1;
    if (al_activation_parse("relu", &a) != AL_OK) return 2;
    AlEstimate e;
    if (al_cp_exact(f, 16, &e) != AL_OK || e.value != 0.0625) return 3;
    if (al_inal_dual_kernel(f, a, true, &e) != AL_OK || !(e.value > 0.0)) return 4;
    AlFunction *bad = NULL;
    if (al_function_parse("nope", &bad) != AL_PARSE_ERROR || bad != NULL) return 5;
    char msg[128];
    if (al_last_error_message(msg, sizeof msg) == 0) return 6;
    al_function_free(f);
    al_activation_free(a);
    printf("ok %.6f\n", e.value);
    return 0;
}
