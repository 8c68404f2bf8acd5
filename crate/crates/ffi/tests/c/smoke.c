#include <stdio.h>
#include <string.h>
#include "satreconf.h"

int main(void) {
    SrSystem *sys = NULL;
    if (sr_system_new(SR_SYSTEM_KIND_THREE_TANK, &sys) != SR_STATUS_OK) {
        fprintf(stderr, "new: %s\n", sr_last_error());
        return 1;
    }
    size_t ns = sr_system_num_states(sys), ni = sr_system_num_inputs(sys);
    uint8_t observed[16], out[16];
    uint8_t qual[3] = {SR_QUAL_LOW, SR_QUAL_OK, SR_QUAL_OK};
    if (ni > 16 || sr_system_initial_inputs(sys, observed, ni) != SR_STATUS_OK) return 2;
    int32_t found = -1;
    size_t flips = 0;
    SrStatus st = sr_reconf(sys, qual, ns, observed, ni, out, &found, &flips);
    if (st != SR_STATUS_OK) {
        fprintf(stderr, "reconf: %s\n", sr_last_error());
        return 3;
    }
    for (size_t i = 0; i < ni; i++) {
        if (observed[i] != out[i]) {
            char name[32];
            sr_system_input_id(sys, i, name, sizeof name);
            printf("flip %s\n", name);
        }
    }
    printf("found=%d flips=%zu\n", found, flips);
    sr_system_free(sys);
    return 0;
}
