#include <stdio.h>
#include <string.h>
#include "flagrock.h"

int main(void) {
    FlagrockReport *r = NULL;
    if (flagrock_analyze(2, 2, 1, NULL, &r) != FLAGROCK_STATUS_OK) return 1;
    bool fails = false;
    if (flagrock_report_rockland_fails(r, &fails) != FLAGROCK_STATUS_OK || !fails) return 2;
    size_t n = 0;
    flagrock_report_witness_count(r, &n);
    for (size_t i = 0; i < n; i++) {
        size_t degree;
        double residual;
        bool exact;
        if (flagrock_report_witness(r, i, &degree, &residual, &exact) != FLAGROCK_STATUS_OK) return 3;
        printf("witness degree %zu residual %g exact %d\n", degree, residual, exact);
    }
    char *json = NULL;
    if (flagrock_report_json(r, &json) != FLAGROCK_STATUS_OK || strstr(json, "\"rockland_fails\": true") == NULL) return 4;
    flagrock_string_free(json);
    flagrock_report_free(r);
    FlagrockReport *bad = NULL;
    if (flagrock_analyze(0, 2, 1, NULL, &bad) != FLAGROCK_STATUS_INVALID_PARAMETERS || bad != NULL) return 5;
    printf("error: %s\n", flagrock_last_error_message());
    printf("version %s\n", flagrock_version());
    return 0;
}
