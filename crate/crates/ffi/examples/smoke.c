#include <stdio.h>
#include "vntree.h"

int main(void) {
    VnCodebook *cb = NULL;
    VnExtractor *ex = NULL;
    if (vn_codebook_build(10, &cb) != VN_STATUS_OK) {
        fprintf(stderr, "build: %s\n", vn_last_error());
        return 1;
    }
    vn_extractor_new(cb, &ex);
    vn_codebook_free(cb);

    const uint8_t in[] = {0, 1, 1, 0, 0, 0, 1, 1, 0, 1};
    uint8_t out[16];
    size_t consumed = 0, emitted = 0;
    vn_extractor_feed(ex, in, sizeof in, out, sizeof out, &consumed, &emitted);
    printf("consumed=%zu emitted=%zu\n", consumed, emitted);
    vn_extractor_free(ex);

    double e = 0.0;
    if (vn_expected_height("0.51", 5, &e) != VN_STATUS_OK) {
        fprintf(stderr, "analyze: %s\n", vn_last_error());
        return 1;
    }
    printf("E(Y_5) at p=0.51: %.7f\n", e);
    return 0;
}
