#include <stdio.h>
#include <string.h>
#include "tcq.h"

int main(void) {
    TcqGraph *g = NULL;
    TcqReport *r = NULL;
    char buf[64];
    char err[512];
    size_t needed = 0, states = 0;

    if (tcq_graph_example_debruijn8(&g) != TCQ_STATUS_OK) return 1;
    if (tcq_analyze(g, "uniform", &r) != TCQ_STATUS_OK) return 2;
    if (tcq_report_state_count(r, &states) != TCQ_STATUS_OK || states != 107) return 3;
    if (tcq_report_distortion_string(r, buf, sizeof buf, &needed) != TCQ_STATUS_OK) return 4;
    if (strcmp(buf, "452/1809") != 0) return 5;
    tcq_report_free(r);

    if (tcq_analyze(g, "a:1", &r) != TCQ_STATUS_SOURCE) return 6;
    if (tcq_last_error(err, sizeof err) != tcq_last_error_length()) return 8;
    if (strncmp(err, "source:", 7) != 0) return 7;
    tcq_graph_free(g);
    printf("D(G) = 452/1809\n");
    return 0;
}
